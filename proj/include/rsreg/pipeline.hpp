#pragma once

#include <Eigen/Dense>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rsreg/errors.hpp"
#include "rsreg/moments.hpp"
#include "rsreg/ols.hpp"
#include "rsreg/prob.hpp"

namespace rsreg {

enum class Transform { none, log1p, standardize, log1p_then_standardize };

inline Transform transform_from_name(const std::string& name) {
  if (name == "none") return Transform::none;
  if (name == "log1p") return Transform::log1p;
  if (name == "standardize") return Transform::standardize;
  if (name == "log1p_then_standardize") return Transform::log1p_then_standardize;
  throw invalid_input("transform must be one of none, log1p, standardize, "
                      "log1p_then_standardize");
}

inline std::string transform_name(Transform t) {
  switch (t) {
    case Transform::none: return "none";
    case Transform::log1p: return "log1p";
    case Transform::standardize: return "standardize";
    case Transform::log1p_then_standardize: return "log1p_then_standardize";
  }
  throw invalid_input("transform_name: unknown transform");
}

struct PipelineConfig {
  std::string input;
  std::string response;
  std::vector<std::string> regressors;
  Transform response_transform = Transform::none;
  std::vector<Transform> regressor_transforms;  // empty = all none
  int block_length = 6;
  std::set<int> months = {12, 1, 2};  // empty set disables the filter
  std::string month_column = "month";
  std::vector<int> split_points;  // block indices for blockwise analysis
};

inline void validate(const PipelineConfig& cfg) {
  if (cfg.input.empty()) throw invalid_input("pipeline: empty input path");
  if (cfg.response.empty()) throw invalid_input("pipeline: empty response column");
  if (cfg.regressors.empty()) throw invalid_input("pipeline: no regressor columns");
  if (!cfg.regressor_transforms.empty() &&
      cfg.regressor_transforms.size() != cfg.regressors.size())
    throw invalid_input("pipeline: one transform per regressor required");
  if (cfg.block_length < 1) throw invalid_input("pipeline: block length must be >= 1");
  for (int m : cfg.months)
    if (m < 1 || m > 12) throw invalid_input("pipeline: month outside 1..12");
  if (!cfg.months.empty() && cfg.month_column.empty())
    throw invalid_input("pipeline: month filter needs a month column");
  for (std::size_t i = 0; i < cfg.split_points.size(); ++i)
    if (cfg.split_points[i] < 1 ||
        (i > 0 && cfg.split_points[i] <= cfg.split_points[i - 1]))
      throw invalid_input("pipeline: split points must be positive and increasing");
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline bool is_missing(const std::string& field) {
  return field.empty() || field == "NA" || field == "na" || field == "NaN";
}

inline double parse_cell(const std::string& field, int line_no, const std::string& col) {
  if (is_missing(field)) return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw data_error("ingest: unparseable numeric '" + field + "' in column " + col +
                     " at line " + std::to_string(line_no));
  return value;
}

inline double apply_transform_value(double x, Transform t, const std::string& col) {
  if (t == Transform::log1p || t == Transform::log1p_then_standardize) {
    if (!(x > -1.0))
      throw data_error("ingest: log1p domain violation in column " + col);
    return std::log1p(x);
  }
  return x;
}

}  // namespace detail

/// CSV ingestion: month filter, block averaging with within-block
/// available-case means, then the per-column transforms.  Standardization
/// statistics come from the retained block-averaged sample.  Blocks in which
/// some needed column has no valid entry are dropped, as is a trailing
/// partial block.
inline RegressionDataset ingest(const PipelineConfig& cfg) {
  validate(cfg);
  std::ifstream in(cfg.input);
  if (!in) throw data_error("ingest: cannot open " + cfg.input);

  std::string line;
  if (!std::getline(in, line)) throw data_error("ingest: empty file " + cfg.input);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = detail::split_csv_line(line);

  auto column_index = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw data_error("ingest: column '" + name + "' not in " + cfg.input);
  };
  const int p = static_cast<int>(cfg.regressors.size());
  std::vector<int> cols(p + 1);
  cols[0] = column_index(cfg.response);
  for (int j = 0; j < p; ++j) cols[j + 1] = column_index(cfg.regressors[j]);
  const int month_col = cfg.months.empty() ? -1 : column_index(cfg.month_column);

  std::vector<std::vector<double>> rows;  // retained raw rows, response first
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      throw data_error("ingest: wrong field count at line " + std::to_string(line_no));
    if (month_col >= 0) {
      const double m = detail::parse_cell(fields[month_col], line_no, cfg.month_column);
      if (std::isnan(m) || cfg.months.count(static_cast<int>(m)) == 0) continue;
    }
    std::vector<double> row(p + 1);
    for (int j = 0; j <= p; ++j)
      row[j] = detail::parse_cell(fields[cols[j]], line_no,
                                  j == 0 ? cfg.response : cfg.regressors[j - 1]);
    rows.push_back(std::move(row));
  }

  const int n_blocks = static_cast<int>(rows.size()) / cfg.block_length;
  std::vector<std::vector<double>> blocks;
  blocks.reserve(n_blocks);
  for (int b = 0; b < n_blocks; ++b) {
    std::vector<double> avg(p + 1);
    bool valid = true;
    for (int j = 0; j <= p && valid; ++j) {
      double sum = 0.0;
      int count = 0;
      for (int t = 0; t < cfg.block_length; ++t) {
        const double v = rows[b * cfg.block_length + t][j];
        if (!std::isnan(v)) {
          sum += v;
          ++count;
        }
      }
      if (count == 0)
        valid = false;
      else
        avg[j] = sum / count;
    }
    if (valid) blocks.push_back(std::move(avg));
  }
  const int n = static_cast<int>(blocks.size());
  if (n == 0) throw data_error("ingest: no usable blocks in " + cfg.input);

  RegressionDataset data;
  data.y.resize(n);
  data.x.resize(n, p);
  std::vector<Transform> transforms(p + 1, Transform::none);
  transforms[0] = cfg.response_transform;
  for (int j = 0; j < p; ++j)
    transforms[j + 1] =
        cfg.regressor_transforms.empty() ? Transform::none : cfg.regressor_transforms[j];

  for (int j = 0; j <= p; ++j) {
    const std::string& col = j == 0 ? cfg.response : cfg.regressors[j - 1];
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i)
      v[i] = detail::apply_transform_value(blocks[i][j], transforms[j], col);
    if (transforms[j] == Transform::standardize ||
        transforms[j] == Transform::log1p_then_standardize) {
      const double mean = v.mean();
      const double sd = std::sqrt((v.array() - mean).square().sum() / (n - 1));
      if (!(sd > 0.0)) throw data_error("ingest: zero variance in column " + col);
      v = (v.array() - mean) / sd;
    }
    if (j == 0)
      data.y = v;
    else
      data.x.col(j - 1) = v;
  }
  return data;
}

struct DiagnosticsReport {
  int n_effective = 0;
  double rmse = 0.0;
  double mae = 0.0;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  double cond = 0.0;
  std::vector<int> lb_lags;
  Eigen::VectorXd lb_stat;
  Eigen::VectorXd lb_p;
};

/// Ljung-Box statistic Q = n(n+2) sum_{k<=h} rho_k^2/(n-k) on the demeaned
/// series, with the chi-square(h) upper tail probability.
inline std::pair<double, double> ljung_box(const Eigen::VectorXd& series, int lag) {
  const int n = static_cast<int>(series.size());
  if (lag < 1) throw invalid_input("ljung_box: lag must be >= 1");
  if (n <= lag) throw invalid_input("ljung_box: need n > lag");
  const Eigen::ArrayXd centered = series.array() - series.mean();
  const double denom = centered.square().sum();
  if (!(denom > 0.0)) throw numeric_error("ljung_box: zero variance series");
  double q = 0.0;
  for (int k = 1; k <= lag; ++k) {
    double num = 0.0;
    for (int t = k; t < n; ++t) num += centered[t] * centered[t - k];
    const double rho = num / denom;
    q += rho * rho / (n - k);
  }
  q *= n * (n + 2.0);
  return {q, 1.0 - chi2_cdf(static_cast<double>(lag), q)};
}

/// Fit diagnostics for a residual vector on its dataset.
inline DiagnosticsReport diagnose(const RegressionDataset& data,
                                  const Eigen::VectorXd& residuals,
                                  const std::vector<int>& lags = {4}) {
  validate(data);
  const int n = data.n();
  if (residuals.size() != n) throw invalid_input("diagnose: residual length mismatch");
  if (lags.empty()) throw invalid_input("diagnose: need at least one lag");
  for (int lag : lags)
    if (lag < 1 || lag >= n) throw invalid_input("diagnose: lag outside [1, n)");

  DiagnosticsReport rep;
  rep.n_effective = n;
  rep.rmse = std::sqrt(residuals.squaredNorm() / n);
  rep.mae = residuals.cwiseAbs().mean();
  const double ss_tot = (data.y.array() - data.y.mean()).square().sum();
  if (!(ss_tot > 0.0)) throw numeric_error("diagnose: zero response variance");
  rep.r2 = 1.0 - residuals.squaredNorm() / ss_tot;
  const int m = data.p() + 1;
  rep.adj_r2 = 1.0 - (1.0 - rep.r2) * (n - 1.0) / (n - m);
  const Eigen::VectorXd sv = augment_intercept(data.x).jacobiSvd().singularValues();
  rep.cond = sv[0] / sv[sv.size() - 1];
  rep.lb_lags = lags;
  rep.lb_stat.resize(lags.size());
  rep.lb_p.resize(lags.size());
  const double res_var = (residuals.array() - residuals.mean()).square().sum();
  for (std::size_t i = 0; i < lags.size(); ++i) {
    if (res_var > 0.0) {
      const auto [q, pval] = ljung_box(residuals, lags[i]);
      rep.lb_stat[i] = q;
      rep.lb_p[i] = pval;
    } else {  // constant residuals carry no autocorrelation evidence
      rep.lb_stat[i] = 0.0;
      rep.lb_p[i] = 1.0;
    }
  }
  return rep;
}

}  // namespace rsreg
