// Command line front end: simulate, infer, sweep, calibrate, diagnose.
//
// Exit codes: 0 success, 1 bad usage or invalid configuration, 2 data errors,
// 3 numeric failures during estimation.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "rsreg/rsreg.hpp"

using nlohmann::json;

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(text.substr(start));
      break;
    }
    out.push_back(text.substr(start, comma - start));
    start = comma + 1;
  }
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

std::vector<double> parse_doubles(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  for (const std::string& tok : split_list(text)) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw rsreg::invalid_input(flag + ": cannot parse '" + tok + "'");
    }
  }
  return out;
}

std::vector<int> parse_ints(const std::string& text, const std::string& flag) {
  std::vector<int> out;
  for (double v : parse_doubles(text, flag)) {
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
      throw rsreg::invalid_input(flag + ": expected integers");
    out.push_back(i);
  }
  return out;
}

std::vector<rsreg::Method> parse_methods(const std::string& text) {
  if (text == "all")
    return {rsreg::Method::proposed, rsreg::Method::nw_hac, rsreg::Method::mac};
  std::vector<rsreg::Method> out;
  for (const std::string& tok : split_list(text)) {
    if (tok == "proposed")
      out.push_back(rsreg::Method::proposed);
    else if (tok == "nw-hac")
      out.push_back(rsreg::Method::nw_hac);
    else if (tok == "mac")
      out.push_back(rsreg::Method::mac);
    else
      throw rsreg::invalid_input("--method: unknown method '" + tok + "'");
  }
  if (out.empty()) throw rsreg::invalid_input("--method: empty method list");
  return out;
}

rsreg::Margin parse_margin(const std::string& text) {
  if (text == "gaussian") return rsreg::Margin::gaussian;
  if (text == "t5") return rsreg::Margin::standardized_t5;
  throw rsreg::invalid_input("--margin must be gaussian or t5");
}

/// Optional JSON side file; values apply only where the command line is silent.
class ConfigPatch {
 public:
  explicit ConfigPatch(const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw rsreg::data_error("config: cannot open " + path);
    try {
      in >> j_;
    } catch (const std::exception& e) {
      throw rsreg::data_error("config: invalid JSON in " + path + ": " + e.what());
    }
  }

  template <typename T>
  void apply(const CLI::Option* opt, const char* key, T& value) const {
    if (j_.is_null() || opt->count() > 0 || !j_.contains(key)) return;
    try {
      value = j_.at(key).get<T>();
    } catch (const std::exception&) {
      throw rsreg::invalid_input(std::string("config: bad value for key '") + key + "'");
    }
  }

 private:
  json j_;
};

json vec_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json mat_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

void write_or_print(const json& doc, const std::string& out_path, bool to_stdout) {
  const std::string text = doc.dump(2) + "\n";
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw rsreg::data_error("cannot open output file " + out_path);
    out << text;
    if (!out) throw rsreg::data_error("failed writing " + out_path);
  }
  if (to_stdout || out_path.empty()) std::fputs(text.c_str(), stdout);
}

// ---------------------------------------------------------------------------
// shared ingestion flags (infer, diagnose)

struct IngestArgs {
  std::string input;
  std::string response = "pm2.5";
  std::string regressors = "DEWP,TEMP,Iws";
  std::string response_transform = "log1p";
  std::string transforms = "standardize,standardize,log1p_then_standardize";
  std::string months = "12,1,2";
  std::string month_column = "month";
  int block_length = 6;
  bool simulated = false;

  CLI::Option* opt_response = nullptr;
  CLI::Option* opt_regressors = nullptr;
  CLI::Option* opt_response_transform = nullptr;
  CLI::Option* opt_transforms = nullptr;
  CLI::Option* opt_months = nullptr;
  CLI::Option* opt_block = nullptr;
};

void add_ingest_flags(CLI::App* cmd, IngestArgs& a) {
  cmd->add_option("--input", a.input, "input CSV path")->required();
  a.opt_response = cmd->add_option("--response", a.response, "response column");
  a.opt_regressors =
      cmd->add_option("--regressors", a.regressors, "comma list of regressor columns");
  a.opt_response_transform = cmd->add_option("--response-transform",
                                             a.response_transform,
                                             "none|log1p|standardize|log1p_then_standardize");
  a.opt_transforms =
      cmd->add_option("--transforms", a.transforms, "comma list, one per regressor");
  a.opt_months =
      cmd->add_option("--months", a.months, "comma list of months to keep, or 'none'");
  cmd->add_option("--month-column", a.month_column, "name of the month column");
  a.opt_block = cmd->add_option("--block-length", a.block_length,
                                "rows per block average (>= 1)");
  cmd->add_flag("--simulated", a.simulated,
                "treat input as a simulate-subcommand CSV (t,y,x1,x2,x3; no "
                "filtering, no transforms)");
}

rsreg::PipelineConfig build_pipeline_config(const IngestArgs& a) {
  rsreg::PipelineConfig cfg;
  cfg.input = a.input;
  if (a.simulated) {
    cfg.response = a.opt_response->count() ? a.response : "y";
    cfg.regressors = split_list(a.opt_regressors->count() ? a.regressors : "x1,x2,x3");
    cfg.response_transform = rsreg::transform_from_name(
        a.opt_response_transform->count() ? a.response_transform : "none");
    cfg.regressor_transforms.clear();
    if (a.opt_transforms->count())
      for (const std::string& t : split_list(a.transforms))
        cfg.regressor_transforms.push_back(rsreg::transform_from_name(t));
    cfg.months.clear();
    if (a.opt_months->count() && a.months != "none")
      for (int m : parse_ints(a.months, "--months")) cfg.months.insert(m);
    cfg.block_length = a.opt_block->count() ? a.block_length : 1;
  } else {
    cfg.response = a.response;
    cfg.regressors = split_list(a.regressors);
    cfg.response_transform = rsreg::transform_from_name(a.response_transform);
    for (const std::string& t : split_list(a.transforms))
      cfg.regressor_transforms.push_back(rsreg::transform_from_name(t));
    cfg.months.clear();
    if (a.months != "none")
      for (int m : parse_ints(a.months, "--months")) cfg.months.insert(m);
    cfg.block_length = a.block_length;
  }
  cfg.month_column = a.month_column;
  return cfg;
}

// ---------------------------------------------------------------------------
// simulate

int run_simulate(const std::string& model, double phi, double theta, double d,
                 double lambda1, double lambda2, double hurst,
                 const std::string& margin_name, int n, std::uint64_t seed,
                 const std::string& out) {
  const rsreg::Margin margin = parse_margin(margin_name);
  rsreg::ErrorProcessSpec spec;
  if (model == "arma")
    spec = rsreg::arma_spec(phi, theta, margin);
  else if (model == "arfima")
    spec = rsreg::arfima_spec(d, margin);
  else if (model == "fgm")
    spec = rsreg::fgm_spec(lambda1, lambda2, margin);
  else if (model == "fgn")
    spec = rsreg::fgn_spec(hurst, margin);
  else
    throw rsreg::invalid_input("--model must be arma, arfima, fgm or fgn");

  const rsreg::SimulatedDataset sim = rsreg::gen_dataset(n, spec, seed);
  rsreg::save_dataset_csv(sim, out);
  const auto [p1, p2] = rsreg::model_params(spec);
  std::printf("wrote %s: n=%d model=%s(%g, %g) margin=%s seed=%llu\n", out.c_str(), n,
              rsreg::model_name(spec).c_str(), p1, p2,
              rsreg::margin_name(spec).c_str(),
              static_cast<unsigned long long>(seed));
  return 0;
}

// ---------------------------------------------------------------------------
// infer

rsreg::WaldTest comparator_wald(const Eigen::VectorXd& beta_hat,
                                const Eigen::MatrixXd& cov, const Eigen::MatrixXd& R,
                                const Eigen::VectorXd& r) {
  const Eigen::MatrixXd mid = R * cov * R.transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mid);
  if (!(es.eigenvalues().minCoeff() > 0.0))
    throw rsreg::singular_covariance("wald: restricted covariance is singular");
  const Eigen::VectorXd dev = R * beta_hat - r;
  rsreg::WaldTest test;
  test.statistic = dev.dot(mid.ldlt().solve(dev));
  test.dof = static_cast<int>(R.rows());
  test.p_value = 1.0 - rsreg::chi2_cdf(test.dof, test.statistic);
  return test;
}

void print_coef_table(const std::vector<std::string>& names,
                      const Eigen::VectorXd& estimate, const Eigen::VectorXd& center,
                      const std::vector<std::pair<double, double>>& intervals) {
  std::printf("  %-12s %12s %12s %12s %12s\n", "coef", "estimate", "center", "lo",
              "hi");
  for (std::size_t j = 0; j < names.size(); ++j)
    std::printf("  %-12s %12.5f %12.5f %12.5f %12.5f\n", names[j].c_str(),
                estimate[j], center[j], intervals[j].first, intervals[j].second);
}

json analyze_segment(const rsreg::RegressionDataset& data,
                     const std::vector<rsreg::Method>& methods, double alpha,
                     std::uint64_t seed, std::uint64_t segment_index,
                     const rsreg::BandwidthOptions& bopts,
                     const std::vector<std::string>& coef_names) {
  const int n = data.n();
  const int p = data.p();
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(p, p + 1);
  R.rightCols(p).setIdentity();  // joint test: all slopes zero
  const Eigen::VectorXd r0 = Eigen::VectorXd::Zero(p);

  json out = json::array();
  for (rsreg::Method method : methods) {
    json m;
    m["method"] = rsreg::method_name(method);
    if (method == rsreg::Method::proposed) {
      rsreg::SmoothingConfig scfg;
      const rsreg::BandwidthDecision dec = rsreg::select_bandwidth(data, scfg, bopts);
      scfg.h = dec.h;
      std::mt19937_64 gen = rsreg::substream(seed, {2, segment_index});
      const rsreg::CoefficientInference inf = rsreg::infer(data, scfg, dec, gen);
      const rsreg::EllipsoidRegion region = rsreg::joint_region(inf, alpha);
      std::vector<std::pair<double, double>> intervals;
      for (int j = 0; j <= p; ++j) intervals.push_back(rsreg::marginal_ci(inf, j, alpha));
      const rsreg::WaldTest wald = rsreg::wald_test(inf, R, r0);

      m["branch"] = dec.branch == rsreg::MemoryBranch::long_memory ? "long_memory"
                                                                   : "short_memory";
      m["d_hat"] = dec.gph.d_hat;
      m["t_stat"] = dec.t_stat;
      m["h"] = dec.h;
      m["nh"] = inf.nh;
      m["truncation_active"] = inf.truncation_active;
      m["beta"] = vec_to_json(inf.beta);
      m["bias_corr"] = vec_to_json(inf.bias_corr);
      m["sigma_beta"] = mat_to_json(inf.sigma_beta);
      json iv = json::array();
      for (const auto& [lo, hi] : intervals) iv.push_back({lo, hi});
      m["intervals"] = iv;
      m["joint"] = {{"radius", region.radius}, {"log_volume", region.log_volume}};
      m["wald"] = {{"stat", wald.statistic}, {"dof", wald.dof}, {"p", wald.p_value}};

      std::printf("proposed: branch %s  d_hat %.4f  t %.3f  h %.5f  nh %.2f%s\n",
                  m["branch"].get<std::string>().c_str(), dec.gph.d_hat, dec.t_stat,
                  dec.h, inf.nh, inf.truncation_active ? "  [truncation active]" : "");
      print_coef_table(coef_names, inf.beta, inf.beta - inf.bias_corr, intervals);
      std::printf("  joint: radius %.6g  log_volume %.6g\n", region.radius,
                  region.log_volume);
      std::printf("  wald slopes=0: stat %.4g  dof %d  p %.4g\n", wald.statistic,
                  wald.dof, wald.p_value);
    } else {
      const rsreg::OlsFit fit = rsreg::ols_fit(data);
      Eigen::MatrixXd cov;
      if (method == rsreg::Method::nw_hac) {
        const rsreg::HacResult hac = rsreg::nw_hac_cov(data);
        cov = hac.cov;
        m["lag"] = hac.lag;
        m["prewhitened"] = hac.prewhitened;
        m["fallback"] = hac.fallback;
      } else {
        const rsreg::MacResult mac = rsreg::mac_cov(data);
        cov = mac.cov;
        m["d_hats"] = vec_to_json(mac.d_hats);
        m["m"] = mac.m;
        m["big_m"] = mac.big_m;
      }
      const auto [region, intervals] = rsreg::comparator_regions(fit.beta, cov, n, alpha);
      const rsreg::WaldTest wald = comparator_wald(fit.beta, cov, R, r0);
      m["beta"] = vec_to_json(fit.beta);
      m["sigma_beta"] = mat_to_json(cov);
      json iv = json::array();
      for (const auto& [lo, hi] : intervals) iv.push_back({lo, hi});
      m["intervals"] = iv;
      m["joint"] = {{"radius", region.radius}, {"log_volume", region.log_volume}};
      m["wald"] = {{"stat", wald.statistic}, {"dof", wald.dof}, {"p", wald.p_value}};

      std::printf("%s:\n", rsreg::method_name(method).c_str());
      print_coef_table(coef_names, fit.beta, fit.beta, intervals);
      std::printf("  joint: radius %.6g  log_volume %.6g\n", region.radius,
                  region.log_volume);
      std::printf("  wald slopes=0: stat %.4g  dof %d  p %.4g\n", wald.statistic,
                  wald.dof, wald.p_value);
    }
    out.push_back(m);
  }
  return out;
}

int run_infer(const IngestArgs& ingest_args, const std::string& split,
              const std::string& method, double alpha, std::uint64_t seed,
              const std::string& grid_path, const std::string& out,
              bool json_to_stdout) {
  const rsreg::PipelineConfig pcfg = build_pipeline_config(ingest_args);
  const rsreg::RegressionDataset data = rsreg::ingest(pcfg);
  const std::vector<rsreg::Method> methods = parse_methods(method);
  rsreg::BandwidthOptions bopts;
  if (!grid_path.empty()) bopts.grid = rsreg::load_grid_csv(grid_path);

  std::vector<std::string> coef_names = {"intercept"};
  for (const std::string& name : pcfg.regressors) coef_names.push_back(name);

  const int n = data.n();
  std::vector<std::pair<int, int>> segments = {{1, n}};  // 1-based inclusive
  if (!split.empty()) {
    int prev = 1;
    for (int s : parse_ints(split, "--split")) {
      if (s < prev || s >= n) throw rsreg::invalid_input("--split: points must be increasing and inside [1, n)");
      segments.emplace_back(prev, s);
      prev = s + 1;
    }
    segments.emplace_back(prev, n);
  }

  json doc;
  doc["command"] = "infer";
  doc["input"] = pcfg.input;
  doc["alpha"] = alpha;
  doc["seed"] = seed;
  doc["n_blocks"] = n;
  doc["coefficients"] = coef_names;
  json segs = json::array();
  for (std::size_t si = 0; si < segments.size(); ++si) {
    const auto [first, last] = segments[si];
    rsreg::RegressionDataset part;
    part.y = data.y.segment(first - 1, last - first + 1);
    part.x = data.x.middleRows(first - 1, last - first + 1);
    std::printf("== blocks %d-%d  (n = %d) ==\n", first, last, part.n());
    json seg;
    seg["first_block"] = first;
    seg["last_block"] = last;
    seg["n"] = part.n();
    seg["methods"] = analyze_segment(part, methods, alpha, seed,
                                     static_cast<std::uint64_t>(si), bopts, coef_names);
    segs.push_back(seg);
  }
  doc["segments"] = segs;
  write_or_print(doc, out, json_to_stdout);
  return 0;
}

// ---------------------------------------------------------------------------
// diagnose

int run_diagnose(const IngestArgs& ingest_args, const std::string& lags_text,
                 const std::string& out, bool json_to_stdout) {
  const rsreg::PipelineConfig pcfg = build_pipeline_config(ingest_args);
  const rsreg::RegressionDataset data = rsreg::ingest(pcfg);
  const std::vector<int> lags = parse_ints(lags_text, "--lags");
  const rsreg::OlsFit fit = rsreg::ols_fit(data);
  const rsreg::DiagnosticsReport rep = rsreg::diagnose(data, fit.residuals, lags);

  std::printf("n blocks     %d\n", rep.n_effective);
  std::printf("R^2          %.4f\n", rep.r2);
  std::printf("adj R^2      %.4f\n", rep.adj_r2);
  std::printf("RMSE         %.4f\n", rep.rmse);
  std::printf("MAE          %.4f\n", rep.mae);
  std::printf("condition    %.4g\n", rep.cond);
  for (std::size_t i = 0; i < rep.lb_lags.size(); ++i)
    std::printf("Ljung-Box %-3d Q=%.4f  p=%.4g\n", rep.lb_lags[i], rep.lb_stat[i],
                rep.lb_p[i]);

  json doc;
  doc["command"] = "diagnose";
  doc["input"] = pcfg.input;
  doc["n"] = rep.n_effective;
  doc["beta"] = vec_to_json(fit.beta);
  doc["rmse"] = rep.rmse;
  doc["mae"] = rep.mae;
  doc["r2"] = rep.r2;
  doc["adj_r2"] = rep.adj_r2;
  doc["cond"] = rep.cond;
  json lb = json::array();
  for (std::size_t i = 0; i < rep.lb_lags.size(); ++i)
    lb.push_back({{"lag", rep.lb_lags[i]},
                  {"stat", rep.lb_stat[i]},
                  {"p", rep.lb_p[i]}});
  doc["ljung_box"] = lb;
  if (!out.empty() || json_to_stdout) write_or_print(doc, out, json_to_stdout);
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

int run_sweep(const std::string& axis_name, const std::string& margin_name,
              const std::string& n_set, int reps, double alpha,
              const std::string& method, std::uint64_t seed, int threads,
              const std::string& out) {
  rsreg::ExperimentConfig cfg;
  cfg.n_set = parse_ints(n_set, "--n-set");
  cfg.reps = reps;
  cfg.alpha = alpha;
  cfg.methods = parse_methods(method);
  cfg.seed = seed;
  const std::vector<rsreg::AggregateRow> rows =
      rsreg::sweep(rsreg::sweep_axis_from_name(axis_name), cfg,
                   parse_margin(margin_name), threads);
  rsreg::save_experiment_csv(rows, out);
  std::printf("wrote %zu rows to %s\n", rows.size(), out.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// calibrate

int run_calibrate(const std::string& d_grid, const std::string& c_grid,
                  const std::string& n_set, int reps, double alpha,
                  const std::string& margin_name, std::uint64_t seed, int threads,
                  const std::string& out) {
  const rsreg::CalibrationTable table = rsreg::calibrate_grid_detailed(
      parse_doubles(d_grid, "--d-grid"), parse_doubles(c_grid, "--c-grid"),
      parse_ints(n_set, "--n-set"), reps, alpha, seed, parse_margin(margin_name),
      rsreg::default_true_beta(), threads);
  for (std::size_t i = 0; i < table.grid.d.size(); ++i) {
    double best_dev = HUGE_VAL, best_lv = HUGE_VAL;
    for (std::size_t j = 0; j < table.c.size(); ++j)
      if (table.c[j] == table.grid.c[i]) {
        best_dev = table.max_dev(i, j);
        best_lv = table.mean_log_volume(i, j);
      }
    std::printf("d=%.2f  C=%g  max coverage dev %.4f  mean log volume %.4f\n",
                table.grid.d[i], table.grid.c[i], best_dev, best_lv);
  }
  rsreg::save_grid_csv(table.grid, out);
  std::printf("wrote grid to %s\n", out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random-smoothing confidence regions for regression with "
               "stationary dependent errors"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON file with defaults for any flag");

  // simulate
  auto* sim = app.add_subcommand("simulate", "draw a synthetic regression dataset");
  sim->fallthrough();
  std::string sim_model = "arma", sim_margin = "gaussian", sim_out;
  double sim_phi = 0.0, sim_theta = 0.0, sim_d = 0.25, sim_l1 = 0.0, sim_l2 = 0.0,
         sim_hurst = 0.8;
  int sim_n = 1000;
  std::uint64_t sim_seed = 1;
  auto* o_model = sim->add_option("--model", sim_model, "arma|arfima|fgm|fgn");
  auto* o_phi = sim->add_option("--phi", sim_phi, "AR coefficient");
  auto* o_theta = sim->add_option("--theta", sim_theta, "MA coefficient");
  auto* o_d = sim->add_option("--d", sim_d, "fractional memory parameter");
  auto* o_l1 = sim->add_option("--lambda1", sim_l1, "copula lambda1");
  auto* o_l2 = sim->add_option("--lambda2", sim_l2, "copula lambda2");
  auto* o_hurst = sim->add_option("--hurst", sim_hurst, "Hurst index");
  auto* o_smargin = sim->add_option("--margin", sim_margin, "gaussian|t5");
  auto* o_sn = sim->add_option("--n", sim_n, "sample size");
  auto* o_sseed = sim->add_option("--seed", sim_seed, "RNG seed");
  auto* o_sout = sim->add_option("--out", sim_out, "output CSV path")->required();

  // infer
  auto* inf = app.add_subcommand("infer", "confidence regions on a CSV dataset");
  inf->fallthrough();
  IngestArgs inf_ingest;
  add_ingest_flags(inf, inf_ingest);
  std::string inf_split, inf_method = "all", inf_grid, inf_out;
  double inf_alpha = 0.05;
  std::uint64_t inf_seed = 1;
  bool inf_json = false;
  auto* o_isplit = inf->add_option("--split", inf_split,
                                   "comma list of block indices ending each segment");
  auto* o_imethod = inf->add_option("--method", inf_method, "proposed|nw-hac|mac|all");
  auto* o_ialpha = inf->add_option("--alpha", inf_alpha, "miscoverage level");
  auto* o_iseed = inf->add_option("--seed", inf_seed, "RNG seed for the auxiliary draw");
  auto* o_igrid = inf->add_option("--grid", inf_grid, "calibration grid CSV");
  auto* o_iout = inf->add_option("--out", inf_out, "write the JSON report here");
  inf->add_flag("--json", inf_json, "print JSON to stdout as well");

  // diagnose
  auto* dia = app.add_subcommand("diagnose", "OLS fit diagnostics on a CSV dataset");
  dia->fallthrough();
  IngestArgs dia_ingest;
  add_ingest_flags(dia, dia_ingest);
  std::string dia_lags = "6,12", dia_out;
  bool dia_json = false;
  auto* o_dlags = dia->add_option("--lags", dia_lags, "Ljung-Box lags");
  auto* o_dout = dia->add_option("--out", dia_out, "write the JSON report here");
  dia->add_flag("--json", dia_json, "print JSON to stdout as well");

  // sweep
  auto* swp = app.add_subcommand("sweep", "Monte Carlo coverage experiment");
  swp->fallthrough();
  std::string swp_axis, swp_margin = "gaussian", swp_nset = "250,500,1000",
              swp_method = "all", swp_out;
  int swp_reps = 500, swp_threads = 0;
  double swp_alpha = 0.05;
  std::uint64_t swp_seed = 1;
  auto* o_waxis = swp->add_option("--axis", swp_axis,
                                  "arma_grid|fgm_grid|arfima_d|fgn_h")->required();
  auto* o_wmargin = swp->add_option("--margin", swp_margin, "gaussian|t5");
  auto* o_wnset = swp->add_option("--n-set", swp_nset, "comma list of sample sizes");
  auto* o_wreps = swp->add_option("--reps", swp_reps, "replications per cell");
  auto* o_walpha = swp->add_option("--alpha", swp_alpha, "miscoverage level");
  auto* o_wmethod = swp->add_option("--method", swp_method, "proposed|nw-hac|mac|all");
  auto* o_wseed = swp->add_option("--seed", swp_seed, "master seed");
  auto* o_wthreads = swp->add_option("--threads", swp_threads, "0 = all cores");
  auto* o_wout = swp->add_option("--out", swp_out, "output CSV path")->required();

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "pick C(d) for the long-memory branch");
  cal->fallthrough();
  std::string cal_d = "0.15,0.25,0.35,0.45", cal_c = "3,5,7,9,11,13,17",
              cal_nset = "250,1000", cal_margin = "gaussian", cal_out;
  int cal_reps = 300, cal_threads = 0;
  double cal_alpha = 0.05;
  std::uint64_t cal_seed = 1;
  auto* o_cd = cal->add_option("--d-grid", cal_d, "comma list of memory parameters");
  auto* o_cc = cal->add_option("--c-grid", cal_c, "comma list of C candidates");
  auto* o_cnset = cal->add_option("--n-set", cal_nset, "comma list of sample sizes");
  auto* o_creps = cal->add_option("--reps", cal_reps, "replications per cell");
  auto* o_calpha = cal->add_option("--alpha", cal_alpha, "miscoverage level");
  auto* o_cmargin = cal->add_option("--margin", cal_margin, "gaussian|t5");
  auto* o_cseed = cal->add_option("--seed", cal_seed, "master seed");
  auto* o_cthreads = cal->add_option("--threads", cal_threads, "0 = all cores");
  auto* o_cout = cal->add_option("--out", cal_out, "output grid CSV path")->required();

  try {
    app.parse(argc, argv);
    const ConfigPatch patch(config_path);

    if (sim->parsed()) {
      patch.apply(o_model, "model", sim_model);
      patch.apply(o_phi, "phi", sim_phi);
      patch.apply(o_theta, "theta", sim_theta);
      patch.apply(o_d, "d", sim_d);
      patch.apply(o_l1, "lambda1", sim_l1);
      patch.apply(o_l2, "lambda2", sim_l2);
      patch.apply(o_hurst, "hurst", sim_hurst);
      patch.apply(o_smargin, "margin", sim_margin);
      patch.apply(o_sn, "n", sim_n);
      patch.apply(o_sseed, "seed", sim_seed);
      patch.apply(o_sout, "out", sim_out);
      return run_simulate(sim_model, sim_phi, sim_theta, sim_d, sim_l1, sim_l2,
                          sim_hurst, sim_margin, sim_n, sim_seed, sim_out);
    }
    if (inf->parsed()) {
      patch.apply(inf_ingest.opt_response, "response", inf_ingest.response);
      patch.apply(inf_ingest.opt_regressors, "regressors", inf_ingest.regressors);
      patch.apply(inf_ingest.opt_response_transform, "response_transform",
                  inf_ingest.response_transform);
      patch.apply(inf_ingest.opt_transforms, "transforms", inf_ingest.transforms);
      patch.apply(inf_ingest.opt_months, "months", inf_ingest.months);
      patch.apply(inf_ingest.opt_block, "block_length", inf_ingest.block_length);
      patch.apply(o_isplit, "split", inf_split);
      patch.apply(o_imethod, "method", inf_method);
      patch.apply(o_ialpha, "alpha", inf_alpha);
      patch.apply(o_iseed, "seed", inf_seed);
      patch.apply(o_igrid, "grid", inf_grid);
      patch.apply(o_iout, "out", inf_out);
      return run_infer(inf_ingest, inf_split, inf_method, inf_alpha, inf_seed,
                       inf_grid, inf_out, inf_json);
    }
    if (dia->parsed()) {
      patch.apply(dia_ingest.opt_response, "response", dia_ingest.response);
      patch.apply(dia_ingest.opt_regressors, "regressors", dia_ingest.regressors);
      patch.apply(dia_ingest.opt_response_transform, "response_transform",
                  dia_ingest.response_transform);
      patch.apply(dia_ingest.opt_transforms, "transforms", dia_ingest.transforms);
      patch.apply(dia_ingest.opt_months, "months", dia_ingest.months);
      patch.apply(dia_ingest.opt_block, "block_length", dia_ingest.block_length);
      patch.apply(o_dlags, "lags", dia_lags);
      patch.apply(o_dout, "out", dia_out);
      return run_diagnose(dia_ingest, dia_lags, dia_out, dia_json);
    }
    if (swp->parsed()) {
      patch.apply(o_waxis, "axis", swp_axis);
      patch.apply(o_wmargin, "margin", swp_margin);
      patch.apply(o_wnset, "n_set", swp_nset);
      patch.apply(o_wreps, "reps", swp_reps);
      patch.apply(o_walpha, "alpha", swp_alpha);
      patch.apply(o_wmethod, "method", swp_method);
      patch.apply(o_wseed, "seed", swp_seed);
      patch.apply(o_wthreads, "threads", swp_threads);
      patch.apply(o_wout, "out", swp_out);
      return run_sweep(swp_axis, swp_margin, swp_nset, swp_reps, swp_alpha,
                       swp_method, swp_seed, swp_threads, swp_out);
    }
    if (cal->parsed()) {
      patch.apply(o_cd, "d_grid", cal_d);
      patch.apply(o_cc, "c_grid", cal_c);
      patch.apply(o_cnset, "n_set", cal_nset);
      patch.apply(o_creps, "reps", cal_reps);
      patch.apply(o_calpha, "alpha", cal_alpha);
      patch.apply(o_cmargin, "margin", cal_margin);
      patch.apply(o_cseed, "seed", cal_seed);
      patch.apply(o_cthreads, "threads", cal_threads);
      patch.apply(o_cout, "out", cal_out);
      return run_calibrate(cal_d, cal_c, cal_nset, cal_reps, cal_alpha, cal_margin,
                           cal_seed, cal_threads, cal_out);
    }
    return 1;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;  // help prints with code 0, usage errors are 1
  } catch (const rsreg::invalid_input& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const rsreg::data_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const rsreg::numeric_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
