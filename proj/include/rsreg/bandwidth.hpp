#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rsreg/errors.hpp"
#include "rsreg/moments.hpp"
#include "rsreg/ols.hpp"
#include "rsreg/prob.hpp"
#include "rsreg/smoothing.hpp"
#include "rsreg/spectral.hpp"

namespace rsreg {

struct GphEstimate {
  double d_hat = 0.0;
  double sigma_d = 0.0;  // pi / sqrt(24 m)
  int m = 0;             // frequencies used
  int n = 0;             // series length
};

enum class MemoryBranch { short_memory, long_memory };

struct BandwidthDecision {
  MemoryBranch branch = MemoryBranch::short_memory;
  double h = 0.0;
  GphEstimate gph;
  double t_stat = 0.0;
  double alpha = 0.05;
  double c_of_d = 0.0;  // interpolated C(d_hat); only set on the long branch
};

/// Calibrated (d, C) pairs; d strictly increasing.
struct CalibrationGrid {
  std::vector<double> d;
  std::vector<double> c;
};

inline void validate(const CalibrationGrid& grid) {
  if (grid.d.empty() || grid.d.size() != grid.c.size())
    throw invalid_input("calibration grid: empty or ragged");
  for (std::size_t i = 0; i < grid.d.size(); ++i) {
    if (!(grid.c[i] > 0.0)) throw invalid_input("calibration grid: C must be positive");
    if (i > 0 && !(grid.d[i] > grid.d[i - 1]))
      throw invalid_input("calibration grid: d must be strictly increasing");
  }
}

/// The shipped default constants on d = 0.11, 0.13, ..., 0.49.
inline CalibrationGrid default_calibration_grid() {
  CalibrationGrid g;
  g.c = {17, 13, 13, 17, 13, 11, 11, 9, 13, 9, 5, 9, 7, 5, 5, 5, 5, 5, 7, 5};
  g.d.resize(g.c.size());
  for (std::size_t i = 0; i < g.d.size(); ++i) g.d[i] = 0.11 + 0.02 * static_cast<double>(i);
  return g;
}

/// Piecewise-linear interpolation of C(d), constant outside the grid range.
inline double interp_c(const CalibrationGrid& grid, double d_hat) {
  validate(grid);
  const auto& d = grid.d;
  const auto& c = grid.c;
  if (d_hat <= d.front()) return c.front();
  if (d_hat >= d.back()) return c.back();
  std::size_t j = 0;
  while (d_hat > d[j + 1]) ++j;
  const double w = (d_hat - d[j]) / (d[j + 1] - d[j]);
  return c[j] + w * (c[j + 1] - c[j]);
}

/// Log-periodogram regression estimate of the memory parameter over the
/// first m Fourier frequencies.  The classical regressor is
/// -2 log(2 sin(l/2)); the simple -2 log(l) variant is a toggle.
inline GphEstimate gph_estimate(const Eigen::VectorXd& series, int m,
                                bool classical_regressor = true) {
  const int n = static_cast<int>(series.size());
  if (m < 2 || m > n / 2) throw invalid_input("gph_estimate: need 2 <= m <= n/2");
  const Eigen::VectorXd io = periodogram(series);
  Eigen::VectorXd reg(m), ly(m);
  for (int k = 1; k <= m; ++k) {
    const double ik = io[k - 1];
    if (!(ik > 0.0) || !std::isfinite(ik))
      throw degenerate_periodogram("gph_estimate: zero periodogram ordinate at k=" +
                                   std::to_string(k));
    const double lam = 2.0 * M_PI * k / n;
    reg[k - 1] = classical_regressor ? -2.0 * std::log(2.0 * std::sin(0.5 * lam))
                                     : -2.0 * std::log(lam);
    ly[k - 1] = std::log(ik);
  }
  const double xbar = reg.mean(), ybar = ly.mean();
  const double sxx = (reg.array() - xbar).square().sum();
  const double sxy = ((reg.array() - xbar) * (ly.array() - ybar)).sum();
  GphEstimate est;
  est.d_hat = sxy / sxx;
  est.m = m;
  est.n = n;
  est.sigma_d = M_PI / std::sqrt(24.0 * m);
  return est;
}

/// Plug-in bandwidth minimizing the leading mean-squared-error trade-off:
/// [ c2 f0 / ((f''(0) d2)^2 (lg^2 - ls^2)^2) * mean ||J(Ubar) U_i||^2 /
///   ||g(Ubar)||^2 ]^{1/5} * n^{-1/5}.
inline double optimal_bandwidth(const Eigen::MatrixXd& umat, const SmoothingConfig& cfg) {
  const int n = static_cast<int>(umat.rows());
  if (n < 2) throw invalid_input("optimal_bandwidth: need at least two observations");
  const int q = static_cast<int>(umat.cols());
  const int m = static_cast<int>((std::sqrt(9.0 + 8.0 * q) - 3.0) / 2.0 + 0.5);
  if (vech_size(m) + m != q) throw invalid_input("optimal_bandwidth: bad layout");
  const MomentVector ubar = make_moment_vector(umat.colwise().mean().transpose(), m);
  const Eigen::VectorXd g = coef_from_moments(ubar);  // throws outside_domain
  const double gnorm2 = g.squaredNorm();
  if (!(gnorm2 > 0.0)) throw numeric_error("optimal_bandwidth: zero coefficient vector");
  const Eigen::MatrixXd jac = coef_jacobian(ubar);
  const double num = (umat * jac.transpose()).squaredNorm() / n;
  const double ls2 = cfg.lambda_sigma * cfg.lambda_sigma;
  const double lg2 = cfg.lambda_gamma * cfg.lambda_gamma;
  const double curv = cfg.aux.f2_0 * cfg.kernel.d2;
  if (curv == 0.0 || lg2 == ls2)
    throw invalid_input("optimal_bandwidth: degenerate bias constants");
  const double block = cfg.kernel.c2 * cfg.aux.f0 / (curv * curv * (lg2 - ls2) * (lg2 - ls2));
  return std::pow(block * num / gnorm2, 0.2) * std::pow(static_cast<double>(n), -0.2);
}

struct BandwidthOptions {
  double delta = 0.5;               // GPH uses m = floor(n^delta)
  double alpha = 0.05;              // level of the memory test
  bool classical_regressor = true;  // periodogram regressor form
  CalibrationGrid grid = default_calibration_grid();
};

/// Test-and-branch selector: GPH on the OLS residuals, one-sided test of
/// d <= 0.1; long-memory branch takes h = C(d_hat) log(n)/n, otherwise the
/// plug-in bandwidth.
inline BandwidthDecision select_bandwidth(const RegressionDataset& data,
                                          const SmoothingConfig& cfg,
                                          const BandwidthOptions& opts = {}) {
  validate(data);
  const int n = data.n();
  if (n < 50) throw invalid_input("select_bandwidth: need n >= 50");
  if (!(opts.delta > 0.0 && opts.delta < 0.8))
    throw invalid_input("select_bandwidth: delta outside (0, 0.8)");
  if (!(opts.alpha > 0.0 && opts.alpha < 1.0))
    throw invalid_input("select_bandwidth: alpha outside (0, 1)");

  const OlsFit fit = ols_fit(data);
  int m = static_cast<int>(std::pow(static_cast<double>(n), opts.delta));
  m = std::max(2, std::min(m, n / 2));

  BandwidthDecision dec;
  dec.alpha = opts.alpha;
  dec.gph = gph_estimate(fit.residuals, m, opts.classical_regressor);
  dec.t_stat = (dec.gph.d_hat - 0.1) / dec.gph.sigma_d;
  if (dec.t_stat > normal_quantile(1.0 - opts.alpha)) {
    dec.branch = MemoryBranch::long_memory;
    dec.c_of_d = interp_c(opts.grid, dec.gph.d_hat);
    dec.h = dec.c_of_d * std::log(static_cast<double>(n)) / n;
  } else {
    dec.branch = MemoryBranch::short_memory;
    dec.h = optimal_bandwidth(obs_moments_matrix(data), cfg);
  }
  return dec;
}

/// Two-column CSV (d, C) with a header; the interchange format between the
/// calibrate and infer subcommands.
inline void save_grid_csv(const CalibrationGrid& grid, const std::string& path) {
  validate(grid);
  std::ofstream out(path);
  if (!out) throw data_error("cannot open for writing: " + path);
  out << "d,C\n";
  char buf[64];
  for (std::size_t i = 0; i < grid.d.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", grid.d[i], grid.c[i]);
    out << buf;
  }
}

inline CalibrationGrid load_grid_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw data_error("empty grid file: " + path);
  CalibrationGrid grid;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b))
      throw data_error(path + ": malformed line " + std::to_string(lineno));
    try {
      grid.d.push_back(std::stod(a));
      grid.c.push_back(std::stod(b));
    } catch (const std::exception&) {
      throw data_error(path + ": non-numeric entry at line " + std::to_string(lineno));
    }
  }
  validate(grid);
  return grid;
}

}  // namespace rsreg
