#pragma once

// OLS-based baselines: Newey-West HAC and the frequency-domain MAC
// long-run covariance, both returned as Var(beta_hat) ready for Wald use,
// plus the shared region/interval constructor.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "rsreg/bandwidth.hpp"
#include "rsreg/errors.hpp"
#include "rsreg/inference.hpp"
#include "rsreg/ols.hpp"
#include "rsreg/spectral.hpp"

namespace rsreg {

struct HacConfig {
  std::optional<int> lag;           // Bartlett truncation lag; auto rule if absent
  bool prewhiten = true;            // VAR(1) prewhitening of the scores
  bool small_sample_adjust = true;  // n/(n-m) factor
};

struct HacResult {
  Eigen::MatrixXd cov;  // Var(beta_hat)
  int lag = 0;
  bool prewhitened = false;
  bool fallback = false;  // prewhitening requested but VAR(1) was unstable
};

struct MacConfig {
  std::optional<int> m;      // per-coordinate GPH frequencies; min(n^0.8, n/50) if absent
  std::optional<int> big_m;  // periodogram averaging count; n^(2/3) if absent
  double d_cap = 0.49;       // memory estimates clamped to [-d_cap, d_cap]
};

struct MacResult {
  Eigen::MatrixXd cov;  // Var(beta_hat)
  Eigen::VectorXd d_hats;
  int m = 0;
  int big_m = 0;
};

namespace detail {

inline Eigen::MatrixXd score_matrix(const RegressionDataset& data, const OlsFit& fit) {
  const Eigen::MatrixXd xt = augment_intercept(data.x);
  return xt.array().colwise() * fit.residuals.array();
}

/// Bartlett-weighted autocovariance sum (1/rows) sum_|j|<=L w_j G_j.
inline Eigen::MatrixXd bartlett_sum(const Eigen::MatrixXd& s, int lag) {
  const int n = static_cast<int>(s.rows());
  Eigen::MatrixXd acc = s.transpose() * s;
  for (int j = 1; j <= std::min(lag, n - 1); ++j) {
    const double w = 1.0 - static_cast<double>(j) / (lag + 1);
    const Eigen::MatrixXd gj = s.bottomRows(n - j).transpose() * s.topRows(n - j);
    acc += w * (gj + gj.transpose());
  }
  return acc / n;
}

}  // namespace detail

/// Variance of the summed scores of a lambda^{-s} spectral plateau, per unit
/// of G n^{1+s}: 4 Gamma(1-s) sin(pi s/2) / (s (1+s)), with the 2 pi limit at 0.
inline double mac_rate_constant(double s) {
  if (!(s > -1.0 && s < 1.0)) throw invalid_input("mac_rate_constant: s outside (-1, 1)");
  if (std::abs(s) < 1e-12) return 2.0 * M_PI;
  return 4.0 * std::tgamma(1.0 - s) * std::sin(0.5 * M_PI * s) / (s * (1.0 + s));
}

inline HacResult nw_hac_cov(const RegressionDataset& data, const HacConfig& cfg = {}) {
  const OlsFit fit = ols_fit(data);
  const int n = data.n(), m = data.p() + 1;

  HacResult out;
  if (cfg.lag) {
    if (*cfg.lag < 1 || *cfg.lag > n - 1)
      throw invalid_input("nw_hac_cov: lag outside [1, n-1]");
    out.lag = *cfg.lag;
  } else {
    const int auto_lag = static_cast<int>(4.0 * std::pow(n / 100.0, 2.0 / 9.0));
    out.lag = std::max(1, std::min(auto_lag, n - 1));
  }

  Eigen::MatrixXd scores = detail::score_matrix(data, fit);
  Eigen::MatrixXd recolor = Eigen::MatrixXd::Identity(m, m);
  if (cfg.prewhiten && n > m + 1) {
    const Eigen::MatrixXd lagged = scores.topRows(n - 1);
    const Eigen::MatrixXd lead = scores.bottomRows(n - 1);
    const Eigen::MatrixXd at = lagged.colPivHouseholderQr().solve(lead);
    const Eigen::MatrixXd a = at.transpose();
    const double rho = a.eigenvalues().cwiseAbs().maxCoeff();
    if (rho < 0.97) {
      out.prewhitened = true;
      scores = lead - lagged * at;
      recolor = (Eigen::MatrixXd::Identity(m, m) - a).partialPivLu().inverse();
    } else {
      out.fallback = true;
    }
  }

  Eigen::MatrixXd meat = detail::bartlett_sum(scores, out.lag);
  meat = recolor * meat * recolor.transpose();
  Eigen::MatrixXd cov = static_cast<double>(n) * fit.xtx_inv * meat * fit.xtx_inv;
  if (cfg.small_sample_adjust) cov *= static_cast<double>(n) / (n - m);
  out.cov = 0.5 * (cov + cov.transpose());
  return out;
}

inline MacResult mac_cov(const RegressionDataset& data, const MacConfig& cfg = {}) {
  const int n = data.n(), m = data.p() + 1;
  if (n < 100) throw invalid_input("mac_cov: need n >= 100");
  if (!(cfg.d_cap > 0.0 && cfg.d_cap < 0.5))
    throw invalid_input("mac_cov: d_cap outside (0, 0.5)");
  const OlsFit fit = ols_fit(data);
  const Eigen::MatrixXd scores = detail::score_matrix(data, fit);

  MacResult out;
  out.m = cfg.m ? *cfg.m
                : std::min(static_cast<int>(std::pow(n, 0.8) + 1e-9), n / 50);
  out.big_m = cfg.big_m ? *cfg.big_m
                        : static_cast<int>(std::pow(n, 2.0 / 3.0) + 1e-9);
  if (out.m < 2 || out.m > n / 2) throw invalid_input("mac_cov: m outside [2, n/2]");
  if (out.big_m < 1 || out.big_m > n / 2)
    throw invalid_input("mac_cov: big_m outside [1, n/2]");

  out.d_hats.resize(m);
  for (int a = 0; a < m; ++a) {
    const double d = gph_estimate(scores.col(a), out.m, true).d_hat;
    out.d_hats[a] = std::max(-cfg.d_cap, std::min(d, cfg.d_cap));
  }

  const Eigen::MatrixXcd w = dft_ordinates(scores);
  Eigen::MatrixXd gshat = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < out.big_m; ++k) {
    const double lam = 2.0 * M_PI * (k + 1) / n;
    Eigen::VectorXcd z(m);
    for (int a = 0; a < m; ++a) z[a] = w(k, a) * std::pow(lam, out.d_hats[a]);
    gshat += (z * z.adjoint()).real();
  }
  gshat /= out.big_m;

  // Var(sum of scores)_ab = p(d_a + d_b) G_ab n^{1 + d_a + d_b}
  Eigen::MatrixXd var_sum(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const double s = out.d_hats[a] + out.d_hats[b];
      var_sum(a, b) =
          mac_rate_constant(s) * gshat(a, b) * std::pow(static_cast<double>(n), 1.0 + s);
    }
  Eigen::MatrixXd cov = fit.xtx_inv * var_sum * fit.xtx_inv;
  out.cov = 0.5 * (cov + cov.transpose());
  return out;
}

/// Wald region and marginal intervals around an OLS point estimate whose
/// covariance is already fully scaled.  The chi-square radius is kept bare;
/// the sample scale lives inside cov, unlike the smoothed-inference region.
inline std::pair<EllipsoidRegion, std::vector<std::pair<double, double>>>
comparator_regions(const Eigen::VectorXd& beta_hat, const Eigen::MatrixXd& cov, int n,
                   double alpha) {
  if (n < 1) throw invalid_input("comparator_regions: n must be positive");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw invalid_input("comparator_regions: alpha outside (0, 1)");
  const int k = static_cast<int>(beta_hat.size());
  if (cov.rows() != k || cov.cols() != k)
    throw invalid_input("comparator_regions: covariance shape mismatch");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (!(lmin > 0.0) || !(lmax < 1e12 * lmin))
    throw singular_covariance("comparator_regions: covariance is near singular");

  EllipsoidRegion region;
  region.center = beta_hat;
  region.shape = cov;
  region.radius = chi2_quantile(k, 1.0 - alpha);
  region.alpha = alpha;
  region.log_volume = log_unit_ball_volume(k) + 0.5 * k * std::log(region.radius) +
                      0.5 * es.eigenvalues().array().log().sum();

  const double z = normal_quantile(1.0 - alpha / 2.0);
  std::vector<std::pair<double, double>> intervals;
  intervals.reserve(k);
  for (int j = 0; j < k; ++j) {
    const double hw = z * std::sqrt(cov(j, j));
    intervals.emplace_back(beta_hat[j] - hw, beta_hat[j] + hw);
  }
  return {region, intervals};
}

}  // namespace rsreg
