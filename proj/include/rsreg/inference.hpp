#pragma once

// Coefficient inference from smoothed moments: point estimate, bias
// correction, plug-in covariance, and the Wald-type regions and tests
// built from them.

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <utility>

#include "rsreg/bandwidth.hpp"
#include "rsreg/errors.hpp"
#include "rsreg/moments.hpp"
#include "rsreg/prob.hpp"
#include "rsreg/smoothing.hpp"

namespace rsreg {

/// Complete output of one inference run.  The reported estimator is
/// beta - bias_corr; all Wald statistics scale with nh.
struct CoefficientInference {
  Eigen::VectorXd beta;        // g_c(mu_tilde)
  Eigen::VectorXd bias_corr;   // kappa h^2 grad g_c(mu_tilde) Lambda mu_tilde
  Eigen::MatrixXd sigma_beta;  // grad g_c Sigma_mu grad g_c^T
  double nh = 0.0;
  int n = 0;
  BandwidthDecision decision;
  bool truncation_active = false;
};

/// {b : (center-b)^T shape^{-1} (center-b) <= radius}.
struct EllipsoidRegion {
  Eigen::VectorXd center;
  Eigen::MatrixXd shape;
  double radius = 0.0;
  double alpha = 0.05;
  double log_volume = 0.0;

  bool contains(const Eigen::VectorXd& b) const {
    if (b.size() != center.size()) throw invalid_input("contains: dimension mismatch");
    const Eigen::VectorXd dev = center - b;
    return dev.dot(shape.ldlt().solve(dev)) <= radius;
  }
};

struct WaldTest {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Inference with an explicit auxiliary sample v (one draw per observation).
inline CoefficientInference infer(const RegressionDataset& data,
                                  const SmoothingConfig& cfg,
                                  const BandwidthDecision& decision,
                                  const Eigen::VectorXd& v) {
  validate(data);
  validate(cfg);
  const int n = data.n();
  if (!(decision.h > 0.0)) throw invalid_input("infer: bandwidth must be positive");
  if (v.size() != n) throw invalid_input("infer: auxiliary sample size mismatch");

  const Eigen::MatrixXd umat = obs_moments_matrix(data);
  const SmoothedMoments sm = smooth_moments(umat, v, cfg, decision.h);
  const double c = truncation_level(n, decision.h);

  CoefficientInference out;
  out.n = n;
  out.nh = n * decision.h;
  out.decision = decision;
  out.truncation_active = design_det(sm.mu_tilde) < c;
  out.beta = coef_from_moments_trunc(sm.mu_tilde, c);

  const Eigen::MatrixXd jac = coef_jacobian_trunc(sm.mu_tilde, c);
  const Eigen::VectorXd lam = lambda_weights(cfg, sm.mu_tilde.m);
  out.bias_corr = bias_kappa(cfg) * decision.h * decision.h *
                  (jac * lam.cwiseProduct(sm.mu_tilde.coords));

  const Eigen::MatrixXd smu = plugin_moment_cov(umat, cfg.kernel.c2, cfg.aux.f0);
  Eigen::MatrixXd sb = jac * smu * jac.transpose();
  out.sigma_beta = 0.5 * (sb + sb.transpose());
  return out;
}

/// Inference drawing the auxiliary sample from the given stream.
inline CoefficientInference infer(const RegressionDataset& data,
                                  const SmoothingConfig& cfg,
                                  const BandwidthDecision& decision,
                                  std::mt19937_64& gen) {
  return infer(data, cfg, decision, draw_aux(cfg.aux, data.n(), gen));
}

/// Joint (1-alpha) confidence ellipsoid for the full coefficient vector.
inline EllipsoidRegion joint_region(const CoefficientInference& inf, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw invalid_input("joint_region: alpha outside (0, 1)");
  const int k = static_cast<int>(inf.beta.size());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inf.sigma_beta);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (!(lmin > 0.0) || !(lmax < 1e12 * lmin))
    throw singular_covariance("joint_region: coefficient covariance is near singular");

  EllipsoidRegion region;
  region.center = inf.beta - inf.bias_corr;
  region.shape = inf.sigma_beta;
  region.radius = chi2_quantile(k, 1.0 - alpha) / inf.nh;
  region.alpha = alpha;
  region.log_volume = log_unit_ball_volume(k) + 0.5 * k * std::log(region.radius) +
                      0.5 * es.eigenvalues().array().log().sum();
  return region;
}

/// Marginal (1-alpha) interval for coefficient j.
inline std::pair<double, double> marginal_ci(const CoefficientInference& inf, int j,
                                             double alpha) {
  if (j < 0 || j >= inf.beta.size()) throw invalid_input("marginal_ci: index out of range");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw invalid_input("marginal_ci: alpha outside (0, 1]");
  const double center = inf.beta[j] - inf.bias_corr[j];
  const double hw =
      normal_quantile(1.0 - alpha / 2.0) * std::sqrt(inf.sigma_beta(j, j) / inf.nh);
  return {center - hw, center + hw};
}

/// Wald test of H0: R beta = r against the chi-square(q) limit.
inline WaldTest wald_test(const CoefficientInference& inf, const Eigen::MatrixXd& R,
                          const Eigen::VectorXd& r) {
  const int q = static_cast<int>(R.rows());
  if (q < 1 || R.cols() != inf.beta.size() || r.size() != q)
    throw invalid_input("wald_test: restriction shape mismatch");
  if (Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(R).rank() < q)
    throw invalid_input("wald_test: R is rank deficient");

  const Eigen::MatrixXd mid = R * inf.sigma_beta * R.transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mid);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (!(lmin > 0.0) || !(lmax < 1e12 * lmin))
    throw singular_covariance("wald_test: restricted covariance is near singular");

  const Eigen::VectorXd dev = R * (inf.beta - inf.bias_corr) - r;
  WaldTest test;
  test.statistic = inf.nh * dev.dot(mid.ldlt().solve(dev));
  test.dof = q;
  test.p_value = 1.0 - chi2_cdf(q, test.statistic);
  return test;
}

}  // namespace rsreg
