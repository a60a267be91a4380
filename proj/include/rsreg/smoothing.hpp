#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <utility>

#include "rsreg/errors.hpp"
#include "rsreg/moments.hpp"
#include "rsreg/prob.hpp"
#include "rsreg/quadrature.hpp"

namespace rsreg {

enum class KernelId { gaussian, epanechnikov, custom };
enum class AuxId { gaussian, logistic, custom };

/// Square-integrable kernel with its moment constants supplied up front.
struct Kernel {
  KernelId id = KernelId::custom;
  std::function<double(double)> pdf;
  double support = std::numeric_limits<double>::infinity();  // half-width
  double c2 = 0.0;  // integral of K^2
  double d2 = 0.0;  // integral of u^2 K(u)
};

/// Auxiliary sampling density; must be twice differentiable at the origin.
struct AuxDensity {
  AuxId id = AuxId::custom;
  std::function<double(double)> pdf;
  std::function<double(std::mt19937_64&)> draw;
  double support = std::numeric_limits<double>::infinity();
  double f0 = 0.0;    // f(0)
  double f2_0 = 0.0;  // f''(0)
};

inline Kernel gaussian_kernel() {
  Kernel k;
  k.id = KernelId::gaussian;
  k.pdf = [](double u) { return normal_pdf(u); };
  k.c2 = 1.0 / (2.0 * std::sqrt(M_PI));
  k.d2 = 1.0;
  return k;
}

inline Kernel epanechnikov_kernel() {
  Kernel k;
  k.id = KernelId::epanechnikov;
  k.pdf = [](double u) { return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0; };
  k.support = 1.0;
  k.c2 = 0.6;
  k.d2 = 0.2;
  return k;
}

inline AuxDensity gaussian_aux() {
  AuxDensity f;
  f.id = AuxId::gaussian;
  f.pdf = [](double v) { return normal_pdf(v); };
  f.draw = [](std::mt19937_64& gen) { return normal_draw(gen); };
  f.f0 = 1.0 / std::sqrt(2.0 * M_PI);
  f.f2_0 = -1.0 / std::sqrt(2.0 * M_PI);
  return f;
}

inline AuxDensity logistic_aux() {
  AuxDensity f;
  f.id = AuxId::logistic;
  f.pdf = [](double v) {
    const double e = std::exp(-std::abs(v));
    const double d = 1.0 + e;
    return e / (d * d);
  };
  f.draw = [](std::mt19937_64& gen) {
    const double u = uniform01(gen);
    return std::log(u / (1.0 - u));
  };
  f.f0 = 0.25;
  f.f2_0 = -0.125;
  return f;
}

struct SmoothingConfig {
  Kernel kernel = gaussian_kernel();
  AuxDensity aux = gaussian_aux();
  double h = 0.1;            // default bandwidth when none is selected
  double lambda_sigma = 1.0;  // dilation of the vech block
  double lambda_gamma = 2.0;  // dilation of the cross block
};

inline void validate(const SmoothingConfig& cfg) {
  if (!(cfg.h > 0.0)) throw invalid_input("smoothing: h must be positive");
  if (!(cfg.kernel.c2 > 0.0)) throw invalid_input("smoothing: c2 must be positive");
  if (!(cfg.aux.f0 > 0.0)) throw invalid_input("smoothing: f(0) must be positive");
  if (!(cfg.lambda_sigma > 0.0) || !(cfg.lambda_gamma > 0.0))
    throw invalid_input("smoothing: dilations must be positive");
  if (cfg.lambda_sigma == cfg.lambda_gamma)
    throw invalid_input("smoothing: dilations must differ");
}

/// E K(V/h) under the auxiliary density; closed form for the all-Gaussian
/// pair, adaptive quadrature (1e-12) otherwise.
inline double kernel_mean(const SmoothingConfig& cfg, double h) {
  if (!(h > 0.0)) throw invalid_input("kernel_mean: h must be positive");
  if (cfg.kernel.id == KernelId::gaussian && cfg.aux.id == AuxId::gaussian)
    return h / std::sqrt(2.0 * M_PI * (1.0 + h * h));
  auto prod = [&](double v) { return cfg.kernel.pdf(v / h) * cfg.aux.pdf(v); };
  const double s = std::min(cfg.kernel.support * h, cfg.aux.support);
  if (std::isfinite(s))
    return integrate(prod, -s, 0.0, 5e-13) + integrate(prod, 0.0, s, 5e-13);
  return integrate_line(prod, 1e-12);
}

/// Attenuation factors (a_sigma, a_gamma) of the dilated smoothing means
/// relative to f(0); equals 1/sqrt(1 + lambda^2 h^2) in the Gaussian pair.
inline std::pair<double, double> scale_factors(const SmoothingConfig& cfg, double h) {
  auto a = [&](double lam) {
    return kernel_mean(cfg, lam * h) / (lam * h * cfg.aux.f0);
  };
  return {a(cfg.lambda_sigma), a(cfg.lambda_gamma)};
}

/// Truncation floor (n h)^{-1/2} log log n; needs n >= 3 for the double log.
inline double truncation_level(int n, double h) {
  if (n < 3) throw invalid_input("truncation_level: n must be at least 3");
  if (!(h > 0.0)) throw invalid_input("truncation_level: h must be positive");
  return std::log(std::log(static_cast<double>(n))) / std::sqrt(n * h);
}

/// Curvature constant of the smoothing bias: f''(0) d2 / (2 f(0)).
inline double bias_kappa(const SmoothingConfig& cfg) {
  return cfg.aux.f2_0 * cfg.kernel.d2 / (2.0 * cfg.aux.f0);
}

/// Squared dilation per coordinate: lambda_sigma^2 on the vech block,
/// lambda_gamma^2 on the cross block.
inline Eigen::VectorXd lambda_weights(const SmoothingConfig& cfg, int m) {
  Eigen::VectorXd w(vech_size(m) + m);
  w.head(vech_size(m)).setConstant(cfg.lambda_sigma * cfg.lambda_sigma);
  w.tail(m).setConstant(cfg.lambda_gamma * cfg.lambda_gamma);
  return w;
}

struct SmoothedMoments {
  MomentVector mu_hat;    // kernel-weighted moment average
  MomentVector mu_tilde;  // block-rescaled version fed to the coefficient map
  double kmean = 0.0;     // E K(V/h)
  double a_sigma = 1.0;
  double a_gamma = 1.0;
};

inline Eigen::VectorXd draw_aux(const AuxDensity& aux, int n, std::mt19937_64& gen) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = aux.draw(gen);
  return v;
}

/// Kernel-weighted moment average over the auxiliary sample v, plus the
/// rescaled vector that undoes the smoothing attenuation blockwise.
inline SmoothedMoments smooth_moments(const Eigen::MatrixXd& umat,
                                      const Eigen::VectorXd& v,
                                      const SmoothingConfig& cfg, double h) {
  if (umat.rows() != v.size())
    throw invalid_input("smooth_moments: sample sizes disagree");
  if (!(h > 0.0)) throw invalid_input("smooth_moments: h must be positive");
  const int n = static_cast<int>(umat.rows());
  const int m = [&] {
    const int q = static_cast<int>(umat.cols());
    const int mm = static_cast<int>((std::sqrt(9.0 + 8.0 * q) - 3.0) / 2.0 + 0.5);
    if (vech_size(mm) + mm != q) throw invalid_input("smooth_moments: bad layout");
    return mm;
  }();

  SmoothedMoments out;
  out.kmean = kernel_mean(cfg, h);
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w[i] = cfg.kernel.pdf(v[i] / h);
  Eigen::VectorXd mu = umat.transpose() * w / (n * out.kmean);
  out.mu_hat = make_moment_vector(mu, m);
  std::tie(out.a_sigma, out.a_gamma) = scale_factors(cfg, h);
  mu.head(vech_size(m)) *= out.a_sigma;
  mu.tail(m) *= out.a_gamma;
  out.mu_tilde = make_moment_vector(std::move(mu), m);
  return out;
}

}  // namespace rsreg
