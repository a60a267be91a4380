#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <string>
#include <unsupported/Eigen/FFT>
#include <utility>
#include <variant>
#include <vector>

#include "rsreg/errors.hpp"
#include "rsreg/moments.hpp"
#include "rsreg/prob.hpp"
#include "rsreg/rng.hpp"
#include "rsreg/spectral.hpp"

namespace rsreg {

enum class Margin { gaussian, standardized_t5 };

struct ArmaSpec {
  double phi = 0.0;
  double theta = 0.0;
};

struct ArfimaSpec {
  double d = 0.35;
};

struct FgmSpec {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

struct FgnSpec {
  double hurst = 0.8;
};

struct ErrorProcessSpec {
  std::variant<ArmaSpec, ArfimaSpec, FgmSpec, FgnSpec> model = ArmaSpec{};
  Margin margin = Margin::gaussian;
};

inline ErrorProcessSpec arma_spec(double phi, double theta, Margin m = Margin::gaussian) {
  return ErrorProcessSpec{ArmaSpec{phi, theta}, m};
}
inline ErrorProcessSpec arfima_spec(double d, Margin m = Margin::gaussian) {
  return ErrorProcessSpec{ArfimaSpec{d}, m};
}
inline ErrorProcessSpec fgm_spec(double lambda1, double lambda2, Margin m = Margin::gaussian) {
  return ErrorProcessSpec{FgmSpec{lambda1, lambda2}, m};
}
inline ErrorProcessSpec fgn_spec(double hurst, Margin m = Margin::gaussian) {
  return ErrorProcessSpec{FgnSpec{hurst}, m};
}

inline std::string model_name(const ErrorProcessSpec& spec) {
  struct Visitor {
    std::string operator()(const ArmaSpec&) const { return "arma"; }
    std::string operator()(const ArfimaSpec&) const { return "arfima"; }
    std::string operator()(const FgmSpec&) const { return "fgm"; }
    std::string operator()(const FgnSpec&) const { return "fgn"; }
  };
  return std::visit(Visitor{}, spec.model);
}

inline std::string margin_name(const ErrorProcessSpec& spec) {
  return spec.margin == Margin::gaussian ? "gaussian" : "t5";
}

inline std::pair<double, double> model_params(const ErrorProcessSpec& spec) {
  struct Visitor {
    std::pair<double, double> operator()(const ArmaSpec& s) const { return {s.phi, s.theta}; }
    std::pair<double, double> operator()(const ArfimaSpec& s) const { return {s.d, 0.0}; }
    std::pair<double, double> operator()(const FgmSpec& s) const {
      return {s.lambda1, s.lambda2};
    }
    std::pair<double, double> operator()(const FgnSpec& s) const { return {s.hurst, 0.0}; }
  };
  return std::visit(Visitor{}, spec.model);
}

/// Extended (iterated) FGM transition copula
///   C(u,v) = uv [1 + l1 (1-u)(1-v) + l2 uv (1-u)(1-v)].
/// l2 = 0 is the classical FGM family with a closed-form conditional
/// quantile; the l2-active branch inverts the conditional CDF by bisection.
struct FgmCopula {
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  double cdf(double u, double v) const {
    return u * v *
           (1.0 + lambda1 * (1.0 - u) * (1.0 - v) + lambda2 * u * v * (1.0 - u) * (1.0 - v));
  }

  /// C_{2|1}(v|u) = dC/du.
  double cond_cdf(double v, double u) const {
    return v + lambda1 * v * (1.0 - v) * (1.0 - 2.0 * u) +
           lambda2 * v * v * (1.0 - v) * (2.0 * u - 3.0 * u * u);
  }

  /// c(u,v) = d^2 C / du dv.
  double density(double u, double v) const {
    return 1.0 + lambda1 * (1.0 - 2.0 * u) * (1.0 - 2.0 * v) +
           lambda2 * u * v * (2.0 - 3.0 * u) * (2.0 - 3.0 * v);
  }

  /// Solves C_{2|1}(v|u) = w for v in [0,1].
  double cond_quantile(double w, double u) const {
    if (lambda2 == 0.0) {
      const double a = lambda1 * (1.0 - 2.0 * u);
      const double disc = (1.0 + a) * (1.0 + a) - 4.0 * a * w;
      return 2.0 * w / (1.0 + a + std::sqrt(disc));
    }
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-12) {
      const double mid = 0.5 * (lo + hi);
      (cond_cdf(mid, u) < w ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  /// Density nonnegativity on the unit square: exact minimization over v for
  /// each u on a fine grid (the density is quadratic in v).
  bool admissible() const {
    constexpr int grid = 400;
    for (int i = 0; i <= grid; ++i) {
      const double u = static_cast<double>(i) / grid;
      const double a = lambda1 * (1.0 - 2.0 * u);
      const double b = lambda2 * u * (2.0 - 3.0 * u);
      // density as a function of v: -3b v^2 + 2(b - a) v + (1 + a)
      double lowest = std::min(1.0 + a, 1.0 - a - b);
      if (b < 0.0) {
        const double vstar = (b - a) / (3.0 * b);
        if (vstar > 0.0 && vstar < 1.0)
          lowest = std::min(lowest, -3.0 * b * vstar * vstar + 2.0 * (b - a) * vstar + 1.0 + a);
      }
      if (lowest < -1e-9) return false;
    }
    return true;
  }
};

inline void validate(const ErrorProcessSpec& spec) {
  struct Visitor {
    void operator()(const ArmaSpec& s) const {
      if (!(std::abs(s.phi) < 1.0)) throw invalid_input("error spec: |phi| must be < 1");
      if (!std::isfinite(s.theta)) throw invalid_input("error spec: theta must be finite");
    }
    void operator()(const ArfimaSpec& s) const {
      if (!(s.d > 0.0 && s.d < 0.5)) throw invalid_input("error spec: d outside (0, 0.5)");
    }
    void operator()(const FgmSpec& s) const {
      if (!std::isfinite(s.lambda1) || !std::isfinite(s.lambda2))
        throw invalid_input("error spec: non-finite copula parameter");
      if (!FgmCopula{s.lambda1, s.lambda2}.admissible())
        throw invalid_input("error spec: (lambda1, lambda2) outside the admissible region");
    }
    void operator()(const FgnSpec& s) const {
      if (!(s.hurst > 0.5 && s.hurst < 1.0))
        throw invalid_input("error spec: hurst outside (0.5, 1)");
    }
  };
  std::visit(Visitor{}, spec.model);
}

namespace detail {

inline double margin_quantile(double u, Margin margin) {
  if (margin == Margin::gaussian) return normal_quantile(u);
  return std::sqrt(0.6) * t_quantile(5.0, u);
}

/// Unit-variance innovation draw for the linear-process generators.
inline double innovation(Margin margin, std::mt19937_64& gen) {
  return margin_quantile(uniform01(gen), margin);
}

}  // namespace detail

/// One exact stationary Gaussian draw of length n from the autocovariance
/// gamma[0..n] via circulant embedding of size 2n.  Draws 2n standard
/// normals in the fixed order V_0, (A_k, B_k) for k = 1..n-1, V_n.
inline Eigen::VectorXd davies_harte_draw(const Eigen::VectorXd& gamma, std::mt19937_64& gen) {
  const int n = static_cast<int>(gamma.size()) - 1;
  if (n < 1) throw invalid_input("davies_harte_draw: need gamma up to lag >= 1");
  const int m = 2 * n;
  std::vector<double> circ(m);
  for (int k = 0; k <= n; ++k) circ[k] = gamma[k];
  for (int k = n + 1; k < m; ++k) circ[k] = gamma[m - k];

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, circ);
  Eigen::VectorXd lambda(m);
  for (int k = 0; k < m; ++k) lambda[k] = spec[k].real();
  if (lambda.minCoeff() < -1e-8)
    throw embedding_failure("davies_harte_draw: circulant eigenvalue " +
                            std::to_string(lambda.minCoeff()));
  lambda = lambda.cwiseMax(0.0);

  std::vector<std::complex<double>> coef(m);
  coef[0] = std::sqrt(lambda[0]) * normal_draw(gen);
  for (int k = 1; k < n; ++k) {
    const double a = normal_draw(gen), b = normal_draw(gen);
    coef[k] = std::sqrt(0.5 * lambda[k]) * std::complex<double>(a, b);
    coef[m - k] = std::conj(coef[k]);
  }
  coef[n] = std::sqrt(lambda[n]) * normal_draw(gen);

  std::vector<std::complex<double>> series;
  fft.fwd(series, coef);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  Eigen::VectorXd out(n);
  for (int t = 0; t < n; ++t) out[t] = series[t].real() * scale;
  return out;
}

/// ARFIMA(0,d,0) autocovariances gamma(0..nlags) for unit-variance innovations:
/// gamma(0) = Gamma(1-2d) / Gamma(1-d)^2, gamma(k) = gamma(k-1) (k-1+d)/(k-d).
inline Eigen::VectorXd arfima_gamma(double d, int nlags) {
  if (!(d > 0.0 && d < 0.5)) throw invalid_input("arfima_gamma: d outside (0, 0.5)");
  if (nlags < 0) throw invalid_input("arfima_gamma: negative lag count");
  Eigen::VectorXd g(nlags + 1);
  const double lg = std::lgamma(1.0 - 2.0 * d) - 2.0 * std::lgamma(1.0 - d);
  g[0] = std::exp(lg);
  for (int k = 1; k <= nlags; ++k) g[k] = g[k - 1] * (k - 1 + d) / (k - d);
  return g;
}

/// Fractional-differencing MA(infinity) weights psi_0..psi_{count-1}:
/// psi_0 = 1, psi_k = psi_{k-1} (k-1+d)/k.
inline Eigen::VectorXd arfima_psi(double d, int count) {
  if (count < 1) throw invalid_input("arfima_psi: need at least one weight");
  Eigen::VectorXd psi(count);
  psi[0] = 1.0;
  for (int k = 1; k < count; ++k) psi[k] = psi[k - 1] * (k - 1 + d) / k;
  return psi;
}

/// MA(infinity) truncation used by the t5 ARFIMA path: 10 n, at least 1e4.
inline int arfima_truncation_length(int n) { return std::max(10 * n, 10000); }

/// Fractional Gaussian noise autocovariances gamma(0..nlags), unit variance.
inline Eigen::VectorXd fgn_gamma(double hurst, int nlags) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw invalid_input("fgn_gamma: hurst outside (0,1)");
  if (nlags < 0) throw invalid_input("fgn_gamma: negative lag count");
  Eigen::VectorXd g(nlags + 1);
  const double two_h = 2.0 * hurst;
  for (int k = 0; k <= nlags; ++k)
    g[k] = 0.5 * (std::pow(k + 1.0, two_h) - 2.0 * std::pow(static_cast<double>(k), two_h) +
                  std::pow(std::abs(k - 1.0), two_h));
  return g;
}

/// Three independent AR(1) chains with coefficient 0.4 and standard normal
/// innovations; burn-in 1000, started from the stationary marginal.
inline Eigen::MatrixXd gen_regressors(int n, std::mt19937_64& gen) {
  if (n < 1) throw invalid_input("gen_regressors: n must be positive");
  constexpr double phi = 0.4;
  constexpr int burn = 1000;
  const double sd0 = std::sqrt(1.0 / (1.0 - phi * phi));
  Eigen::MatrixXd x(n, 3);
  for (int j = 0; j < 3; ++j) {
    double state = sd0 * normal_draw(gen);
    for (int t = 0; t < burn; ++t) state = phi * state + normal_draw(gen);
    for (int t = 0; t < n; ++t) {
      state = phi * state + normal_draw(gen);
      x(t, j) = state;
    }
  }
  return x;
}

/// ARMA(1,1) errors e_t = phi e_{t-1} + xi_t + theta xi_{t-1} with
/// unit-variance innovations; burn-in 1000 from e = xi = 0.
inline Eigen::VectorXd gen_arma(int n, double phi, double theta, Margin margin,
                                std::mt19937_64& gen) {
  if (n < 1) throw invalid_input("gen_arma: n must be positive");
  if (!(std::abs(phi) < 1.0)) throw invalid_input("gen_arma: |phi| must be < 1");
  constexpr int burn = 1000;
  Eigen::VectorXd out(n);
  double e = 0.0, xi_prev = 0.0;
  for (int t = 0; t < burn + n; ++t) {
    const double xi = detail::innovation(margin, gen);
    e = phi * e + xi + theta * xi_prev;
    xi_prev = xi;
    if (t >= burn) out[t - burn] = e;
  }
  return out;
}

/// ARFIMA(0,d,0) errors.  Gaussian margin: exact stationary draw by circulant
/// embedding (one pad-and-retry with a doubled circulant on embedding
/// failure).  t5 margin: truncated MA(infinity) driven by sqrt(3/5) t5
/// innovations, truncation arfima_truncation_length(n).
inline Eigen::VectorXd gen_arfima(int n, double d, Margin margin, std::mt19937_64& gen) {
  if (n < 1) throw invalid_input("gen_arfima: n must be positive");
  if (!(d > 0.0 && d < 0.5)) throw invalid_input("gen_arfima: d outside (0, 0.5)");
  if (margin == Margin::gaussian) {
    try {
      return davies_harte_draw(arfima_gamma(d, n), gen);
    } catch (const embedding_failure&) {
      return davies_harte_draw(arfima_gamma(d, 2 * n), gen).head(n);
    }
  }
  const int trunc = arfima_truncation_length(n);
  Eigen::VectorXd xi(n + trunc - 1);
  for (int i = 0; i < xi.size(); ++i) xi[i] = detail::innovation(margin, gen);
  const Eigen::VectorXd conv = fft_convolve(arfima_psi(d, trunc), xi);
  return conv.segment(trunc - 1, n);
}

/// Stationary copula chain on [0,1] mapped through the margin quantile.
/// U_1 ~ Uniform(0,1), burn-in 1000 transitions, one uniform per step.  Any
/// transition copula exposing cond_quantile(w, u) plugs in here.
template <class Copula>
Eigen::VectorXd gen_copula_chain(int n, const Copula& copula, Margin margin,
                                 std::mt19937_64& gen) {
  if (n < 1) throw invalid_input("gen_copula_chain: n must be positive");
  constexpr int burn = 1000;
  Eigen::VectorXd out(n);
  double state = uniform01(gen);
  for (int t = 1; t < burn + n; ++t) {
    state = copula.cond_quantile(uniform01(gen), state);
    if (t >= burn) out[t - burn] = detail::margin_quantile(state, margin);
  }
  return out;
}

inline Eigen::VectorXd gen_fgm_chain(int n, double lambda1, double lambda2, Margin margin,
                                     std::mt19937_64& gen) {
  const FgmCopula copula{lambda1, lambda2};
  if (!copula.admissible())
    throw invalid_input("gen_fgm_chain: (lambda1, lambda2) outside the admissible region");
  return gen_copula_chain(n, copula, margin, gen);
}

/// Fractional Gaussian noise via Davies-Harte; the t5 margin applies the
/// Gaussian-copula transform sqrt(3/5) F_t5^{-1}(Phi(G_t)).
inline Eigen::VectorXd gen_fgn(int n, double hurst, Margin margin, std::mt19937_64& gen) {
  if (n < 1) throw invalid_input("gen_fgn: n must be positive");
  if (!(hurst > 0.5 && hurst < 1.0)) throw invalid_input("gen_fgn: hurst outside (0.5, 1)");
  Eigen::VectorXd g = davies_harte_draw(fgn_gamma(hurst, n), gen);
  if (margin == Margin::standardized_t5)
    for (int t = 0; t < n; ++t)
      g[t] = std::sqrt(0.6) * t_quantile(5.0, normal_cdf(g[t]));
  return g;
}

/// Error-model dispatch on a caller-provided stream.
inline Eigen::VectorXd gen_errors(int n, const ErrorProcessSpec& spec, std::mt19937_64& gen) {
  validate(spec);
  struct Visitor {
    int n;
    Margin margin;
    std::mt19937_64& gen;
    Eigen::VectorXd operator()(const ArmaSpec& s) const {
      return gen_arma(n, s.phi, s.theta, margin, gen);
    }
    Eigen::VectorXd operator()(const ArfimaSpec& s) const {
      return gen_arfima(n, s.d, margin, gen);
    }
    Eigen::VectorXd operator()(const FgmSpec& s) const {
      return gen_fgm_chain(n, s.lambda1, s.lambda2, margin, gen);
    }
    Eigen::VectorXd operator()(const FgnSpec& s) const {
      return gen_fgn(n, s.hurst, margin, gen);
    }
  };
  return std::visit(Visitor{n, spec.margin, gen}, spec.model);
}

struct SimulatedDataset {
  RegressionDataset dataset;
  Eigen::VectorXd true_beta;
  std::uint64_t seed = 0;
  ErrorProcessSpec spec;
  int ma_truncation = 0;  // nonzero only on the truncated ARFIMA t5 path
};

inline Eigen::VectorXd default_true_beta() {
  Eigen::VectorXd beta(4);
  beta << -2.0, 0.1, -1.0, 0.5;
  return beta;
}

/// Full simulated regression sample.  Regressors and errors come from the
/// independent substreams {seed, 0} and {seed, 1}.
inline SimulatedDataset gen_dataset(int n, const ErrorProcessSpec& spec, std::uint64_t seed,
                                    const Eigen::VectorXd& beta = default_true_beta()) {
  if (n < 1) throw invalid_input("gen_dataset: n must be positive");
  if (beta.size() != 4) throw invalid_input("gen_dataset: beta must have 4 entries");
  validate(spec);

  SimulatedDataset sim;
  sim.true_beta = beta;
  sim.seed = seed;
  sim.spec = spec;
  if (std::holds_alternative<ArfimaSpec>(spec.model) && spec.margin == Margin::standardized_t5)
    sim.ma_truncation = arfima_truncation_length(n);

  std::mt19937_64 gen_x = substream(seed, {0});
  std::mt19937_64 gen_e = substream(seed, {1});
  sim.dataset.x = gen_regressors(n, gen_x);
  const Eigen::VectorXd eps = gen_errors(n, spec, gen_e);
  sim.dataset.y = (beta[0] + (sim.dataset.x * beta.tail(3)).array() + eps.array()).matrix();
  return sim;
}

/// Writes the sample as CSV with header t,y,x1,x2,x3.
inline void save_dataset_csv(const RegressionDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("save_dataset_csv: cannot open " + path);
  out << "t,y,x1,x2,x3\n";
  char buf[32];
  for (int t = 0; t < data.n(); ++t) {
    out << (t + 1);
    std::snprintf(buf, sizeof buf, "%.17g", data.y[t]);
    out << ',' << buf;
    for (int j = 0; j < data.p(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", data.x(t, j));
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw data_error("save_dataset_csv: write failed for " + path);
}

inline void save_dataset_csv(const SimulatedDataset& sim, const std::string& path) {
  save_dataset_csv(sim.dataset, path);
}

}  // namespace rsreg
