#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "rsreg/errors.hpp"

namespace rsreg {

/// Length of the column-stacked lower triangle of an m x m symmetric matrix.
constexpr int vech_size(int m) { return m * (m + 1) / 2; }

/// Position of entry (i, j), i >= j, inside the stacked lower triangle.
constexpr int vech_index(int m, int i, int j) {
  return j * m - j * (j - 1) / 2 + (i - j);
}

/// Total moment dimension for p raw regressors: vech block plus cross block.
constexpr int moment_dim(int p) { return vech_size(p + 1) + (p + 1); }

inline Eigen::VectorXd vech(const Eigen::MatrixXd& s) {
  if (s.rows() != s.cols()) throw invalid_input("vech: matrix must be square");
  const int m = static_cast<int>(s.rows());
  Eigen::VectorXd out(vech_size(m));
  int k = 0;
  for (int j = 0; j < m; ++j)
    for (int i = j; i < m; ++i) out[k++] = s(i, j);
  return out;
}

inline Eigen::MatrixXd unvech(const Eigen::VectorXd& v) {
  const int len = static_cast<int>(v.size());
  const int m = static_cast<int>((std::sqrt(8.0 * len + 1.0) - 1.0) / 2.0 + 0.5);
  if (vech_size(m) != len) throw invalid_input("unvech: length is not triangular");
  Eigen::MatrixXd s(m, m);
  int k = 0;
  for (int j = 0; j < m; ++j)
    for (int i = j; i < m; ++i) s(i, j) = s(j, i) = v[k++];
  return s;
}

/// Stacked moment coordinates [vech(Sigma) | Gamma] for an intercept-augmented
/// design of size m = p + 1.  The same layout describes both population-level
/// moment vectors and per-observation moment vectors.
struct MomentVector {
  Eigen::VectorXd coords;
  int m = 0;

  int p() const { return m - 1; }
  int dim() const { return static_cast<int>(coords.size()); }
  Eigen::VectorXd vech_sigma() const { return coords.head(vech_size(m)); }
  Eigen::VectorXd gamma() const { return coords.tail(m); }
  Eigen::MatrixXd sigma() const { return unvech(coords.head(vech_size(m))); }
};

using UVector = MomentVector;

inline MomentVector make_moment_vector(const Eigen::VectorXd& vech_sigma,
                                       const Eigen::VectorXd& gamma) {
  const int m = static_cast<int>(gamma.size());
  if (m < 1) throw invalid_input("make_moment_vector: empty cross block");
  if (vech_sigma.size() != vech_size(m))
    throw invalid_input("make_moment_vector: block sizes disagree");
  MomentVector mv;
  mv.m = m;
  mv.coords.resize(vech_size(m) + m);
  mv.coords << vech_sigma, gamma;
  return mv;
}

inline MomentVector make_moment_vector(Eigen::VectorXd coords, int m) {
  if (coords.size() != vech_size(m) + m)
    throw invalid_input("make_moment_vector: bad coordinate length");
  return MomentVector{std::move(coords), m};
}

/// Regression sample; the intercept column is prepended internally everywhere.
struct RegressionDataset {
  Eigen::MatrixXd x;  // n x p raw regressors
  Eigen::VectorXd y;  // n responses

  int n() const { return static_cast<int>(y.size()); }
  int p() const { return static_cast<int>(x.cols()); }
};

inline void validate(const RegressionDataset& data) {
  if (data.x.rows() != data.y.size())
    throw invalid_input("dataset: x and y lengths disagree");
  if (data.p() < 1) throw invalid_input("dataset: needs at least one regressor");
  if (data.n() <= moment_dim(data.p()))
    throw invalid_input("dataset: sample smaller than the moment dimension");
  if (!data.x.allFinite() || !data.y.allFinite())
    throw invalid_input("dataset: non-finite entries");
}

/// Per-observation moment vector U = [vech(xt xt'), xt y] with xt = (1, x').
inline UVector obs_moments(const Eigen::VectorXd& x_row, double y) {
  const int m = static_cast<int>(x_row.size()) + 1;
  Eigen::VectorXd xt(m);
  xt[0] = 1.0;
  xt.tail(m - 1) = x_row;
  Eigen::VectorXd coords(vech_size(m) + m);
  int k = 0;
  for (int j = 0; j < m; ++j)
    for (int i = j; i < m; ++i) coords[k++] = xt[i] * xt[j];
  coords.tail(m) = xt * y;
  return MomentVector{std::move(coords), m};
}

/// All n per-observation moment vectors, one per row.
inline Eigen::MatrixXd obs_moments_matrix(const RegressionDataset& data) {
  validate(data);
  const int n = data.n(), m = data.p() + 1;
  Eigen::MatrixXd u(n, moment_dim(data.p()));
  for (int r = 0; r < n; ++r) {
    u.row(r) = obs_moments(data.x.row(r).transpose(), data.y[r]).coords.transpose();
  }
  (void)m;
  return u;
}

/// det(Sigma) of the design block.
inline double design_det(const MomentVector& mv) {
  return mv.sigma().partialPivLu().determinant();
}

/// Coefficient map: solve Sigma(x) b = Gamma(x).  Defined on det(Sigma) > 0.
inline Eigen::VectorXd coef_from_moments(const MomentVector& mv) {
  const Eigen::MatrixXd sigma = mv.sigma();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(sigma);
  const double det = lu.determinant();
  if (!(det > 0.0)) throw outside_domain(det);
  return lu.solve(mv.gamma());
}

namespace detail {

/// Determinants of Sigma with column l replaced by Gamma (Cramer numerators).
inline Eigen::VectorXd cramer_numerators(const MomentVector& mv) {
  const Eigen::MatrixXd sigma = mv.sigma();
  const Eigen::VectorXd gamma = mv.gamma();
  Eigen::VectorXd out(mv.m);
  for (int l = 0; l < mv.m; ++l) {
    Eigen::MatrixXd s = sigma;
    s.col(l) = gamma;
    out[l] = s.partialPivLu().determinant();
  }
  return out;
}

/// Cofactor matrix (transpose of the adjugate), entry (r, c) = d det / d M(r, c).
/// Computed from minors so singular matrices are handled exactly.
inline Eigen::MatrixXd cofactor_matrix(const Eigen::MatrixXd& mat) {
  const int m = static_cast<int>(mat.rows());
  Eigen::MatrixXd cof(m, m);
  Eigen::MatrixXd minor(m - 1, m - 1);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      for (int i = 0, ii = 0; i < m; ++i) {
        if (i == r) continue;
        for (int j = 0, jj = 0; j < m; ++j) {
          if (j == c) continue;
          minor(ii, jj) = mat(i, j);
          ++jj;
        }
        ++ii;
      }
      const double d = (m == 1) ? 1.0 : minor.partialPivLu().determinant();
      cof(r, c) = (((r + c) & 1) ? -1.0 : 1.0) * d;
    }
  }
  return cof;
}

}  // namespace detail

/// Truncated coefficient map: Cramer numerators over max(det(Sigma), c).
/// Total (no domain restriction) and equal to the plain map when det > c.
inline Eigen::VectorXd coef_from_moments_trunc(const MomentVector& mv, double c) {
  if (!(c > 0.0)) throw invalid_input("coef_from_moments_trunc: c must be positive");
  const Eigen::VectorXd num = detail::cramer_numerators(mv);
  const double det = design_det(mv);
  return num / std::max(det, c);
}

/// Jacobian of the coefficient map, m x dim, in the stacked coordinates.
/// Off-diagonal vech coordinates move both symmetric entries at once.
inline Eigen::MatrixXd coef_jacobian(const MomentVector& mv) {
  const Eigen::MatrixXd sigma = mv.sigma();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(sigma);
  const double det = lu.determinant();
  if (!(det > 0.0)) throw outside_domain(det);
  const Eigen::VectorXd g = lu.solve(mv.gamma());
  const Eigen::MatrixXd sinv = lu.inverse();
  const int m = mv.m;
  Eigen::MatrixXd jac(m, mv.dim());
  int k = 0;
  for (int j = 0; j < m; ++j) {
    for (int i = j; i < m; ++i) {
      if (i == j)
        jac.col(k) = -sinv.col(i) * g[i];
      else
        jac.col(k) = -(sinv.col(i) * g[j] + sinv.col(j) * g[i]);
      ++k;
    }
  }
  jac.rightCols(m) = sinv;
  return jac;
}

/// Jacobian of the truncated map.  Smooth branch (det >= c, the documented
/// tie-break) delegates to coef_jacobian; the clamped branch differentiates
/// the Cramer numerators alone.
inline Eigen::MatrixXd coef_jacobian_trunc(const MomentVector& mv, double c) {
  if (!(c > 0.0)) throw invalid_input("coef_jacobian_trunc: c must be positive");
  const double det = design_det(mv);
  if (det >= c) return coef_jacobian(mv);
  const Eigen::MatrixXd sigma = mv.sigma();
  const Eigen::VectorXd gamma = mv.gamma();
  const int m = mv.m;
  Eigen::MatrixXd jac(m, mv.dim());
  for (int l = 0; l < m; ++l) {
    Eigen::MatrixXd s = sigma;
    s.col(l) = gamma;
    const Eigen::MatrixXd cof = detail::cofactor_matrix(s);
    int k = 0;
    for (int j = 0; j < m; ++j) {
      for (int i = j; i < m; ++i) {
        double d = (j != l) ? cof(i, j) : 0.0;
        if (i != j && i != l) d += cof(j, i);
        jac(l, k++) = d;
      }
    }
    for (int r = 0; r < m; ++r) jac(l, vech_size(m) + r) = cof(r, l);
  }
  return jac / c;
}

/// Plug-in second-moment matrix of the smoothed coordinates:
/// (c2 / f0) * mean of U U' over the sample (uncentered by construction).
inline Eigen::MatrixXd plugin_moment_cov(const Eigen::MatrixXd& umat, double c2,
                                         double f0) {
  if (umat.rows() < 1) throw invalid_input("plugin_moment_cov: empty sample");
  if (!(c2 > 0.0) || !(f0 > 0.0))
    throw invalid_input("plugin_moment_cov: c2 and f0 must be positive");
  Eigen::MatrixXd s = (umat.transpose() * umat) / static_cast<double>(umat.rows());
  s *= c2 / f0;
  return 0.5 * (s + s.transpose());
}

}  // namespace rsreg
