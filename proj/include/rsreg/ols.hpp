#pragma once

#include <Eigen/Dense>

#include "rsreg/errors.hpp"
#include "rsreg/moments.hpp"

namespace rsreg {

struct OlsFit {
  Eigen::VectorXd beta;       // intercept first
  Eigen::VectorXd residuals;  // n
  Eigen::MatrixXd xtx_inv;    // (Xt'Xt)^-1 including the intercept column
  double cond = 0.0;          // singular value ratio of the augmented design
};

inline Eigen::MatrixXd augment_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd xt(x.rows(), x.cols() + 1);
  xt.col(0).setOnes();
  xt.rightCols(x.cols()) = x;
  return xt;
}

/// QR-based least squares on the intercept-augmented design.
inline OlsFit ols_fit(const RegressionDataset& data) {
  if (data.x.rows() != data.y.size())
    throw invalid_input("ols_fit: x and y lengths disagree");
  const Eigen::MatrixXd xt = augment_intercept(data.x);
  const int n = static_cast<int>(xt.rows()), m = static_cast<int>(xt.cols());
  if (n < m) throw invalid_input("ols_fit: fewer rows than coefficients");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xt);
  if (qr.rank() < m) throw numeric_error("ols_fit: design is rank deficient");

  OlsFit fit;
  fit.beta = qr.solve(data.y);
  fit.residuals = data.y - xt * fit.beta;
  fit.xtx_inv = (xt.transpose() * xt).ldlt().solve(Eigen::MatrixXd::Identity(m, m));
  const Eigen::VectorXd sv = xt.jacobiSvd().singularValues();
  fit.cond = sv[0] / sv[sv.size() - 1];
  return fit;
}

}  // namespace rsreg
