#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <unsupported/Eigen/FFT>
#include <vector>

#include "rsreg/errors.hpp"

namespace rsreg {

/// Periodogram I(l_k) = |sum_t x_t e^{-i t l_k}|^2 / (2 pi n) at the Fourier
/// frequencies l_k = 2 pi k / n, k = 1..floor(n/2).  The mean is removed first.
inline Eigen::VectorXd periodogram(const Eigen::VectorXd& series) {
  const int n = static_cast<int>(series.size());
  if (n < 4) throw invalid_input("periodogram: need at least 4 observations");
  std::vector<double> x(n);
  const double mean = series.mean();
  for (int t = 0; t < n; ++t) x[t] = series[t] - mean;
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, x);
  Eigen::VectorXd out(n / 2);
  for (int k = 1; k <= n / 2; ++k) out[k - 1] = std::norm(spec[k]) / (2.0 * M_PI * n);
  return out;
}

/// Normalized DFT ordinates w(l_k) = (2 pi n)^{-1/2} sum_t x_t e^{-i t l_k}
/// for k = 1..floor(n/2), one column of ordinates per input column.
inline Eigen::MatrixXcd dft_ordinates(const Eigen::MatrixXd& series) {
  const int n = static_cast<int>(series.rows());
  if (n < 4) throw invalid_input("dft_ordinates: need at least 4 observations");
  Eigen::MatrixXcd out(n / 2, series.cols());
  Eigen::FFT<double> fft;
  std::vector<double> x(n);
  std::vector<std::complex<double>> spec;
  const double scale = 1.0 / std::sqrt(2.0 * M_PI * n);
  for (int c = 0; c < series.cols(); ++c) {
    for (int t = 0; t < n; ++t) x[t] = series(t, c);
    fft.fwd(spec, x);
    for (int k = 1; k <= n / 2; ++k) out(k - 1, c) = scale * spec[k];
  }
  return out;
}

/// Full linear convolution of a and b via zero-padded FFT.
inline Eigen::VectorXd fft_convolve(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const int la = static_cast<int>(a.size()), lb = static_cast<int>(b.size());
  if (la == 0 || lb == 0) throw invalid_input("fft_convolve: empty input");
  const int lout = la + lb - 1;
  int nfft = 1;
  while (nfft < lout) nfft <<= 1;
  std::vector<double> pa(nfft, 0.0), pb(nfft, 0.0);
  for (int i = 0; i < la; ++i) pa[i] = a[i];
  for (int i = 0; i < lb; ++i) pb[i] = b[i];
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> fa, fb;
  fft.fwd(fa, pa);
  fft.fwd(fb, pb);
  for (int i = 0; i < nfft; ++i) fa[i] *= fb[i];
  std::vector<double> conv;
  fft.inv(conv, fa);
  Eigen::VectorXd out(lout);
  for (int i = 0; i < lout; ++i) out[i] = conv[i];
  return out;
}

}  // namespace rsreg
