#pragma once

#include <cmath>
#include <utility>

#include "rsreg/errors.hpp"

namespace rsreg {
namespace detail {

template <class F>
double simpson_rec(const F& f, double a, double fa, double b, double fb,
                   double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature on [a, b].
template <class F>
double integrate(const F& f, double a, double b, double tol = 1e-12) {
  if (!(a <= b)) throw invalid_input("integrate: empty interval");
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, 52);
}

/// Quadrature over the whole real line via the substitution v = t/(1-t^2).
/// The integrand must decay at infinity (non-finite values are treated as 0).
template <class F>
double integrate_line(const F& f, double tol = 1e-12) {
  auto g = [&f](double t) {
    const double s = 1.0 - t * t;
    const double v = t / s;
    const double w = (1.0 + t * t) / (s * s);
    const double y = f(v) * w;
    return std::isfinite(y) ? y : 0.0;
  };
  return integrate(g, -1.0, 0.0, 0.5 * tol) + integrate(g, 0.0, 1.0, 0.5 * tol);
}

}  // namespace rsreg
