#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace dra {

struct QuadratureFailure : std::runtime_error {
  double achieved;
  explicit QuadratureFailure(double err)
      : std::runtime_error("adaptive Simpson did not reach tolerance, achieved " +
                           std::to_string(err)),
        achieved(err) {}
};

namespace detail {

template <class F>
double simpson(const F& f, double a, double fa, double b, double fb, double m, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive_step(const F& f, double a, double fa, double b, double fb, double m, double fm,
                     double whole, double tol, int depth, double& worst_err) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(f, a, fa, m, fm, lm, flm);
  const double right = simpson(f, m, fm, b, fb, rm, frm);
  const double err = left + right - whole;
  if (std::abs(err) <= 15.0 * tol) return left + right + err / 15.0;
  if (depth <= 0) {
    worst_err = std::max(worst_err, std::abs(err));
    return left + right + err / 15.0;
  }
  return adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1, worst_err) +
         adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1, worst_err);
}

}  // namespace detail

// Adaptive Simpson, absolute tolerance. Depth 20 caps the interval count at 2^20.
template <class F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-8) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double whole = detail::simpson(f, a, fa, b, fb, m, fm);
  double worst_err = 0.0;
  const double result =
      detail::adaptive_step(f, a, fa, b, fb, m, fm, whole, abs_tol, 20, worst_err);
  if (worst_err > 0.0) throw QuadratureFailure(worst_err);
  return result;
}

}  // namespace dra
