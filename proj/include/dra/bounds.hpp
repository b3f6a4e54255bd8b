#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dra/geometry.hpp"
#include "dra/quadrature.hpp"

namespace dra {

// Parameter bundle shared by the closed-form bounds. Requires m < n,
// 0 < r_U < R, r_V > 0, L > 0.
struct BoundParams {
  int n = 0;
  int m = 0;
  double R = 1.0;
  double r_U = 0.0;
  double r_V = 0.0;
  double L = 1.0;

  void validate() const {
    if (n < 1 || m < 1) throw std::invalid_argument("BoundParams: n, m must be positive");
    if (m >= n) throw std::invalid_argument("BoundParams: require m < n");
    if (!(r_U > 0.0 && r_U < R)) throw std::invalid_argument("BoundParams: require 0 < r_U < R");
    if (!(r_V > 0.0)) throw std::invalid_argument("BoundParams: require r_V > 0");
    if (!(L > 0.0)) throw std::invalid_argument("BoundParams: require L > 0");
  }
};

struct AvgCaseParams {
  BoundParams base;
  double delta = 0.0;

  void validate() const {
    base.validate();
    if (!(delta > 0.0) || delta * delta >= base.R * base.R - base.r_U * base.r_U)
      throw std::invalid_argument("AvgCaseParams: require 0 < delta^2 < R^2 - r_U^2");
  }

  // Radius of the ball of query images covered by the average-case bound.
  double effective_radius() const {
    return std::sqrt(base.R * base.R - base.r_U * base.r_U - delta * delta);
  }
};

// D(n, m) = Gamma((n-m)/2 + 1) Gamma(m/2 + 1) / Gamma(n/2 + 1).
inline double d_factor(int n, int m) {
  if (n < 1 || m < 1) throw std::invalid_argument("d_factor: n, m must be positive");
  if (m > n) throw std::invalid_argument("d_factor: require m <= n");
  const double a = std::lgamma(0.5 * (n - m) + 1.0);
  const double b = std::lgamma(0.5 * m + 1.0);
  const double c = std::lgamma(0.5 * n + 1.0);
  return std::exp(a + b - c);
}

// Worst-case precision bound: D(n,m) (r_U/R)^{n-m} r_U^m / (r_V/L)^m,
// taking the small-neighbourhood factor at its leading order.
inline double precision_bound_worst(const BoundParams& p) {
  p.validate();
  return d_factor(p.n, p.m) * std::pow(p.r_U / p.R, p.n - p.m) *
         std::pow(p.r_U / (p.r_V / p.L), p.m);
}

// Same bound on generalized (p-norm) balls; the generalized-ball volumes
// cancel, so the value does not depend on the exponent vector.
inline double precision_bound_pnorm(const BoundParams& p) {
  p.validate();
  return std::pow(p.r_U / p.R, p.n - p.m) * std::pow(p.r_U / (p.r_V / p.L), p.m);
}

enum class FiberKind {
  kSphereLift,      // q1: spherical fibers with the 1/(2 pi R) lift
  kBallProjection,  // q2: ball fibers of a linear projection
};

// Probability mass of queries sitting over large fibers, reduced to a 1-D
// radial integral. The fiber over t has radius sqrt(R^2 - |t|^2).
//
// The sphere-lift variant follows the printed constant structure verbatim
// and is flagged experimental: it is validated by Monte Carlo consistency
// only, and its small-neighbourhood limit is not 1.
inline double q_linear(const AvgCaseParams& p, FiberKind kind) {
  p.validate();
  const int n = p.base.n;
  const int m = p.base.m;
  const double R = p.base.R;
  const double re = p.effective_radius();
  if (re <= 0.0) return 0.0;

  const double shell = static_cast<double>(m) * unit_ball_volume(m);
  const double norm = unit_ball_volume(n) * std::pow(R, n);
  double integral = 0.0;
  if (kind == FiberKind::kBallProjection) {
    const double v_fiber = unit_ball_volume(n - m);
    integral = integrate(
        [&](double s) {
          const double h2 = R * R - s * s;
          if (h2 <= 0.0) return 0.0;
          return std::pow(s, m - 1) * v_fiber * std::pow(h2, 0.5 * (n - m));
        },
        0.0, re);
    return std::clamp(shell * integral / norm, 0.0, 1.0);
  }
  // Fibers on the lifted sphere are (n-m+1)-spheres of the same radius.
  const int sphere_dim = n - m + 2;
  integral = integrate(
      [&](double s) {
        const double h2 = R * R - s * s;
        if (h2 <= 0.0) return 0.0;
        return std::pow(s, m - 1) * sphere_surface(sphere_dim, std::sqrt(h2));
      },
      0.0, re);
  const double two_pi = 6.283185307179586476925286766559;
  return std::clamp(shell * integral / (two_pi * R * norm), 0.0, 1.0);
}

struct AvgBound {
  double bound = 0.0;
  double q = 0.0;  // q2, the ball-projection probability
};

// Average-case bound: D(n,m) (r_U / sqrt(r_U^2 + delta^2))^{n-m} r_U^m / (r_V/L)^m.
inline AvgBound precision_bound_avg(const AvgCaseParams& p) {
  p.validate();
  const BoundParams& b = p.base;
  const double ratio = b.r_U / std::sqrt(b.r_U * b.r_U + p.delta * p.delta);
  AvgBound out;
  out.bound = d_factor(b.n, b.m) * std::pow(ratio, b.n - b.m) *
              std::pow(b.r_U / (b.r_V / b.L), b.m);
  out.q = q_linear(p, FiberKind::kBallProjection);
  return out;
}

// Radius of the ball with the guaranteed preimage volume.
inline double waist_radius(const BoundParams& p) {
  p.validate();
  return std::pow(1.0 / d_factor(p.n, p.m), 1.0 / p.n) *
         std::pow(p.R, static_cast<double>(p.n - p.m) / p.n) *
         std::pow(p.r_V / p.L, static_cast<double>(p.m) / p.n);
}

// W2^2 lower bound: n/(n+2) (r - r_U)^2 when r >= r_U, else 0. The zero
// branch keeps the function total for grid searches; the theorem only
// speaks for r >= r_U.
inline double w2_lower_bound(const BoundParams& p) {
  const double r = waist_radius(p);
  if (r < p.r_U) return 0.0;
  const double n = static_cast<double>(p.n);
  return n / (n + 2.0) * (r - p.r_U) * (r - p.r_U);
}

// The supremum of the r_V minimizer set of w2_lower_bound: the boundary
// root where the waist radius meets r_U. Any smaller r_V also has zero
// bound but retrieves less.
inline double optimal_rv(int n, int m, double R, double r_U, double L) {
  BoundParams probe{n, m, R, r_U, 1.0, L};
  probe.validate();
  return L * std::pow(d_factor(n, m) * std::pow(r_U, n) / std::pow(R, n - m),
                      1.0 / static_cast<double>(m));
}

// Grid-search variant: argmin of the lower bound over the supplied grid,
// largest value winning ties.
inline double optimal_rv_grid(int n, int m, double R, double r_U, double L,
                              const std::vector<double>& rv_grid) {
  if (rv_grid.empty()) throw std::invalid_argument("optimal_rv_grid: empty grid");
  double best_rv = rv_grid.front();
  double best_val = std::numeric_limits<double>::infinity();
  for (double rv : rv_grid) {
    BoundParams p{n, m, R, r_U, rv, L};
    const double val = w2_lower_bound(p);
    if (val < best_val || (val == best_val && rv > best_rv)) {
      best_val = val;
      best_rv = rv;
    }
  }
  return best_rv;
}

// Exact W2 between uniform distributions on concentric balls of radii
// r1 <= r2: sqrt(n/(n+2)) (r2 - r1), realized by the scaling map.
inline double concentric_ball_w2(int n, double r1, double r2) {
  if (n < 1) throw std::invalid_argument("concentric_ball_w2: n must be >= 1");
  if (r1 < 0.0 || r2 < 0.0) throw std::invalid_argument("concentric_ball_w2: radii must be >= 0");
  if (r1 > r2) throw std::invalid_argument("concentric_ball_w2: require r1 <= r2");
  const double nn = static_cast<double>(n);
  return std::sqrt(nn / (nn + 2.0)) * (r2 - r1);
}

}  // namespace dra
