#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "dra/geometry.hpp"
#include "dra/point_cloud.hpp"
#include "dra/rng.hpp"

namespace dra {

// Row-major m x d linear DR map. lipschitz caches the operator 2-norm.
struct LinearMap {
  std::size_t rows = 0;  // embedding dimension m
  std::size_t cols = 0;  // data dimension d
  std::vector<double> matrix;
  double lipschitz = 0.0;

  double at(std::size_t i, std::size_t j) const { return matrix[i * cols + j]; }
  double& at(std::size_t i, std::size_t j) { return matrix[i * cols + j]; }

  PointCloud apply(const PointCloud& X) const {
    if (X.dim != cols) throw std::invalid_argument("LinearMap: dimension mismatch");
    PointCloud Y(X.count(), rows);
    for (std::size_t p = 0; p < X.count(); ++p) {
      const double* x = X.point(p);
      for (std::size_t i = 0; i < rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) s += matrix[i * cols + j] * x[j];
        Y.at(p, i) = s;
      }
    }
    return Y;
  }
};

// Top singular value by power iteration on A A^T (the smaller Gram
// matrix), relative tolerance 1e-8.
inline double lipschitz_of(const LinearMap& map) {
  const std::size_t m = map.rows, d = map.cols;
  if (m == 0 || d == 0) return 0.0;
  std::vector<double> gram(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += map.at(i, k) * map.at(j, k);
      gram[i * m + j] = s;
      gram[j * m + i] = s;
    }

  std::vector<double> v(m, 1.0 / std::sqrt(static_cast<double>(m)));
  std::vector<double> w(m, 0.0);
  double lambda = 0.0;
  for (int iter = 0; iter < 10000; ++iter) {
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += gram[i * m + j] * v[j];
      w[i] = s;
    }
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;  // zero map
    const double prev = lambda;
    lambda = norm;  // Rayleigh quotient for a unit v equals |Gv|
    for (std::size_t i = 0; i < m; ++i) v[i] = w[i] / norm;
    if (iter > 0 && std::abs(lambda - prev) <= 1e-10 * std::max(1.0, lambda)) break;
  }
  return std::sqrt(lambda);
}

namespace detail {

inline void orthonormalize_rows(LinearMap& map) {
  for (std::size_t i = 0; i < map.rows; ++i) {
    for (std::size_t p = 0; p < i; ++p) {
      double dot = 0.0;
      for (std::size_t j = 0; j < map.cols; ++j) dot += map.at(i, j) * map.at(p, j);
      for (std::size_t j = 0; j < map.cols; ++j) map.at(i, j) -= dot * map.at(p, j);
    }
    double norm = 0.0;
    for (std::size_t j = 0; j < map.cols; ++j) norm += map.at(i, j) * map.at(i, j);
    norm = std::sqrt(norm);
    if (norm < 1e-12) throw std::runtime_error("orthonormalize_rows: degenerate row");
    for (std::size_t j = 0; j < map.cols; ++j) map.at(i, j) /= norm;
  }
}

// Cyclic Jacobi eigendecomposition of a symmetric matrix; eigenvectors
// come back as columns of V. Fine for the small d used here.
inline void jacobi_eigen(std::vector<double>& A, std::size_t n, std::vector<double>& V) {
  V.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) V[i * n + i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += A[p * n + q] * A[p * n + q];
    if (off < 1e-24) return;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = A[p * n + q];
        if (std::abs(apq) < 1e-300) continue;
        const double app = A[p * n + p];
        const double aqq = A[q * n + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = A[k * n + p];
          const double akq = A[k * n + q];
          A[k * n + p] = c * akp - s * akq;
          A[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = A[p * n + k];
          const double aqk = A[q * n + k];
          A[p * n + k] = c * apk - s * aqk;
          A[q * n + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = V[k * n + p];
          const double vkq = V[k * n + q];
          V[k * n + p] = c * vkp - s * vkq;
          V[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
}

}  // namespace detail

// Gaussian matrix with orthonormalized rows, so L = 1 exactly.
// The raw (non-orthonormalized) variant backs a CLI flag.
inline LinearMap random_projection(std::size_t d, std::size_t m, std::uint64_t seed,
                                   bool orthonormalize = true) {
  if (m >= d) throw std::invalid_argument("random_projection: require m < d");
  if (m == 0) throw std::invalid_argument("random_projection: require m >= 1");
  Rng rng(seed);
  LinearMap map;
  map.rows = m;
  map.cols = d;
  map.matrix.resize(m * d);
  for (double& v : map.matrix) v = rng.gaussian();
  if (orthonormalize) {
    detail::orthonormalize_rows(map);
    map.lipschitz = 1.0;
  } else {
    map.lipschitz = lipschitz_of(map);
  }
  return map;
}

// First-m-coordinates projection; singular values are all 1.
inline LinearMap coordinate_projection(std::size_t d, std::size_t m) {
  if (m >= d) throw std::invalid_argument("coordinate_projection: require m < d");
  if (m == 0) throw std::invalid_argument("coordinate_projection: require m >= 1");
  LinearMap map;
  map.rows = m;
  map.cols = d;
  map.matrix.assign(m * d, 0.0);
  for (std::size_t i = 0; i < m; ++i) map.at(i, i) = 1.0;
  map.lipschitz = 1.0;
  return map;
}

// Top-m principal directions of the centered cloud. Deterministic
// symmetric eigendecomposition; each direction's largest-magnitude entry
// is made positive so reruns agree in sign.
inline LinearMap pca_projection(const PointCloud& X, std::size_t m) {
  if (X.count() < 2) throw std::invalid_argument("pca_projection: need at least 2 points");
  if (m >= X.dim) throw std::invalid_argument("pca_projection: require m < dim");
  const std::size_t d = X.dim;
  const std::size_t n = X.count();

  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += X.at(i, j);
  for (double& v : mean) v /= static_cast<double>(n);

  std::vector<double> cov(d * d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < d; ++a) {
      const double xa = X.at(i, a) - mean[a];
      for (std::size_t b = a; b < d; ++b)
        cov[a * d + b] += xa * (X.at(i, b) - mean[b]);
    }
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a; b < d; ++b) {
      cov[a * d + b] /= static_cast<double>(n - 1);
      cov[b * d + a] = cov[a * d + b];
    }

  std::vector<double> V;
  detail::jacobi_eigen(cov, d, V);

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cov[a * d + a] > cov[b * d + b]; });

  double max_eig = std::max(0.0, cov[order[0] * d + order[0]]);
  std::size_t rank = 0;
  for (std::size_t t = 0; t < d; ++t)
    if (cov[order[t] * d + order[t]] > 1e-12 * std::max(1.0, max_eig)) ++rank;
  if (rank < m)
    throw std::runtime_error("pca_projection: rank deficiency, achieved rank " +
                             std::to_string(rank) + " < requested " + std::to_string(m));

  LinearMap map;
  map.rows = m;
  map.cols = d;
  map.matrix.resize(m * d);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t col = order[i];
    std::size_t arg = 0;
    for (std::size_t j = 1; j < d; ++j)
      if (std::abs(V[j * d + col]) > std::abs(V[arg * d + col])) arg = j;
    const double sign = V[arg * d + col] >= 0.0 ? 1.0 : -1.0;
    for (std::size_t j = 0; j < d; ++j) map.at(i, j) = sign * V[j * d + col];
  }
  map.lipschitz = 1.0;  // orthonormal rows
  return map;
}

// Radius at which the mean open-ball neighbor count hits k_target
// (within +/- 1). The mean count is monotone in r, so bisection works.
inline double calibrate_r_u(const PointCloud& X, std::size_t k_target) {
  const std::size_t n = X.count();
  if (n < 2) throw std::invalid_argument("calibrate_r_u: need at least 2 points");
  if (k_target < 1 || k_target >= n)
    throw std::invalid_argument("calibrate_r_u: require 1 <= k_target < count");

  auto mean_count = [&](double r) {
    const double r2 = r * r;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (X.squared_dist(i, j) < r2) ++pairs;
    return 2.0 * static_cast<double>(pairs) / static_cast<double>(n);
  };

  double hi = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) hi = std::max(hi, X.squared_dist(i, j));
  hi = std::sqrt(hi) * (1.0 + 1e-9) + 1e-300;
  double lo = 0.0;
  const double target = static_cast<double>(k_target);

  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double c = mean_count(mid);
    if (std::abs(c - target) <= 1.0 && c > 0.0) return mid;
    if (c < target)
      lo = mid;
    else
      hi = mid;
  }
  throw std::invalid_argument("calibrate_r_u: target mean count unreachable within +/-1");
}

// Standard S-curve: (sin t, y, sign(t)(cos t - 1)), t in [-3pi/2, 3pi/2],
// y in [0, 2], plus isotropic Gaussian noise.
inline PointCloud s_curve(std::size_t N, double noise, std::uint64_t seed) {
  if (N < 1) throw std::invalid_argument("s_curve: N must be >= 1");
  if (noise < 0.0) throw std::invalid_argument("s_curve: noise must be >= 0");
  Rng rng(seed);
  const double pi = 3.1415926535897932384626433832795;
  PointCloud cloud(N, 3);
  for (std::size_t i = 0; i < N; ++i) {
    const double t = rng.uniform(-1.5 * pi, 1.5 * pi);
    const double y = rng.uniform(0.0, 2.0);
    const double sign = t >= 0.0 ? 1.0 : -1.0;
    cloud.at(i, 0) = std::sin(t);
    cloud.at(i, 1) = y;
    cloud.at(i, 2) = sign * (std::cos(t) - 1.0);
    if (noise > 0.0)
      for (std::size_t j = 0; j < 3; ++j) cloud.at(i, j) += noise * rng.gaussian();
  }
  return cloud;
}

// Standard Swiss roll: (t cos t, y, t sin t), t in [1.5pi, 4.5pi], y in [0, 21].
inline PointCloud swiss_roll(std::size_t N, double noise, std::uint64_t seed) {
  if (N < 1) throw std::invalid_argument("swiss_roll: N must be >= 1");
  if (noise < 0.0) throw std::invalid_argument("swiss_roll: noise must be >= 0");
  Rng rng(seed);
  const double pi = 3.1415926535897932384626433832795;
  PointCloud cloud(N, 3);
  for (std::size_t i = 0; i < N; ++i) {
    const double t = rng.uniform(1.5 * pi, 4.5 * pi);
    const double y = rng.uniform(0.0, 21.0);
    cloud.at(i, 0) = t * std::cos(t);
    cloud.at(i, 1) = y;
    cloud.at(i, 2) = t * std::sin(t);
    if (noise > 0.0)
      for (std::size_t j = 0; j < 3; ++j) cloud.at(i, j) += noise * rng.gaussian();
  }
  return cloud;
}

}  // namespace dra
