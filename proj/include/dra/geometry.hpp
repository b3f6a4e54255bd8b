#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "dra/point_cloud.hpp"
#include "dra/rng.hpp"

namespace dra {

// Vol(B^n_1) = pi^{n/2} / Gamma(n/2 + 1), evaluated in log space so that
// large n does not overflow.
inline double unit_ball_volume(int n) {
  if (n < 1) throw std::invalid_argument("unit_ball_volume: n must be >= 1");
  const double half_n = 0.5 * static_cast<double>(n);
  const double log_pi = 1.1447298858494001741434273513531;
  return std::exp(half_n * log_pi - std::lgamma(half_n + 1.0));
}

// Surface volume of the sphere S^{n-1}_r bounding B^n_r.
inline double sphere_surface(int n, double r) {
  if (n < 1) throw std::invalid_argument("sphere_surface: n must be >= 1");
  if (r <= 0.0) throw std::invalid_argument("sphere_surface: r must be positive");
  return static_cast<double>(n) * unit_ball_volume(n) * std::pow(r, n - 1);
}

// Volume of { x : sum |x_i|^{p_i} <= 1 }.
inline double generalized_ball_volume(const std::vector<double>& p) {
  if (p.empty()) throw std::invalid_argument("generalized_ball_volume: empty exponent list");
  double log_num = 0.0;
  double inv_sum = 0.0;
  for (double pi : p) {
    if (pi < 1.0) throw std::invalid_argument("generalized_ball_volume: exponents must be >= 1");
    log_num += std::lgamma(1.0 + 1.0 / pi);
    inv_sum += 1.0 / pi;
  }
  const double n = static_cast<double>(p.size());
  const double log2 = 0.69314718055994530941723212145818;
  return std::exp(n * log2 + log_num - std::lgamma(1.0 + inv_sum));
}

// N i.i.d. uniform points in B^n_R: unit Gaussian direction scaled by
// R * U^{1/n}. The generator sequence is fixed, so a seed pins the cloud.
inline PointCloud sample_uniform_ball(int n, double R, std::size_t N, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_uniform_ball: n must be >= 1");
  if (R <= 0.0) throw std::invalid_argument("sample_uniform_ball: R must be positive");
  if (N < 1) throw std::invalid_argument("sample_uniform_ball: N must be >= 1");
  Rng rng(seed);
  PointCloud cloud(N, static_cast<std::size_t>(n));
  std::vector<double> g(n);
  for (std::size_t i = 0; i < N; ++i) {
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (int j = 0; j < n; ++j) {
        g[j] = rng.gaussian();
        norm2 += g[j] * g[j];
      }
    } while (norm2 == 0.0);
    const double radius = R * std::pow(rng.uniform(), 1.0 / n);
    const double scale = radius / std::sqrt(norm2);
    for (int j = 0; j < n; ++j) cloud.at(i, j) = g[j] * scale;
  }
  return cloud;
}

// Open-ball neighbors: strict ||x_j - x_i|| < r, query excluded,
// members in increasing index order.
inline Neighborhood neighbors_within(const PointCloud& cloud, std::size_t i, double r) {
  if (i >= cloud.count()) throw std::out_of_range("neighbors_within: index out of range");
  Neighborhood nb;
  nb.center_index = i;
  nb.radius = r;
  const double r2 = r * r;
  for (std::size_t j = 0; j < cloud.count(); ++j) {
    if (j == i) continue;
    if (cloud.squared_dist(i, j) < r2) nb.member_indices.push_back(j);
  }
  return nb;
}

// k nearest by Euclidean distance, ties broken toward the smaller index.
inline Neighborhood k_nearest(const PointCloud& cloud, std::size_t i, std::size_t k) {
  if (i >= cloud.count()) throw std::out_of_range("k_nearest: index out of range");
  if (k < 1 || k >= cloud.count())
    throw std::invalid_argument("k_nearest: need 1 <= k <= count-1");
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(cloud.count() - 1);
  for (std::size_t j = 0; j < cloud.count(); ++j) {
    if (j == i) continue;
    order.emplace_back(cloud.squared_dist(i, j), j);
  }
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
  Neighborhood nb;
  nb.center_index = i;
  nb.k = k;
  nb.member_indices.reserve(k);
  for (std::size_t t = 0; t < k; ++t) nb.member_indices.push_back(order[t].second);
  return nb;
}

}  // namespace dra
