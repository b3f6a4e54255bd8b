#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dra/bounds.hpp"
#include "dra/geometry.hpp"
#include "dra/measures.hpp"
#include "dra/plot.hpp"
#include "dra/synth.hpp"
#include "dra/transport.hpp"

namespace dra {

struct SimulationConfig {
  int n = 10;
  std::size_t N = 10000;
  std::uint64_t seed = 1;
  std::size_t k_target = 500;     // r_U calibration target
  std::vector<int> m_list;        // defaults to 1..n-1
  std::vector<double> rv_grid;    // empty: 40 log-spaced in [0.05, 2] x rv_star per m
  double beta = 0.3;
  std::size_t k = 30;             // W2 neighborhood size
  bool coordinate_map = false;    // default: orthonormalized random projection

  void validate() const {
    if (n < 2) throw std::invalid_argument("SimulationConfig: n must be >= 2");
    if (N < 2) throw std::invalid_argument("SimulationConfig: N must be >= 2");
    if (k_target < 1 || k_target >= N)
      throw std::invalid_argument("SimulationConfig: k_target must be in [1, N)");
    for (int m : m_list)
      if (m < 1 || m >= n) throw std::invalid_argument("SimulationConfig: m_list entries must be < n");
    for (std::size_t t = 1; t < rv_grid.size(); ++t)
      if (rv_grid[t] <= rv_grid[t - 1] || rv_grid[t - 1] <= 0.0)
        throw std::invalid_argument("SimulationConfig: rv_grid must be strictly increasing positive");
  }
};

struct VerificationResult {
  std::string name;
  bool pass = false;
  double observed = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string semantics;  // how observed/expected/tolerance combine
  double runtime_seconds = 0.0;
  nlohmann::json details = nlohmann::json::object();
};

inline nlohmann::json verification_to_json(const VerificationResult& r) {
  return {{"name", r.name},          {"pass", r.pass},
          {"observed", r.observed},  {"expected", r.expected},
          {"tolerance", r.tolerance}, {"semantics", r.semantics},
          {"runtime_seconds", r.runtime_seconds}, {"details", r.details}};
}

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Mean precision/recall over all queries at one (r_U, r_V), skipping
// queries with empty denominators.
struct SweepPoint {
  double precision = 0.0;
  double recall = 0.0;
  std::size_t defined_precision = 0;
  std::size_t defined_recall = 0;
};

// Shared scan for a whole r_V grid: per query, image distances are
// sorted once with relevance prefix sums, then every grid radius is a
// binary search.
inline std::vector<SweepPoint> sweep_grid(const PointCloud& X, const PointCloud& Y, double r_U,
                                          const std::vector<double>& rv_values) {
  const std::size_t n = X.count();
  const double ru2 = r_U * r_U;
  std::vector<SweepPoint> acc(rv_values.size());
  std::vector<std::pair<double, char>> img(n - 1);
  std::vector<std::size_t> rel_prefix(n);

  for (std::size_t i = 0; i < n; ++i) {
    std::size_t w = 0;
    std::size_t relevant = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const bool rel = X.squared_dist(i, j) < ru2;
      relevant += rel ? 1 : 0;
      img[w++] = {Y.squared_dist(i, j), rel ? 1 : 0};
    }
    std::sort(img.begin(), img.end());
    rel_prefix[0] = 0;
    for (std::size_t t = 0; t < img.size(); ++t)
      rel_prefix[t + 1] = rel_prefix[t] + static_cast<std::size_t>(img[t].second);

    for (std::size_t g = 0; g < rv_values.size(); ++g) {
      const double rv2 = rv_values[g] * rv_values[g];
      const auto it = std::lower_bound(
          img.begin(), img.end(), rv2,
          [](const std::pair<double, char>& a, double v) { return a.first < v; });
      const std::size_t retrieved = static_cast<std::size_t>(it - img.begin());
      const std::size_t hit = rel_prefix[retrieved];
      if (retrieved > 0) {
        acc[g].precision += static_cast<double>(hit) / static_cast<double>(retrieved);
        ++acc[g].defined_precision;
      }
      if (relevant > 0) {
        acc[g].recall += static_cast<double>(hit) / static_cast<double>(relevant);
        ++acc[g].defined_recall;
      }
    }
  }
  for (SweepPoint& p : acc) {
    if (p.defined_precision > 0) p.precision /= static_cast<double>(p.defined_precision);
    if (p.defined_recall > 0) p.recall /= static_cast<double>(p.defined_recall);
  }
  return acc;
}

inline std::vector<double> default_rv_grid(double rv_star) {
  std::vector<double> grid(40);
  const double lo = std::log(0.05 * rv_star);
  const double hi = std::log(2.0 * rv_star);
  for (std::size_t t = 0; t < grid.size(); ++t)
    grid[t] = std::exp(lo + (hi - lo) * static_cast<double>(t) / 39.0);
  return grid;
}

}  // namespace detail

// Precision/recall sweep over r_V for each embedding dimension, with the
// lower-bound optimum and the empirical f-beta argmax marked. The
// rv_star evaluation is appended as its own row inside the sorted grid.
inline std::vector<TradeoffRow> simulate_tradeoff(const SimulationConfig& config) {
  config.validate();
  std::vector<int> m_list = config.m_list;
  if (m_list.empty())
    for (int m = 1; m < config.n; ++m) m_list.push_back(m);

  const PointCloud X = sample_uniform_ball(config.n, 1.0, config.N, config.seed);
  const double r_U = calibrate_r_u(X, config.k_target);

  std::vector<TradeoffRow> table;
  for (int m : m_list) {
    const LinearMap map =
        config.coordinate_map
            ? coordinate_projection(static_cast<std::size_t>(config.n),
                                    static_cast<std::size_t>(m))
            : random_projection(static_cast<std::size_t>(config.n),
                                static_cast<std::size_t>(m),
                                config.seed + static_cast<std::uint64_t>(m));
    const PointCloud Y = map.apply(X);
    const double rv_star = optimal_rv(config.n, m, 1.0, r_U, map.lipschitz);

    std::vector<double> grid =
        config.rv_grid.empty() ? detail::default_rv_grid(rv_star) : config.rv_grid;
    grid.push_back(rv_star);
    std::sort(grid.begin(), grid.end());
    const std::size_t star_idx = static_cast<std::size_t>(
        std::lower_bound(grid.begin(), grid.end(), rv_star) - grid.begin());

    const auto points = detail::sweep_grid(X, Y, r_U, grid);

    std::size_t argmax = 0;
    std::vector<TradeoffRow> rows(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      rows[g].m = m;
      rows[g].r_V = grid[g];
      rows[g].precision = points[g].precision;
      rows[g].recall = points[g].recall;
      rows[g].f_beta = f_beta(points[g].precision, points[g].recall, config.beta);
      rows[g].is_rv_star = (g == star_idx);
      if (rows[g].f_beta > rows[argmax].f_beta) argmax = g;
    }
    rows[argmax].is_fbeta_argmax = true;
    table.insert(table.end(), rows.begin(), rows.end());
  }
  return table;
}

// Fixed m, varying neighborhood scale: recalibrate r_U for each k target
// and report the measures at the lower-bound optimum r_V.
struct RuSweepRow {
  std::size_t k_target = 0;
  double r_U = 0.0;
  double rv_star = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f_beta = 0.0;
};

inline std::vector<RuSweepRow> sweep_r_u(const SimulationConfig& config, int m,
                                         const std::vector<std::size_t>& k_list) {
  config.validate();
  if (m < 1 || m >= config.n) throw std::invalid_argument("sweep_r_u: bad m");
  const PointCloud X = sample_uniform_ball(config.n, 1.0, config.N, config.seed);
  const LinearMap map =
      config.coordinate_map
          ? coordinate_projection(static_cast<std::size_t>(config.n),
                                  static_cast<std::size_t>(m))
          : random_projection(static_cast<std::size_t>(config.n), static_cast<std::size_t>(m),
                              config.seed + static_cast<std::uint64_t>(m));
  const PointCloud Y = map.apply(X);

  std::vector<RuSweepRow> rows;
  for (std::size_t k_target : k_list) {
    RuSweepRow row;
    row.k_target = k_target;
    row.r_U = calibrate_r_u(X, k_target);
    row.rv_star = optimal_rv(config.n, m, 1.0, row.r_U, map.lipschitz);
    const auto pt = detail::sweep_grid(X, Y, row.r_U, {row.rv_star}).front();
    row.precision = pt.precision;
    row.recall = pt.recall;
    row.f_beta = f_beta(pt.precision, pt.recall, config.beta);
    rows.push_back(row);
  }
  return rows;
}

inline void write_ru_sweep_csv(const std::vector<RuSweepRow>& rows, std::ostream& out) {
  out << "k_target,r_U,rv_star,precision,recall,f_beta\n";
  out << std::setprecision(17);
  for (const RuSweepRow& r : rows)
    out << r.k_target << ',' << r.r_U << ',' << r.rv_star << ',' << r.precision << ','
        << r.recall << ',' << r.f_beta << '\n';
}

// Discrete check of the concentric-ball transport law: empirical W2
// between uniform samples against sqrt(n/(n+2)) (r2 - r1), plus the
// displacement field against the scaling map.
inline VerificationResult verify_concentric_ball(int n, double r1, double r2, std::size_t N,
                                                 std::uint64_t seed, double rel_tol = 0.05,
                                                 double displacement_tol = 0.15) {
  if (r1 > r2) throw std::invalid_argument("verify_concentric_ball: require r1 <= r2");
  detail::Stopwatch timer;

  auto sample_or_point = [&](double r, std::uint64_t s) {
    if (r > 0.0) return sample_uniform_ball(n, r, N, s);
    return PointCloud(N, static_cast<std::size_t>(n));  // point mass at the origin
  };
  const PointCloud inner = sample_or_point(r1, seed);
  const PointCloud outer = sample_or_point(r2, seed + 1);

  const CostMatrix cost = cost_matrix(outer, inner);
  const Assignment match = solve_assignment(cost);
  const double observed = std::sqrt(match.total_cost / static_cast<double>(N));
  const double expected = concentric_ball_w2(n, r1, r2);

  // Scaling-map agreement: match(x) should sit near (r1/r2) x, measured
  // relative to the mean actual displacement.
  double pred_err = 0.0, disp = 0.0;
  const double shrink = r2 > 0.0 ? r1 / r2 : 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t j = match.col_of_row[i];
    double e2 = 0.0, d2 = 0.0;
    for (std::size_t c = 0; c < outer.dim; ++c) {
      const double pred = shrink * outer.at(i, c);
      const double ev = inner.at(j, c) - pred;
      const double dv = outer.at(i, c) - pred;
      e2 += ev * ev;
      d2 += dv * dv;
    }
    pred_err += std::sqrt(e2);
    disp += std::sqrt(d2);
  }
  const double displacement_rel = disp > 0.0 ? pred_err / disp : 0.0;

  VerificationResult result;
  result.name = "concentric_ball";
  result.observed = observed;
  result.expected = expected;
  bool cost_ok;
  if (expected > 0.0) {
    result.tolerance = rel_tol;
    result.semantics = "|observed - expected| <= tolerance * expected; displacement below details.displacement_tol";
    cost_ok = std::abs(observed - expected) <= rel_tol * expected;
  } else {
    // Identical distributions: only the empirical sampling floor remains.
    const double floor =
        3.0 * std::max(r2, 1e-12) * std::pow(static_cast<double>(N), -1.0 / std::max(n, 2));
    result.tolerance = floor;
    result.semantics = "observed <= tolerance (sampling noise floor)";
    cost_ok = observed <= floor;
  }
  const bool disp_ok = expected == 0.0 || displacement_rel <= displacement_tol;
  result.pass = cost_ok && disp_ok;
  result.details = {{"displacement_rel_error", displacement_rel},
                    {"displacement_tol", displacement_tol},
                    {"N", N}};
  result.runtime_seconds = timer.seconds();
  return result;
}

namespace detail {

// Centers of the grid cells of [-1,1]^2 that land inside the unit disc,
// ordered row-major.
inline std::vector<std::pair<double, double>> disc_cells(std::size_t grid_side) {
  const double h = 2.0 / static_cast<double>(grid_side);
  std::vector<std::pair<double, double>> cells;
  for (std::size_t iy = 0; iy < grid_side; ++iy)
    for (std::size_t ix = 0; ix < grid_side; ++ix) {
      const double x = -1.0 + (static_cast<double>(ix) + 0.5) * h;
      const double y = -1.0 + (static_cast<double>(iy) + 0.5) * h;
      if (x * x + y * y <= 1.0) cells.emplace_back(x, y);
    }
  return cells;
}

inline PointCloud cells_to_cloud(const std::vector<std::pair<double, double>>& cells,
                                 const std::vector<std::size_t>& idx) {
  PointCloud cloud(idx.size(), 2);
  for (std::size_t t = 0; t < idx.size(); ++t) {
    cloud.at(t, 0) = cells[idx[t]].first;
    cloud.at(t, 1) = cells[idx[t]].second;
  }
  return cloud;
}

inline double uniform_cells_w2(const PointCloud& A, const PointCloud& B) {
  const CostMatrix cost = cost_matrix(A, B);
  const std::vector<double> mu(A.count(), 1.0 / static_cast<double>(A.count()));
  const std::vector<double> nu(B.count(), 1.0 / static_cast<double>(B.count()));
  const TransportPlan plan = solve_discrete_ot(mu, nu, cost);
  return std::sqrt(std::max(0.0, plan.total_cost));
}

}  // namespace detail

// Among equal-cardinality cell subsets of the disc, the concentric one
// should be W2-closest to the inner ball. Property check against random
// subsets; every comparison is an exact OT solve.
inline VerificationResult verify_iso_wasserstein(std::size_t grid_side,
                                                 std::size_t inner_radius_cells,
                                                 std::size_t subset_cells, std::size_t trials,
                                                 std::uint64_t seed) {
  detail::Stopwatch timer;
  const auto cells = detail::disc_cells(grid_side);
  const double h = 2.0 / static_cast<double>(grid_side);
  const double inner_r = static_cast<double>(inner_radius_cells) * h;

  std::vector<std::size_t> inner_idx;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& [x, y] = cells[c];
    if (x * x + y * y < inner_r * inner_r) inner_idx.push_back(c);
  }
  if (inner_idx.empty())
    throw std::invalid_argument("verify_iso_wasserstein: inner ball contains no cells");
  if (subset_cells == 0 || subset_cells > cells.size())
    throw std::invalid_argument("verify_iso_wasserstein: bad subset size");

  // Concentric candidate: the subset_cells cells nearest the center.
  std::vector<std::size_t> by_radius(cells.size());
  std::iota(by_radius.begin(), by_radius.end(), 0);
  std::stable_sort(by_radius.begin(), by_radius.end(), [&](std::size_t a, std::size_t b) {
    const double ra = cells[a].first * cells[a].first + cells[a].second * cells[a].second;
    const double rb = cells[b].first * cells[b].first + cells[b].second * cells[b].second;
    return ra < rb;
  });
  std::vector<std::size_t> concentric(by_radius.begin(),
                                      by_radius.begin() + static_cast<std::ptrdiff_t>(subset_cells));

  const PointCloud inner_cloud = detail::cells_to_cloud(cells, inner_idx);
  const double w2_concentric =
      detail::uniform_cells_w2(detail::cells_to_cloud(cells, concentric), inner_cloud);

  Rng rng(seed);
  double min_random = std::numeric_limits<double>::infinity();
  std::size_t wins = 0;
  std::vector<std::size_t> pool(cells.size());
  for (std::size_t t = 0; t < trials; ++t) {
    std::iota(pool.begin(), pool.end(), 0);
    // Partial Fisher-Yates for a uniform subset.
    for (std::size_t s = 0; s < subset_cells; ++s) {
      const std::size_t r = s + static_cast<std::size_t>(rng.below(pool.size() - s));
      std::swap(pool[s], pool[r]);
    }
    std::vector<std::size_t> subset(pool.begin(),
                                    pool.begin() + static_cast<std::ptrdiff_t>(subset_cells));
    const double w2 =
        detail::uniform_cells_w2(detail::cells_to_cloud(cells, subset), inner_cloud);
    min_random = std::min(min_random, w2);
    if (w2_concentric <= w2 + 1e-9) ++wins;
  }

  VerificationResult result;
  result.name = "iso_wasserstein";
  result.observed = w2_concentric;
  result.expected = trials > 0 ? min_random : w2_concentric;
  result.tolerance = 1e-9;
  result.semantics = "observed <= expected + tolerance, for every random subset";
  result.pass = wins == trials;
  result.details = {{"trials", trials},
                    {"wins", wins},
                    {"subset_cells", subset_cells},
                    {"inner_cells", inner_idx.size()}};
  result.runtime_seconds = timer.seconds();
  return result;
}

// Partial-OT marginal law: transporting full inner-ball mass from the
// capped uniform density concentrates the active source support on the
// concentric ball of the prescribed volume. At 5x5 (and below 7) the LP
// optimum is also compared against exhaustive support enumeration.
inline VerificationResult verify_partial_ot_marginal(std::size_t grid_side,
                                                     std::size_t ball_cells,
                                                     std::uint64_t /*seed*/) {
  detail::Stopwatch timer;
  const auto cells = detail::disc_cells(grid_side);
  if (cells.size() > 400)
    throw CapacityError("verify_partial_ot_marginal: grid too large for the dense LP");

  std::vector<std::size_t> by_radius(cells.size());
  std::iota(by_radius.begin(), by_radius.end(), 0);
  std::stable_sort(by_radius.begin(), by_radius.end(), [&](std::size_t a, std::size_t b) {
    const double ra = cells[a].first * cells[a].first + cells[a].second * cells[a].second;
    const double rb = cells[b].first * cells[b].first + cells[b].second * cells[b].second;
    return ra < rb;
  });

  if (ball_cells == 0 || 2 * ball_cells >= cells.size())
    throw std::invalid_argument("verify_partial_ot_marginal: bad ball size");

  // Prefix counts that end on a complete radius shell, so the target ball
  // and the predicted support are both rotation-symmetric cell sets and
  // the boundary radius is unambiguous.
  std::vector<std::size_t> shell_prefix;
  {
    auto radius2 = [&](std::size_t c) {
      return cells[c].first * cells[c].first + cells[c].second * cells[c].second;
    };
    for (std::size_t t = 1; t <= cells.size(); ++t)
      if (t == cells.size() ||
          radius2(by_radius[t]) > radius2(by_radius[t - 1]) + 1e-12)
        shell_prefix.push_back(t);
  }
  auto nearest_shell = [&](std::size_t want) {
    std::size_t best = shell_prefix.front();
    for (std::size_t c : shell_prefix)
      if (std::llabs(static_cast<long long>(c) - static_cast<long long>(want)) <
          std::llabs(static_cast<long long>(best) - static_cast<long long>(want)))
        best = c;
    return best;
  };

  const std::size_t target_cells = nearest_shell(ball_cells);
  std::size_t support_cells = nearest_shell(2 * target_cells);
  if (support_cells <= target_cells || support_cells >= cells.size()) {
    // Fall back to the next shell strictly between the target and the disc.
    support_cells = cells.size();
    for (std::size_t c : shell_prefix)
      if (c > target_cells && c < cells.size()) {
        support_cells = c;
        break;
      }
    if (support_cells >= cells.size())
      throw std::invalid_argument("verify_partial_ot_marginal: no room for a larger support");
  }

  const std::vector<std::size_t> target_idx(
      by_radius.begin(), by_radius.begin() + static_cast<std::ptrdiff_t>(target_cells));
  const std::vector<std::size_t> predicted(
      by_radius.begin(), by_radius.begin() + static_cast<std::ptrdiff_t>(support_cells));

  const PointCloud domain_cloud = detail::cells_to_cloud(
      cells, [&] {
        std::vector<std::size_t> all(cells.size());
        std::iota(all.begin(), all.end(), 0);
        return all;
      }());
  const PointCloud target_cloud = detail::cells_to_cloud(cells, target_idx);
  CostMatrix cost = cost_matrix(domain_cloud, target_cloud);

  // The grid has exact cost ties across shells (distinct cells can trade
  // off equally against the symmetric target), so the LP optimum is
  // degenerate. An infinitesimal preference for central sources selects
  // the continuous-limit solution without measurably moving the cost.
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double r2 =
        cells[i].first * cells[i].first + cells[i].second * cells[i].second;
    for (std::size_t j = 0; j < target_cells; ++j) cost.at(i, j) += 1e-6 * r2;
  }

  // Density cap 1/V per cell; full target mass M = 1.
  const std::vector<double> f(cells.size(), 1.0 / static_cast<double>(support_cells));
  const std::vector<double> g(target_cells, 1.0 / static_cast<double>(target_cells));
  const TransportPlan plan = solve_partial_ot(f, g, cost, 1.0);

  const auto active_rows = plan.row_sums();
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < active_rows.size(); ++i)
    if (active_rows[i] > 1e-9 / static_cast<double>(support_cells)) active.push_back(i);

  std::vector<char> in_pred(cells.size(), 0);
  for (std::size_t c : predicted) in_pred[c] = 1;
  std::size_t sym_diff = 0;
  for (std::size_t c : active)
    if (!in_pred[c]) ++sym_diff;
  std::size_t covered = 0;
  for (std::size_t c : active)
    if (in_pred[c]) ++covered;
  sym_diff += support_cells - covered;

  VerificationResult result;
  result.name = "partial_ot_marginal";
  result.observed = static_cast<double>(sym_diff);
  result.expected = 0.0;
  result.tolerance = 0.10 * static_cast<double>(support_cells);
  result.semantics = "symmetric difference with predicted concentric support <= 10% of its cells";
  bool support_ok = static_cast<double>(sym_diff) <= result.tolerance;
  result.details = {{"target_cells", target_cells},
                    {"support_cells", support_cells},
                    {"active_cells", active.size()},
                    {"lp_cost", plan.total_cost}};

  bool enumeration_ok = true;
  if (grid_side <= 6) {
    // All supports of the right cardinality, uniform mass on each.
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> mu(support_cells, 1.0 / static_cast<double>(support_cells));
    std::vector<std::size_t> comb(support_cells);
    std::iota(comb.begin(), comb.end(), 0);
    const std::size_t total = cells.size();
    while (true) {
      CostMatrix sub(support_cells, target_cells);
      for (std::size_t a = 0; a < support_cells; ++a)
        for (std::size_t b = 0; b < target_cells; ++b) sub.at(a, b) = cost.at(comb[a], b);
      best = std::min(best, solve_discrete_ot(mu, g, sub).total_cost);
      // next combination
      std::size_t t = support_cells;
      while (t > 0 && comb[t - 1] == total - support_cells + t - 1) --t;
      if (t == 0) break;
      ++comb[t - 1];
      for (std::size_t s = t; s < support_cells; ++s) comb[s] = comb[s - 1] + 1;
    }
    enumeration_ok = std::abs(plan.total_cost - best) <= 1e-9 * std::max(1.0, best);
    result.details["enumeration_min_cost"] = best;
    result.details["enumeration_match"] = enumeration_ok;
  }

  result.pass = support_ok && enumeration_ok;
  result.runtime_seconds = timer.seconds();
  return result;
}

// Empirical check of the precision bounds under the coordinate
// projection: (a) the query over the maximal fiber respects the
// worst-case bound, (b) at least a q2 fraction of queries respect the
// average-case bound.
inline VerificationResult verify_precision_bound(int n, int m, std::size_t N, double r_U,
                                                 double r_V, std::uint64_t seed,
                                                 double delta = 0.0) {
  if (m >= n) throw std::invalid_argument("verify_precision_bound: require m < n");
  detail::Stopwatch timer;

  const PointCloud X = sample_uniform_ball(n, 1.0, N, seed);
  const LinearMap map =
      coordinate_projection(static_cast<std::size_t>(n), static_cast<std::size_t>(m));
  const PointCloud Y = map.apply(X);
  const EmbeddingPair pair{X, Y};

  if (delta <= 0.0) delta = 0.5 * std::sqrt(std::max(1e-12, 1.0 - r_U * r_U));
  BoundParams params{n, m, 1.0, r_U, r_V, 1.0};
  const double worst = precision_bound_worst(params);
  const AvgBound avg = precision_bound_avg({params, delta});

  // (a) For the coordinate projection the maximal fiber sits over the
  // image origin; the query nearest the data origin is the witness.
  std::size_t witness = 0;
  for (std::size_t i = 1; i < N; ++i)
    if (X.norm(i) < X.norm(witness)) witness = i;
  const auto witness_prec = discrete_precision(pair, witness, r_U, r_V);

  std::size_t retrieved_at_witness = 0;
  {
    const double rv2 = r_V * r_V;
    for (std::size_t j = 0; j < N; ++j)
      if (j != witness && Y.squared_dist(witness, j) < rv2) ++retrieved_at_witness;
  }
  const double b = std::min(1.0, worst);
  const double margin =
      3.0 * std::sqrt(b * (1.0 - b) / std::max<std::size_t>(1, retrieved_at_witness));
  const bool pass_a = !witness_prec || *witness_prec <= worst + margin;

  // (b) Fraction of defined queries below the average-case bound.
  std::size_t defined = 0, below = 0;
  {
    const double ru2 = r_U * r_U;
    const double rv2 = r_V * r_V;
    for (std::size_t i = 0; i < N; ++i) {
      std::size_t retrieved = 0, hit = 0;
      for (std::size_t j = 0; j < N; ++j) {
        if (j == i) continue;
        if (Y.squared_dist(i, j) < rv2) {
          ++retrieved;
          if (X.squared_dist(i, j) < ru2) ++hit;
        }
      }
      if (retrieved == 0) continue;
      ++defined;
      if (static_cast<double>(hit) / static_cast<double>(retrieved) <= avg.bound) ++below;
    }
  }
  const double fraction =
      defined > 0 ? static_cast<double>(below) / static_cast<double>(defined) : 1.0;
  const double sigma = std::sqrt(avg.q * (1.0 - avg.q) / static_cast<double>(std::max<std::size_t>(1, defined)));
  const bool pass_b = fraction >= avg.q - 3.0 * sigma;

  VerificationResult result;
  result.name = "precision_bound";
  result.observed = fraction;
  result.expected = avg.q;
  result.tolerance = 3.0 * sigma;
  result.semantics =
      "witness precision <= worst bound + MC margin; fraction below avg bound >= q2 - tolerance";
  result.pass = pass_a && pass_b;
  result.details = {{"worst_bound", worst},
                    {"avg_bound", avg.bound},
                    {"q2", avg.q},
                    {"delta", delta},
                    {"witness_index", witness},
                    {"witness_precision", witness_prec ? nlohmann::json(*witness_prec)
                                                       : nlohmann::json(nullptr)},
                    {"witness_margin", margin},
                    {"defined_queries", defined}};
  result.runtime_seconds = timer.seconds();
  return result;
}

}  // namespace dra
