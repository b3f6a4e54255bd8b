#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "dra/point_cloud.hpp"

namespace dra {

struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CostMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> entries;  // row-major

  CostMatrix() = default;
  CostMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), entries(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return entries[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }

  double max_entry() const {
    double m = 0.0;
    for (double v : entries) m = std::max(m, v);
    return m;
  }

  // Median of the nonzero entries; 0 if all entries are zero.
  double median_nonzero() const {
    std::vector<double> nz;
    nz.reserve(entries.size());
    for (double v : entries)
      if (v > 0.0) nz.push_back(v);
    if (nz.empty()) return 0.0;
    const std::size_t mid = nz.size() / 2;
    std::nth_element(nz.begin(), nz.begin() + static_cast<std::ptrdiff_t>(mid), nz.end());
    return nz[mid];
  }
};

// Pairwise squared Euclidean distances.
inline CostMatrix cost_matrix(const PointCloud& A, const PointCloud& B) {
  if (A.dim != B.dim) throw std::invalid_argument("cost_matrix: dimension mismatch");
  if (A.count() == 0 || B.count() == 0)
    throw std::invalid_argument("cost_matrix: empty support");
  CostMatrix c(A.count(), B.count());
  for (std::size_t i = 0; i < A.count(); ++i) {
    const double* a = A.point(i);
    for (std::size_t j = 0; j < B.count(); ++j) {
      const double* b = B.point(j);
      double s = 0.0;
      for (std::size_t k = 0; k < A.dim; ++k) {
        const double d = a[k] - b[k];
        s += d * d;
      }
      c.at(i, j) = s;
    }
  }
  return c;
}

struct TransportPlan {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> mass;  // row-major coupling
  std::vector<double> source_marginal;
  std::vector<double> target_marginal;
  double total_cost = 0.0;
  std::size_t iterations = 0;
  bool converged = true;

  double at(std::size_t i, std::size_t j) const { return mass[i * cols + j]; }

  std::vector<double> row_sums() const {
    std::vector<double> r(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) r[i] += mass[i * cols + j];
    return r;
  }

  std::vector<double> col_sums() const {
    std::vector<double> c(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) c[j] += mass[i * cols + j];
    return c;
  }

  // Marginal and cost-consistency invariants. Partial plans only need
  // their row/column sums dominated by the marginals.
  void validate(const CostMatrix& cost, bool partial = false, double tol = 1e-9) const {
    if (rows != cost.rows || cols != cost.cols)
      throw std::logic_error("TransportPlan: shape mismatch with cost");
    const auto rs = row_sums();
    const auto cs = col_sums();
    for (std::size_t i = 0; i < rows; ++i) {
      const double diff = rs[i] - source_marginal[i];
      if (partial ? diff > tol : std::abs(diff) > tol)
        throw std::logic_error("TransportPlan: row marginal violated");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      const double diff = cs[j] - target_marginal[j];
      if (partial ? diff > tol : std::abs(diff) > tol)
        throw std::logic_error("TransportPlan: column marginal violated");
    }
    double c = 0.0;
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) c += mass[i * cols + j] * cost.at(i, j);
    const double scale = std::max(1.0, std::abs(total_cost));
    if (std::abs(c - total_cost) > tol * scale)
      throw std::logic_error("TransportPlan: total_cost inconsistent with mass");
  }

  void write_csv(std::ostream& out) const {
    out << "i,j,mass\n";
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j)
        if (mass[i * cols + j] > 0.0)
          out << i << ',' << j << ',' << detail::format_value(mass[i * cols + j]) << '\n';
  }
};

struct Assignment {
  std::vector<std::size_t> col_of_row;
  double total_cost = 0.0;
};

// Exact minimum-cost perfect matching (shortest augmenting paths with
// dual potentials, O(N^3)). Uniform-marginal OT is attained at a
// permutation, so this doubles as the W2 solver for equal-size uniform
// supports.
inline Assignment solve_assignment(const CostMatrix& cost) {
  if (cost.rows != cost.cols)
    throw std::invalid_argument("solve_assignment: cost matrix must be square");
  const std::size_t n = cost.rows;
  if (n == 0) throw std::invalid_argument("solve_assignment: empty support");
  const double kInf = std::numeric_limits<double>::infinity();

  // 1-based arrays; p[j] = row matched to column j.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1, 0);

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost.at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment out;
  out.col_of_row.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) out.col_of_row[p[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i) out.total_cost += cost.at(i, out.col_of_row[i]);
  return out;
}

namespace detail {

// Transportation network simplex on the dense bipartite graph.
// Basis = spanning tree over sources + sinks; NW-corner start.
class TransportSimplex {
 public:
  TransportSimplex(const std::vector<double>& mu, const std::vector<double>& nu,
                   const CostMatrix& cost)
      : mu_(mu), nu_(nu), cost_(cost), ns_(mu.size()), nt_(nu.size()) {}

  void solve() {
    init_northwest();
    const double scale = std::max(1.0, cost_.max_entry());
    const double tol = 1e-13 * scale;
    const std::size_t bland_after = 200 * (ns_ + nt_);
    const std::size_t hard_cap = 2000 * (ns_ + nt_) + 100000;
    std::size_t pivots = 0;
    while (true) {
      compute_potentials();
      const auto entering = find_entering(tol, pivots >= bland_after);
      if (!entering.first) break;
      pivot(entering.second.first, entering.second.second);
      if (++pivots > hard_cap)
        throw std::runtime_error("network simplex: pivot cap exceeded");
    }
  }

  // Flow on basic arcs, exported densely.
  void fill_plan(TransportPlan& plan) const {
    plan.mass.assign(ns_ * nt_, 0.0);
    for (const Arc& a : basis_)
      if (a.alive) plan.mass[a.i * nt_ + a.j] += a.flow;
  }

 private:
  struct Arc {
    std::size_t i, j;
    double flow;
    bool alive;
  };

  void init_northwest() {
    std::vector<double> supply = mu_;
    std::vector<double> demand = nu_;
    std::size_t i = 0, j = 0;
    // One arc per step, one index advanced per step: ns + nt - 1 basic
    // arcs, zero-flow arcs included on ties so the basis stays a tree.
    while (true) {
      const double s = supply[i];
      const double d = demand[j];
      basis_.push_back({i, j, std::min(s, d), true});
      if (i + 1 == ns_ && j + 1 == nt_) break;
      const bool advance_row = (i + 1 < ns_) && (s <= d || j + 1 == nt_);
      if (advance_row) {
        demand[j] = std::max(0.0, d - s);
        supply[i] = 0.0;
        ++i;
      } else {
        supply[i] = std::max(0.0, s - d);
        demand[j] = 0.0;
        ++j;
      }
    }
  }

  void rebuild_adjacency() {
    adj_.assign(ns_ + nt_, {});
    for (std::size_t a = 0; a < basis_.size(); ++a) {
      if (!basis_[a].alive) continue;
      adj_[basis_[a].i].push_back(a);
      adj_[ns_ + basis_[a].j].push_back(a);
    }
  }

  void compute_potentials() {
    rebuild_adjacency();
    u_.assign(ns_, 0.0);
    v_.assign(nt_, 0.0);
    std::vector<char> seen(ns_ + nt_, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      for (std::size_t a : adj_[node]) {
        const Arc& arc = basis_[a];
        const std::size_t other = (node == arc.i) ? ns_ + arc.j : arc.i;
        if (seen[other]) continue;
        seen[other] = 1;
        if (other >= ns_)
          v_[other - ns_] = cost_.at(arc.i, arc.j) - u_[arc.i];
        else
          u_[other] = cost_.at(arc.i, arc.j) - v_[arc.j];
        stack.push_back(other);
      }
    }
  }

  std::pair<bool, std::pair<std::size_t, std::size_t>> find_entering(double tol,
                                                                     bool bland) const {
    double best = -tol;
    std::pair<std::size_t, std::size_t> pick{0, 0};
    bool found = false;
    for (std::size_t i = 0; i < ns_; ++i) {
      for (std::size_t j = 0; j < nt_; ++j) {
        const double rc = cost_.at(i, j) - u_[i] - v_[j];
        if (rc < best) {
          best = rc;
          pick = {i, j};
          found = true;
          if (bland) return {true, pick};
        }
      }
    }
    return {found, pick};
  }

  // Tree path from sink j to source i, as a sequence of basis arc ids.
  std::vector<std::size_t> tree_path(std::size_t from, std::size_t to) const {
    std::vector<std::size_t> parent_arc(ns_ + nt_, SIZE_MAX);
    std::vector<std::size_t> parent(ns_ + nt_, SIZE_MAX);
    std::vector<char> seen(ns_ + nt_, 0);
    std::vector<std::size_t> stack{from};
    seen[from] = 1;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      if (node == to) break;
      for (std::size_t a : adj_[node]) {
        const Arc& arc = basis_[a];
        const std::size_t other = (node == arc.i) ? ns_ + arc.j : arc.i;
        if (seen[other]) continue;
        seen[other] = 1;
        parent[other] = node;
        parent_arc[other] = a;
        stack.push_back(other);
      }
    }
    std::vector<std::size_t> path;
    for (std::size_t node = to; node != from; node = parent[node]) {
      if (parent_arc[node] == SIZE_MAX)
        throw std::logic_error("network simplex: basis not a spanning tree");
      path.push_back(parent_arc[node]);
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  void pivot(std::size_t ei, std::size_t ej) {
    // Cycle: entering arc (+theta), then the tree path from sink ej back
    // to source ei with alternating signs starting at -theta.
    const auto path = tree_path(ns_ + ej, ei);
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave = SIZE_MAX;
    for (std::size_t t = 0; t < path.size(); t += 2) {
      if (basis_[path[t]].flow < theta) {
        theta = basis_[path[t]].flow;
        leave = path[t];
      }
    }
    if (leave == SIZE_MAX) throw std::logic_error("network simplex: no leaving arc");
    for (std::size_t t = 0; t < path.size(); ++t) {
      if (t % 2 == 0)
        basis_[path[t]].flow -= theta;
      else
        basis_[path[t]].flow += theta;
    }
    basis_[leave].alive = false;
    basis_.push_back({ei, ej, theta, true});
    compact();
  }

  void compact() {
    std::size_t w = 0;
    for (std::size_t r = 0; r < basis_.size(); ++r)
      if (basis_[r].alive) basis_[w++] = basis_[r];
    basis_.resize(w);
  }

  const std::vector<double>& mu_;
  const std::vector<double>& nu_;
  const CostMatrix& cost_;
  std::size_t ns_, nt_;
  std::vector<Arc> basis_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<double> u_, v_;
};

}  // namespace detail

inline constexpr std::size_t kExactSupportLimit = 512;

// Exact balanced discrete OT via network simplex.
inline TransportPlan solve_discrete_ot(const std::vector<double>& mu,
                                       const std::vector<double>& nu, const CostMatrix& cost,
                                       std::size_t support_limit = kExactSupportLimit) {
  if (mu.empty() || nu.empty()) throw std::invalid_argument("solve_discrete_ot: empty support");
  if (mu.size() != cost.rows || nu.size() != cost.cols)
    throw std::invalid_argument("solve_discrete_ot: marginal/cost shape mismatch");
  if (mu.size() > support_limit || nu.size() > support_limit)
    throw CapacityError("solve_discrete_ot: support exceeds exact-solver limit");
  for (double w : mu)
    if (w < 0.0) throw std::invalid_argument("solve_discrete_ot: negative weight");
  for (double w : nu)
    if (w < 0.0) throw std::invalid_argument("solve_discrete_ot: negative weight");
  const double sum_mu = std::accumulate(mu.begin(), mu.end(), 0.0);
  const double sum_nu = std::accumulate(nu.begin(), nu.end(), 0.0);
  if (std::abs(sum_mu - sum_nu) > 1e-9 * std::max(1.0, std::abs(sum_mu)))
    throw std::invalid_argument("solve_discrete_ot: unbalanced masses");

  detail::TransportSimplex simplex(mu, nu, cost);
  simplex.solve();

  TransportPlan plan;
  plan.rows = cost.rows;
  plan.cols = cost.cols;
  plan.source_marginal = mu;
  plan.target_marginal = nu;
  simplex.fill_plan(plan);
  plan.total_cost = 0.0;
  for (std::size_t i = 0; i < plan.rows; ++i)
    for (std::size_t j = 0; j < plan.cols; ++j)
      plan.total_cost += plan.mass[i * plan.cols + j] * cost.at(i, j);
  plan.validate(cost);
  return plan;
}

// Entropic-regularized OT, log-domain throughout with epsilon scaling.
// Stops when the L1 marginal violation drops below 1e-6 or max_iter is
// reached; the plan reports iterations and convergence either way.
inline TransportPlan sinkhorn(const std::vector<double>& mu, const std::vector<double>& nu,
                              const CostMatrix& cost, double epsilon,
                              std::size_t max_iter = 100000) {
  if (mu.empty() || nu.empty()) throw std::invalid_argument("sinkhorn: empty support");
  if (!(epsilon > 0.0)) throw std::invalid_argument("sinkhorn: epsilon must be positive");
  if (mu.size() != cost.rows || nu.size() != cost.cols)
    throw std::invalid_argument("sinkhorn: marginal/cost shape mismatch");
  const double sum_mu = std::accumulate(mu.begin(), mu.end(), 0.0);
  const double sum_nu = std::accumulate(nu.begin(), nu.end(), 0.0);
  if (std::abs(sum_mu - sum_nu) > 1e-9 * std::max(1.0, std::abs(sum_mu)))
    throw std::invalid_argument("sinkhorn: unbalanced masses");

  const std::size_t ns = mu.size(), nt = nu.size();
  std::vector<double> log_mu(ns), log_nu(nt);
  for (std::size_t i = 0; i < ns; ++i)
    log_mu[i] = mu[i] > 0.0 ? std::log(mu[i]) : -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < nt; ++j)
    log_nu[j] = nu[j] > 0.0 ? std::log(nu[j]) : -std::numeric_limits<double>::infinity();

  std::vector<double> f(ns, 0.0), g(nt, 0.0);
  const double marginal_tol = 1e-6;
  std::size_t iters = 0;
  bool converged = false;

  auto lse_over_cols = [&](std::size_t i, double eps) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nt; ++j)
      m = std::max(m, (g[j] - cost.at(i, j)) / eps);
    if (m == -std::numeric_limits<double>::infinity()) return m;
    double s = 0.0;
    for (std::size_t j = 0; j < nt; ++j) s += std::exp((g[j] - cost.at(i, j)) / eps - m);
    return m + std::log(s);
  };
  auto lse_over_rows = [&](std::size_t j, double eps) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ns; ++i)
      m = std::max(m, (f[i] - cost.at(i, j)) / eps);
    if (m == -std::numeric_limits<double>::infinity()) return m;
    double s = 0.0;
    for (std::size_t i = 0; i < ns; ++i) s += std::exp((f[i] - cost.at(i, j)) / eps - m);
    return m + std::log(s);
  };

  // Anneal from a coarse epsilon down to the requested one.
  std::vector<double> schedule;
  double eps = std::max(epsilon, cost.max_entry() * 0.5);
  while (eps > epsilon * 1.5) {
    schedule.push_back(eps);
    eps *= 0.5;
  }
  schedule.push_back(epsilon);

  for (double cur_eps : schedule) {
    const bool last = (cur_eps == schedule.back());
    while (iters < max_iter) {
      ++iters;
      for (std::size_t i = 0; i < ns; ++i)
        f[i] = mu[i] > 0.0 ? cur_eps * (log_mu[i] - lse_over_cols(i, cur_eps))
                           : -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < nt; ++j)
        g[j] = nu[j] > 0.0 ? cur_eps * (log_nu[j] - lse_over_rows(j, cur_eps))
                           : -std::numeric_limits<double>::infinity();
      // Column marginals are exact after the g-update; check the rows.
      double violation = 0.0;
      for (std::size_t i = 0; i < ns; ++i) {
        if (mu[i] <= 0.0) continue;
        double row = 0.0;
        for (std::size_t j = 0; j < nt; ++j)
          row += std::exp((f[i] + g[j] - cost.at(i, j)) / cur_eps);
        violation += std::abs(row - mu[i]);
      }
      if (violation < marginal_tol) {
        if (last) converged = true;
        break;
      }
      if (!last && violation < 1e-3) break;  // good enough to warm-start the next level
    }
  }

  TransportPlan plan;
  plan.rows = ns;
  plan.cols = nt;
  plan.source_marginal = mu;
  plan.target_marginal = nu;
  plan.mass.assign(ns * nt, 0.0);
  plan.total_cost = 0.0;
  for (std::size_t i = 0; i < ns; ++i) {
    if (mu[i] <= 0.0) continue;
    for (std::size_t j = 0; j < nt; ++j) {
      if (nu[j] <= 0.0) continue;
      const double p = std::exp((f[i] + g[j] - cost.at(i, j)) / epsilon);
      plan.mass[i * nt + j] = p;
      plan.total_cost += p * cost.at(i, j);
    }
  }
  plan.iterations = iters;
  plan.converged = converged;
  if (!std::isfinite(plan.total_cost))
    throw std::runtime_error("sinkhorn: numeric failure after log-domain solve");
  return plan;
}

// W2 on the line via the quantile formula, merging the two cumulative
// weight ladders in a single pass. Supports must be ascending.
inline double w2_1d(const std::vector<double>& a, const std::vector<double>& b,
                    const std::vector<double>& mu, const std::vector<double>& nu) {
  if (a.empty() || b.empty()) throw std::invalid_argument("w2_1d: empty support");
  if (a.size() != mu.size() || b.size() != nu.size())
    throw std::invalid_argument("w2_1d: support/weight size mismatch");
  if (!std::is_sorted(a.begin(), a.end()) || !std::is_sorted(b.begin(), b.end()))
    throw std::invalid_argument("w2_1d: supports must be sorted ascending");
  const double sum_mu = std::accumulate(mu.begin(), mu.end(), 0.0);
  const double sum_nu = std::accumulate(nu.begin(), nu.end(), 0.0);
  if (sum_mu <= 0.0 || std::abs(sum_mu - sum_nu) > 1e-9 * std::max(1.0, sum_mu))
    throw std::invalid_argument("w2_1d: unbalanced masses");

  double cost = 0.0;
  std::size_t i = 0, j = 0;
  double ri = mu[0] / sum_mu;
  double rj = nu[0] / sum_nu;
  while (i < a.size() && j < b.size()) {
    const double step = std::min(ri, rj);
    const double d = a[i] - b[j];
    cost += step * d * d;
    ri -= step;
    rj -= step;
    if (ri <= 0.0 && ++i < a.size()) ri = mu[i] / sum_mu;
    if (rj <= 0.0 && ++j < b.size()) rj = nu[j] / sum_nu;
  }
  return std::sqrt(std::max(0.0, cost));
}

// Optimal partial transport: move exactly mass M, row sums dominated by
// f, column sums by g. Solved as a balanced problem with one dummy node
// per side; the dummy-dummy arc is priced above every real arc so no
// mass shortcuts through it.
inline TransportPlan solve_partial_ot(const std::vector<double>& f_weights,
                                      const std::vector<double>& g_weights,
                                      const CostMatrix& cost, double M) {
  if (f_weights.empty() || g_weights.empty())
    throw std::invalid_argument("solve_partial_ot: empty support");
  if (f_weights.size() > 400 || g_weights.size() > 400)
    throw CapacityError("solve_partial_ot: dense LP limited to 400 atoms per side");
  const double sum_f = std::accumulate(f_weights.begin(), f_weights.end(), 0.0);
  const double sum_g = std::accumulate(g_weights.begin(), g_weights.end(), 0.0);
  if (M < 0.0 || M > std::min(sum_f, sum_g) + 1e-12)
    throw std::invalid_argument("solve_partial_ot: M outside [0, min(sum f, sum g)]");

  const std::size_t ns = f_weights.size(), nt = g_weights.size();
  TransportPlan plan;
  plan.rows = ns;
  plan.cols = nt;
  plan.source_marginal = f_weights;
  plan.target_marginal = g_weights;
  plan.mass.assign(ns * nt, 0.0);
  plan.total_cost = 0.0;
  if (M == 0.0) {
    plan.validate(cost, /*partial=*/true);
    return plan;
  }

  CostMatrix ext(ns + 1, nt + 1);
  const double big = 2.0 * cost.max_entry() + 1.0;
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = 0; j < nt; ++j) ext.at(i, j) = cost.at(i, j);
  for (std::size_t i = 0; i < ns; ++i) ext.at(i, nt) = 0.0;
  for (std::size_t j = 0; j < nt; ++j) ext.at(ns, j) = 0.0;
  ext.at(ns, nt) = big;

  std::vector<double> mu(f_weights);
  std::vector<double> nu(g_weights);
  // Dummies absorb the unused capacity on the opposite side; the max
  // guards against -epsilon when M saturates a marginal.
  mu.push_back(std::max(0.0, sum_g - M));
  nu.push_back(std::max(0.0, sum_f - M));

  const TransportPlan ext_plan = solve_discrete_ot(mu, nu, ext, /*support_limit=*/401);
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = 0; j < nt; ++j) {
      const double m = ext_plan.at(i, j);
      plan.mass[i * nt + j] = m;
      plan.total_cost += m * cost.at(i, j);
    }
  plan.validate(cost, /*partial=*/true);
  return plan;
}

}  // namespace dra
