// Acceptance gate: one line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "dra/bounds.hpp"
#include "dra/experiments.hpp"
#include "dra/geometry.hpp"
#include "dra/measures.hpp"
#include "dra/rng.hpp"
#include "dra/synth.hpp"
#include "dra/transport.hpp"

namespace {

int failures = 0;

void report(int index, const std::string& name, bool pass, double seconds) {
  std::printf("%s  criterion %d: %s (%.1f s)\n", pass ? "PASS" : "FAIL", index, name.c_str(),
              seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

template <class F>
void run(int index, const std::string& name, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  bool pass = false;
  try {
    pass = body();
  } catch (const std::exception& e) {
    std::printf("      exception: %s\n", e.what());
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(index, name, pass, seconds);
}

bool volumes() {
  const double pi = 3.1415926535897932384626433832795;
  bool ok = std::abs(dra::unit_ball_volume(1) - 2.0) <= 2.0 * 1e-12 &&
            std::abs(dra::unit_ball_volume(2) - pi) <= pi * 1e-12 &&
            std::abs(dra::unit_ball_volume(3) - 4.0 * pi / 3.0) <= 4.0 * pi / 3.0 * 1e-12;
  for (int n = 1; n <= 20 && ok; ++n) {
    const std::vector<double> p(static_cast<std::size_t>(n), 2.0);
    const double v = dra::unit_ball_volume(n);
    ok = std::abs(dra::generalized_ball_volume(p) - v) <= v * 1e-10;
  }
  return ok;
}

bool d_factor_identities() {
  bool ok = dra::d_factor(4, 4) == 1.0 && dra::d_factor(9, 9) == 1.0 &&
            std::abs(dra::d_factor(10, 2) - 0.2) <= 0.2 * 1e-12;
  for (int m = 1; m <= 3 && ok; ++m)
    for (int n = m + 1; n <= 60 && ok; ++n) ok = dra::d_factor(n, m) < dra::d_factor(n - 1, m);
  return ok;
}

bool ot_correctness() {
  dra::Rng rng(11);
  // Assignment vs 7! enumeration.
  for (int t = 0; t < 100; ++t) {
    dra::CostMatrix cost(7, 7);
    for (double& v : cost.entries) v = rng.uniform(0.0, 10.0);
    std::vector<std::size_t> perm(7);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
      double c = 0.0;
      for (std::size_t i = 0; i < 7; ++i) c += cost.at(i, perm[i]);
      best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (std::abs(dra::solve_assignment(cost).total_cost - best) > 1e-9) return false;
  }

  // Network simplex vs the 1-D quantile formula.
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.below(20));
    const std::size_t m = 2 + static_cast<std::size_t>(rng.below(20));
    std::vector<double> a(n), b(m), mu(n), nu(m);
    for (double& v : a) v = rng.uniform(-3.0, 3.0);
    for (double& v : b) v = rng.uniform(-3.0, 3.0);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double sm = 0.0, sn = 0.0;
    for (double& v : mu) sm += (v = rng.uniform(0.1, 1.0));
    for (double& v : nu) sn += (v = rng.uniform(0.1, 1.0));
    for (double& v : mu) v /= sm;
    for (double& v : nu) v /= sn;
    dra::CostMatrix cost(n, m);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) cost.at(i, j) = (a[i] - b[j]) * (a[i] - b[j]);
    const double w = dra::w2_1d(a, b, mu, nu);
    if (std::abs(dra::solve_discrete_ot(mu, nu, cost).total_cost - w * w) > 1e-9) return false;
  }

  // Sinkhorn within 1% at epsilon = 1e-3 x median cost, N = 64.
  const auto A = dra::sample_uniform_ball(3, 1.0, 64, 1);
  const auto B = dra::sample_uniform_ball(3, 1.0, 64, 2);
  const auto cost = dra::cost_matrix(A, B);
  const std::vector<double> u(64, 1.0 / 64.0);
  const double exact = dra::solve_discrete_ot(u, u, cost).total_cost;
  const auto approx = dra::sinkhorn(u, u, cost, 1e-3 * cost.median_nonzero());
  return std::abs(approx.total_cost - exact) <= 0.01 * exact;
}

}  // namespace

int main() {
  run(1, "volume/gamma suite", volumes);
  run(2, "d_factor identities", d_factor_identities);
  run(3, "OT correctness", ot_correctness);

  run(4, "concentric-ball transport map recovered empirically", [] {
    const auto r = dra::verify_concentric_ball(2, 0.5, 1.0, 2000, 2024);
    return r.pass;
  });

  run(5, "iso-Wasserstein minimality of concentric sets", [] {
    const auto r = dra::verify_iso_wasserstein(32, 4, 100, 200, 2024);
    return r.pass && r.details.at("wins").get<std::size_t>() == 200;
  });

  run(6, "partial-OT optimal marginal law", [] {
    const auto small = dra::verify_partial_ot_marginal(5, 5, 2024);
    const auto large = dra::verify_partial_ot_marginal(20, 20, 2024);
    return small.pass && small.details.at("enumeration_match").get<bool>() && large.pass;
  });

  run(7, "worst- and average-case precision bounds respected", [] {
    const auto X = dra::sample_uniform_ball(10, 1.0, 10000, 2024);
    const double ru = dra::calibrate_r_u(X, 500);
    const double rv = dra::optimal_rv(10, 2, 1.0, ru, 1.0);
    const auto r = dra::verify_precision_bound(10, 2, 10000, ru, rv, 2024);
    return r.pass;
  });

  run(8, "tradeoff simulation, rv_star near the f-0.3 optimum", [] {
    dra::SimulationConfig config;
    config.n = 10;
    config.N = 3000;
    config.seed = 2024;
    config.k_target = 150;  // the 500-neighbor rule scaled from N = 10^4
    const auto table = dra::simulate_tradeoff(config);
    int good = 0;
    for (int m = 1; m <= 9; ++m) {
      double star_f = 0.0, best_f = 0.0;
      for (const auto& row : table) {
        if (row.m != m) continue;
        if (row.is_rv_star) star_f = row.f_beta;
        best_f = std::max(best_f, row.f_beta);
      }
      if (best_f > 0.0 && star_f >= 0.85 * best_f) ++good;
    }
    std::printf("      rv_star within 15%% of grid-best f-0.3 for %d of 9 m values\n", good);
    return good >= 7;
  });

  run(9, "identity-embedding audit invariants", [] {
    dra::Rng rng(2024);
    dra::PointCloud X(500, 4), Y(500, 3);
    for (std::size_t i = 0; i < 500; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        const double v = rng.uniform(-1.0, 1.0);
        X.at(i, j) = v;
        Y.at(i, j) = v;
      }
      X.at(i, 3) = 0.0;  // the data sits in a 3-flat; projection is an isometry
    }
    dra::AuditConfig config;
    config.k = 30;
    config.r_U = 0.5;
    config.r_V = 0.5;
    const auto report = dra::audit({X, Y}, config);
    for (const auto& q : report.per_query) {
      if (!q.w2_many_to_one || *q.w2_many_to_one > 1e-9) return false;
      if (!q.w2_discontinuity || *q.w2_discontinuity > 1e-9) return false;
      if (q.precision && q.recall && *q.precision != *q.recall) return false;
    }
    return true;
  });

  return failures == 0 ? 0 : 1;
}
