#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dra/bounds.hpp"
#include "dra/quadrature.hpp"
#include "dra/rng.hpp"

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;
}

TEST_CASE("d_factor identities") {
  CHECK(dra::d_factor(4, 4) == 1.0);
  CHECK(dra::d_factor(7, 7) == 1.0);
  CHECK_THAT(dra::d_factor(2, 1), Catch::Matchers::WithinRel(kPi / 4.0, 1e-12));
  CHECK_THAT(dra::d_factor(10, 2), Catch::Matchers::WithinRel(0.2, 1e-12));
  CHECK_THAT(dra::d_factor(3, 1), Catch::Matchers::WithinRel(2.0 / 3.0, 1e-12));
  CHECK_THROWS_AS(dra::d_factor(2, 3), std::invalid_argument);
  CHECK_THROWS_AS(dra::d_factor(0, 0), std::invalid_argument);
}

TEST_CASE("d_factor monotone decreasing in n") {
  for (int m = 1; m <= 3; ++m)
    for (int n = m + 1; n <= 60; ++n)
      CHECK(dra::d_factor(n, m) < dra::d_factor(n - 1, m));
}

TEST_CASE("worst-case precision bound") {
  CHECK_THAT(dra::precision_bound_worst({3, 1, 1.0, 0.1, 0.2, 1.0}),
             Catch::Matchers::WithinRel((2.0 / 3.0) * 0.01 * 0.5, 1e-12));
  CHECK_THAT(dra::precision_bound_worst({10, 2, 1.0, 0.3, 0.3, 1.0}),
             Catch::Matchers::WithinRel(0.2 * std::pow(0.3, 8), 1e-12));
  CHECK_THROWS_AS(dra::precision_bound_worst({3, 3, 1.0, 0.1, 0.2, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(dra::precision_bound_worst({3, 1, 1.0, 1.5, 0.2, 1.0}),
                  std::invalid_argument);
}

TEST_CASE("p-norm bound and factorization") {
  CHECK_THAT(dra::precision_bound_pnorm({3, 1, 1.0, 0.1, 0.2, 1.0}),
             Catch::Matchers::WithinRel(0.01 * 0.5, 1e-12));
  CHECK_THAT(dra::precision_bound_pnorm({10, 2, 2.0, 0.2, 0.4, 2.0}),
             Catch::Matchers::WithinRel(1e-8, 1e-9));

  // worst = d_factor * pnorm, on random parameter draws.
  dra::Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + static_cast<int>(rng.below(12));
    const int m = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
    const double R = rng.uniform(0.5, 3.0);
    dra::BoundParams p{n, m, R, rng.uniform(0.01, 0.99) * R, rng.uniform(0.01, 2.0),
                       rng.uniform(0.2, 5.0)};
    CHECK_THAT(dra::precision_bound_worst(p),
               Catch::Matchers::WithinRel(dra::d_factor(n, m) * dra::precision_bound_pnorm(p),
                                          1e-10));
  }
}

TEST_CASE("q2 values") {
  // n=2, m=1, effective radius 0.8: q2 = 2 (0.8 * 0.6 + arcsin 0.8) / pi.
  // Pick r_U, delta with r_U^2 + delta^2 = 1 - 0.64.
  const double ru = 0.5;
  const double delta = std::sqrt(1.0 - 0.64 - ru * ru);
  dra::AvgCaseParams p{{2, 1, 1.0, ru, 0.3, 1.0}, delta};
  REQUIRE_THAT(p.effective_radius(), Catch::Matchers::WithinAbs(0.8, 1e-12));
  const double expected = 2.0 * (0.8 * 0.6 + std::asin(0.8)) / kPi;
  CHECK_THAT(dra::q_linear(p, dra::FiberKind::kBallProjection),
             Catch::Matchers::WithinAbs(expected, 1e-7));

  // Effective radius -> R gives q2 -> 1.
  dra::AvgCaseParams tight{{6, 2, 1.0, 1e-6, 0.3, 1.0}, 1e-6};
  CHECK_THAT(dra::q_linear(tight, dra::FiberKind::kBallProjection),
             Catch::Matchers::WithinAbs(1.0, 1e-6));

  // Effective radius ~ 0 gives q2 ~ 0 (q2 scales linearly with the radius).
  const double ru0 = 0.6;
  const double d0 = std::sqrt(1.0 - ru0 * ru0) * (1.0 - 1e-9);
  dra::AvgCaseParams zero{{3, 1, 1.0, ru0, 0.3, 1.0}, d0};
  CHECK(dra::q_linear(zero, dra::FiberKind::kBallProjection) < 1e-3);
}

TEST_CASE("q2 Monte Carlo consistency") {
  // q2 is the probability that a uniform point of B^n_R projects inside
  // the effective-radius ball of the coordinate projection.
  const dra::AvgCaseParams p{{5, 2, 1.0, 0.4, 0.3, 1.0}, 0.3};
  const double re = p.effective_radius();
  const auto cloud = dra::sample_uniform_ball(5, 1.0, 200000, 77);
  std::size_t inside = 0;
  for (std::size_t i = 0; i < cloud.count(); ++i) {
    const double r2 = cloud.at(i, 0) * cloud.at(i, 0) + cloud.at(i, 1) * cloud.at(i, 1);
    if (r2 < re * re) ++inside;
  }
  const double mc = static_cast<double>(inside) / static_cast<double>(cloud.count());
  const double q2 = dra::q_linear(p, dra::FiberKind::kBallProjection);
  CHECK_THAT(q2, Catch::Matchers::WithinAbs(mc, 4.0 * std::sqrt(mc * (1.0 - mc) / 200000.0)));
}

TEST_CASE("q2 monotone in effective radius and bounded") {
  double prev = -1.0;
  for (double delta = 0.85; delta >= 0.1; delta -= 0.05) {
    dra::AvgCaseParams p{{4, 1, 1.0, 0.3, 0.3, 1.0}, delta};
    const double q = dra::q_linear(p, dra::FiberKind::kBallProjection);
    CHECK(q >= 0.0);
    CHECK(q <= 1.0);
    CHECK(q >= prev);  // smaller delta -> larger effective radius
    prev = q;
  }
}

TEST_CASE("q1 sphere lift evaluates and stays in range") {
  dra::AvgCaseParams p{{3, 1, 1.0, 0.2, 0.3, 1.0}, 0.2};
  const double q1 = dra::q_linear(p, dra::FiberKind::kSphereLift);
  CHECK(q1 >= 0.0);
  CHECK(q1 <= 1.0);
}

TEST_CASE("average-case bound") {
  dra::AvgCaseParams p{{10, 2, 1.0, 0.3, 0.3, 1.0}, 0.3};
  const auto avg = dra::precision_bound_avg(p);
  CHECK_THAT(avg.bound, Catch::Matchers::WithinRel(0.0125, 1e-10));
  CHECK(avg.q > 0.0);
  CHECK(avg.q < 1.0);

  // delta -> 0 recovers D r_U^m / (r_V/L)^m.
  dra::AvgCaseParams small{{10, 2, 1.0, 0.3, 0.3, 1.0}, 1e-9};
  CHECK_THAT(dra::precision_bound_avg(small).bound, Catch::Matchers::WithinRel(0.2, 1e-6));

  CHECK_THROWS_AS(dra::precision_bound_avg({{10, 2, 1.0, 0.3, 0.3, 1.0}, 1.0}),
                  std::invalid_argument);
}

TEST_CASE("w2 lower bound") {
  // n=10, m=2: r = 5^{1/10} 0.1^{1/5}.
  const double r = std::pow(5.0, 0.1) * std::pow(0.1, 0.2);
  const double expected = (10.0 / 12.0) * (r - 0.05) * (r - 0.05);
  CHECK_THAT(dra::w2_lower_bound({10, 2, 1.0, 0.05, 0.1, 1.0}),
             Catch::Matchers::WithinRel(expected, 1e-10));
  CHECK_THAT(expected, Catch::Matchers::WithinAbs(0.398, 0.002));

  // r < r_U: bound switched off.
  const double rv_star = dra::optimal_rv(10, 2, 1.0, 0.5, 1.0);
  CHECK(dra::w2_lower_bound({10, 2, 1.0, 0.5, 0.5 * rv_star, 1.0}) == 0.0);
}

TEST_CASE("w2 lower bound monotonicity") {
  // Nondecreasing in r_V, nonincreasing in r_U, on the active region.
  double prev = 0.0;
  for (double rv = 0.2; rv <= 1.2; rv += 0.05) {
    const double b = dra::w2_lower_bound({8, 2, 1.0, 0.05, rv, 1.0});
    CHECK(b >= prev);
    prev = b;
  }
  prev = 1e9;
  for (double ru = 0.02; ru <= 0.3; ru += 0.02) {
    const double b = dra::w2_lower_bound({8, 2, 1.0, ru, 0.8, 1.0});
    CHECK(b <= prev);
    prev = b;
  }
}

TEST_CASE("optimal r_V") {
  CHECK_THAT(dra::optimal_rv(2, 1, 1.0, 0.5, 1.0),
             Catch::Matchers::WithinRel(kPi / 4.0 * 0.25, 1e-12));
  CHECK_THAT(dra::optimal_rv(2, 1, 1.0, 0.5, 2.0),
             Catch::Matchers::WithinRel(2.0 * dra::optimal_rv(2, 1, 1.0, 0.5, 1.0), 1e-12));

  // Boundary root: zero at rv_star, positive just above.
  for (int n = 3; n <= 12; n += 3) {
    const double rv = dra::optimal_rv(n, 2, 1.0, 0.2, 1.0);
    CHECK(dra::w2_lower_bound({n, 2, 1.0, 0.2, rv, 1.0}) <= 1e-15);
    CHECK(dra::w2_lower_bound({n, 2, 1.0, 0.2, rv * (1.0 + 1e-6), 1.0}) > 0.0);
  }
}

TEST_CASE("optimal r_V grid search") {
  const double rv_star = dra::optimal_rv(5, 2, 1.0, 0.3, 1.0);
  std::vector<double> grid;
  for (int t = -5; t <= 5; ++t) grid.push_back(rv_star * (1.0 + 0.1 * t));
  // Largest zero-bound grid point wins; that is the one at rv_star itself.
  CHECK_THAT(dra::optimal_rv_grid(5, 2, 1.0, 0.3, 1.0, grid),
             Catch::Matchers::WithinRel(rv_star, 1e-12));
  CHECK_THROWS_AS(dra::optimal_rv_grid(5, 2, 1.0, 0.3, 1.0, {}), std::invalid_argument);
}

TEST_CASE("concentric ball W2") {
  CHECK(dra::concentric_ball_w2(3, 1.0, 1.0) == 0.0);
  CHECK_THAT(dra::concentric_ball_w2(2, 1.0, 2.0),
             Catch::Matchers::WithinRel(std::sqrt(0.5), 1e-12));
  CHECK_THAT(dra::concentric_ball_w2(10, 0.0, 1.0),
             Catch::Matchers::WithinRel(std::sqrt(10.0 / 12.0), 1e-12));
  CHECK_THROWS_AS(dra::concentric_ball_w2(2, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("quadrature") {
  CHECK_THAT(dra::integrate([](double x) { return x * x; }, 0.0, 1.0),
             Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-10));
  CHECK_THAT(dra::integrate([](double x) { return std::sin(x); }, 0.0, kPi),
             Catch::Matchers::WithinAbs(2.0, 1e-8));
  CHECK(dra::integrate([](double x) { return x; }, 2.0, 2.0) == 0.0);
  // Orientation flips the sign.
  CHECK_THAT(dra::integrate([](double x) { return x; }, 1.0, 0.0),
             Catch::Matchers::WithinAbs(-0.5, 1e-10));
}
