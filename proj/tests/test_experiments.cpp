#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dra/experiments.hpp"
#include "dra/plot.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<dra::TradeoffRow> sample_table() {
  std::vector<dra::TradeoffRow> table;
  for (int m : {1, 2}) {
    for (int t = 0; t < 5; ++t) {
      dra::TradeoffRow r;
      r.m = m;
      r.r_V = 0.1 * (t + 1);
      r.precision = 1.0 - 0.15 * t;
      r.recall = 0.2 * (t + 1);
      r.f_beta = dra::f_beta(r.precision, r.recall, 0.3);
      r.is_rv_star = t == 2;
      r.is_fbeta_argmax = t == 3;
      table.push_back(r);
    }
  }
  return table;
}

}  // namespace

TEST_CASE("tradeoff CSV round-trip") {
  const auto table = sample_table();
  std::stringstream ss;
  dra::write_tradeoff_csv(table, ss);
  const auto back = dra::read_tradeoff_csv(ss);
  REQUIRE(back.size() == table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    CHECK(back[i].m == table[i].m);
    CHECK(back[i].r_V == table[i].r_V);
    CHECK(back[i].precision == table[i].precision);
    CHECK(back[i].f_beta == table[i].f_beta);
    CHECK(back[i].is_rv_star == table[i].is_rv_star);
    CHECK(back[i].is_fbeta_argmax == table[i].is_fbeta_argmax);
  }
}

TEST_CASE("plot emission") {
  const auto table = sample_table();
  const std::string path_a = "plot_test_a.svg";
  const std::string path_b = "plot_test_b.svg";
  dra::emit_plot(table, dra::PlotKind::kPrCurve, path_a);
  dra::emit_plot(table, dra::PlotKind::kPrCurve, path_b);
  const std::string a = slurp(path_a);
  CHECK(a == slurp(path_b));  // byte-identical on identical input
  CHECK(a.find("<svg") == 0);
  CHECK(a.find("m = 1") != std::string::npos);
  CHECK(a.find("m = 2") != std::string::npos);
  // Two series, each with one filled rv_star marker and one argmax ring.
  std::size_t circles = 0;
  for (std::size_t p = a.find("<circle"); p != std::string::npos; p = a.find("<circle", p + 1))
    ++circles;
  CHECK(circles == 4);
  std::remove(path_a.c_str());
  std::remove(path_b.c_str());

  CHECK_THROWS_AS(dra::emit_plot({}, dra::PlotKind::kPrCurve, "never_written.svg"),
                  std::invalid_argument);
  std::ifstream never("never_written.svg");
  CHECK_FALSE(never.good());
}

TEST_CASE("simulate_tradeoff small run") {
  dra::SimulationConfig config;
  config.n = 5;
  config.N = 400;
  config.seed = 3;
  config.k_target = 40;
  config.m_list = {2, 4};
  const auto table = dra::simulate_tradeoff(config);

  // 40 grid points + the rv_star row, per m.
  REQUIRE(table.size() == 2 * 41);
  for (int m : {2, 4}) {
    std::size_t stars = 0, argmaxes = 0, rows = 0;
    double prev_rv = 0.0;
    double star_f = -1.0, best_f = -1.0, max_f = 0.0;
    for (const auto& r : table) {
      if (r.m != m) continue;
      ++rows;
      CHECK(r.r_V > prev_rv - 1e-15);  // grid sorted ascending
      prev_rv = r.r_V;
      CHECK(r.precision >= 0.0);
      CHECK(r.precision <= 1.0);
      CHECK(r.recall >= 0.0);
      CHECK(r.recall <= 1.0);
      max_f = std::max(max_f, r.f_beta);
      if (r.is_rv_star) {
        ++stars;
        star_f = r.f_beta;
      }
      if (r.is_fbeta_argmax) {
        ++argmaxes;
        best_f = r.f_beta;
      }
    }
    CHECK(rows == 41);
    CHECK(stars == 1);
    CHECK(argmaxes == 1);
    CHECK(star_f >= 0.0);
    CHECK(best_f == max_f);  // the flagged row carries the grid maximum
  }

  // Determinism.
  const auto again = dra::simulate_tradeoff(config);
  REQUIRE(again.size() == table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    CHECK(again[i].r_V == table[i].r_V);
    CHECK(again[i].precision == table[i].precision);
  }
}

TEST_CASE("simulate_tradeoff recall saturates at large r_V") {
  dra::SimulationConfig config;
  config.n = 4;
  config.N = 200;
  config.seed = 9;
  config.k_target = 20;
  config.m_list = {3};
  config.rv_grid = {0.5, 1.0, 4.0};  // 4 exceeds any image diameter
  const auto table = dra::simulate_tradeoff(config);
  const auto& last = table.back();
  CHECK(last.r_V == 4.0);
  CHECK_THAT(last.recall, Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("simulate_tradeoff smoothed monotonicity") {
  dra::SimulationConfig config;
  config.n = 5;
  config.N = 600;
  config.seed = 12;
  config.k_target = 60;
  config.m_list = {2};
  const auto table = dra::simulate_tradeoff(config);

  // Isotonic check via pool-adjacent-violators residuals: recall fitted
  // nondecreasing and precision nonincreasing in r_V, with small residual.
  auto isotonic_residual = [](std::vector<double> v, bool increasing) {
    if (!increasing) std::reverse(v.begin(), v.end());
    std::vector<double> fit;
    std::vector<double> weight;
    for (double x : v) {
      fit.push_back(x);
      weight.push_back(1.0);
      while (fit.size() > 1 && fit[fit.size() - 2] > fit.back()) {
        const double w = weight[weight.size() - 2] + weight.back();
        const double f =
            (fit[fit.size() - 2] * weight[weight.size() - 2] + fit.back() * weight.back()) / w;
        fit.pop_back();
        weight.pop_back();
        fit.back() = f;
        weight.back() = w;
      }
    }
    // Expand and measure the max deviation from the fitted curve.
    std::vector<double> expanded;
    for (std::size_t b = 0; b < fit.size(); ++b)
      for (int c = 0; c < static_cast<int>(weight[b] + 0.5); ++c) expanded.push_back(fit[b]);
    double worst = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) worst = std::max(worst, std::abs(v[i] - expanded[i]));
    return worst;
  };

  std::vector<double> recall, precision;
  for (const auto& r : table) {
    recall.push_back(r.recall);
    precision.push_back(r.precision);
  }
  CHECK(isotonic_residual(recall, true) < 0.05);
  CHECK(isotonic_residual(precision, false) < 0.1);
}

TEST_CASE("sweep_r_u") {
  dra::SimulationConfig config;
  config.n = 4;
  config.N = 300;
  config.seed = 5;
  config.k_target = 30;
  const auto rows = dra::sweep_r_u(config, 2, {10, 30, 90});
  REQUIRE(rows.size() == 3);
  for (std::size_t t = 1; t < rows.size(); ++t) {
    CHECK(rows[t].r_U > rows[t - 1].r_U);  // r_U monotone in the target
    CHECK(rows[t].rv_star > rows[t - 1].rv_star);
  }
  std::ostringstream os;
  dra::write_ru_sweep_csv(rows, os);
  CHECK(os.str().rfind("k_target,r_U,rv_star,precision,recall,f_beta\n", 0) == 0);
  CHECK_THROWS_AS(dra::sweep_r_u(config, 4, {10}), std::invalid_argument);
}

TEST_CASE("verify_concentric_ball small") {
  // Looser displacement tolerance at this small N; the acceptance run
  // checks the tight one at N = 2000.
  const auto r = dra::verify_concentric_ball(2, 0.5, 1.0, 500, 17, 0.05, 0.25);
  CHECK(r.name == "concentric_ball");
  CHECK(r.pass);
  CHECK(r.runtime_seconds >= 0.0);
  CHECK_THAT(r.expected, Catch::Matchers::WithinRel(std::sqrt(0.5) * 0.5, 1e-12));

  // Identical balls: noise-floor semantics.
  const auto same = dra::verify_concentric_ball(2, 0.8, 0.8, 300, 18);
  CHECK(same.expected == 0.0);
  CHECK(same.pass);

  // Point mass to ball: second-moment closed form.
  const auto degenerate = dra::verify_concentric_ball(3, 0.0, 1.0, 400, 19);
  CHECK_THAT(degenerate.expected, Catch::Matchers::WithinRel(std::sqrt(0.6), 1e-12));
  CHECK(degenerate.pass);

  CHECK_THROWS_AS(dra::verify_concentric_ball(2, 1.0, 0.5, 100, 1), std::invalid_argument);
}

TEST_CASE("verify_concentric_ball error shrinks with N") {
  const auto coarse = dra::verify_concentric_ball(2, 0.5, 1.0, 500, 23);
  const auto fine = dra::verify_concentric_ball(2, 0.5, 1.0, 2000, 23);
  const double err_coarse = std::abs(coarse.observed - coarse.expected);
  const double err_fine = std::abs(fine.observed - fine.expected);
  CHECK(err_fine <= err_coarse + 0.01);
}

TEST_CASE("verify_iso_wasserstein small") {
  const auto r = dra::verify_iso_wasserstein(12, 2, 20, 25, 7);
  CHECK(r.name == "iso_wasserstein");
  CHECK(r.pass);
  CHECK(r.details.at("wins").get<std::size_t>() == 25);

  // Zero trials: only the concentric candidate, trivially minimal.
  const auto trivial = dra::verify_iso_wasserstein(8, 2, 10, 0, 1);
  CHECK(trivial.pass);
  CHECK_THROWS_AS(dra::verify_iso_wasserstein(8, 0, 10, 5, 1), std::invalid_argument);
  CHECK_THROWS_AS(dra::verify_iso_wasserstein(8, 2, 10000, 5, 1), std::invalid_argument);
}

TEST_CASE("verify_partial_ot_marginal 5x5 with enumeration") {
  const auto r = dra::verify_partial_ot_marginal(5, 5, 1);
  CHECK(r.name == "partial_ot_marginal");
  CHECK(r.pass);
  REQUIRE(r.details.contains("enumeration_min_cost"));
  CHECK(r.details.at("enumeration_match").get<bool>());
  CHECK(r.details.at("support_cells").get<std::size_t>() == 9);
}

TEST_CASE("verify_precision_bound small") {
  const dra::PointCloud X = dra::sample_uniform_ball(6, 1.0, 1500, 3);
  const double ru = dra::calibrate_r_u(X, 100);
  const double rv = dra::optimal_rv(6, 2, 1.0, ru, 1.0);
  const auto r = dra::verify_precision_bound(6, 2, 1500, ru, rv, 3);
  CHECK(r.name == "precision_bound");
  CHECK(r.pass);
  CHECK(r.details.at("worst_bound").get<double>() > 0.0);
  CHECK(r.expected > 0.0);
  CHECK(r.expected <= 1.0);
  CHECK_THROWS_AS(dra::verify_precision_bound(4, 4, 100, 0.1, 0.1, 1), std::invalid_argument);
}

TEST_CASE("SimulationConfig validation") {
  dra::SimulationConfig config;
  config.n = 1;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.n = 5;
  config.m_list = {5};
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.m_list = {2};
  config.rv_grid = {0.3, 0.2};
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.rv_grid = {0.2, 0.3};
  config.k_target = 40;
  CHECK_NOTHROW(config.validate());
}

TEST_CASE("verification JSON") {
  dra::VerificationResult r;
  r.name = "demo";
  r.pass = true;
  r.observed = 1.5;
  r.expected = 1.4;
  r.tolerance = 0.2;
  r.semantics = "absolute";
  const auto j = dra::verification_to_json(r);
  CHECK(j.at("name") == "demo");
  CHECK(j.at("pass") == true);
  CHECK(j.at("observed") == 1.5);
  CHECK(j.at("details").is_object());
}
