// dr-audit: sample synthetic data, project it, evaluate theoretical
// bounds, audit embedding pairs, and run the brute-force theorem checks.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dra/bounds.hpp"
#include "dra/experiments.hpp"
#include "dra/geometry.hpp"
#include "dra/measures.hpp"
#include "dra/plot.hpp"
#include "dra/point_cloud.hpp"
#include "dra/synth.hpp"

namespace {

using nlohmann::json;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
}

void write_cloud(const dra::PointCloud& cloud, const std::string& path,
                 const std::string& format) {
  if (format == "json") {
    write_text(path, dra::cloud_to_json(cloud).dump(2) + "\n");
    return;
  }
  std::ostringstream os;
  dra::write_cloud_csv(cloud, os);
  write_text(path, os.str());
}

int run_sample(const std::string& kind, int n, double radius, std::size_t count,
               double noise, std::uint64_t seed, const std::string& out,
               const std::string& format) {
  dra::PointCloud cloud;
  if (kind == "ball")
    cloud = dra::sample_uniform_ball(n, radius, count, seed);
  else if (kind == "s-curve")
    cloud = dra::s_curve(count, noise, seed);
  else if (kind == "swiss-roll")
    cloud = dra::swiss_roll(count, noise, seed);
  else
    throw CLI::ValidationError("--kind must be ball, s-curve, or swiss-roll");
  write_cloud(cloud, out, format);
  return 0;
}

int run_project(const std::string& in, const std::string& map_kind, std::size_t m,
                std::uint64_t seed, bool raw_gaussian, const std::string& out) {
  const dra::PointCloud X = dra::read_cloud_csv_file(in);
  dra::LinearMap map;
  if (map_kind == "random")
    map = dra::random_projection(X.dim, m, seed, !raw_gaussian);
  else if (map_kind == "coordinate")
    map = dra::coordinate_projection(X.dim, m);
  else if (map_kind == "pca")
    map = dra::pca_projection(X, m);
  else
    throw CLI::ValidationError("--map must be random, coordinate, or pca");
  const dra::PointCloud Y = map.apply(X);

  const std::string prefix = out.empty() ? "embedding" : out;
  dra::write_cloud_csv(X, prefix + "_high.csv");
  dra::write_cloud_csv(Y, prefix + "_low.csv");
  const json sidecar = {{"map", map_kind},
                        {"d", X.dim},
                        {"m", m},
                        {"lipschitz", map.lipschitz},
                        {"seed", seed},
                        {"high", prefix + "_high.csv"},
                        {"low", prefix + "_low.csv"}};
  write_text(prefix + ".json", sidecar.dump(2) + "\n");
  return 0;
}

int run_bounds(int n, int m, double R, double r_u, double r_v, double L, double delta,
               const std::string& out) {
  dra::BoundParams params{n, m, R, r_u, r_v, L};
  if (delta <= 0.0) delta = 0.5 * std::sqrt(std::max(1e-300, R * R - r_u * r_u));
  const dra::AvgCaseParams avg_params{params, delta};
  const dra::AvgBound avg = dra::precision_bound_avg(avg_params);
  const json result = {
      {"d_factor", dra::d_factor(n, m)},
      {"precision_worst", dra::precision_bound_worst(params)},
      {"precision_pnorm", dra::precision_bound_pnorm(params)},
      {"precision_avg", avg.bound},
      {"q1", dra::q_linear(avg_params, dra::FiberKind::kSphereLift)},
      {"q2", avg.q},
      {"w2_lower", dra::w2_lower_bound(params)},
      {"rv_star", dra::optimal_rv(n, m, R, r_u, L)},
  };
  write_text(out, result.dump(2) + "\n");
  return 0;
}

int run_audit(const std::string& high, const std::string& low, const dra::AuditConfig& config,
              const std::string& out, const std::string& format) {
  const dra::EmbeddingPair pair{dra::read_cloud_csv_file(high), dra::read_cloud_csv_file(low)};
  const dra::MeasureReport report = dra::audit(pair, config);
  const bool as_csv = format == "csv" || (format.empty() && out.size() > 4 &&
                                          out.substr(out.size() - 4) == ".csv");
  if (as_csv) {
    std::ostringstream os;
    dra::report_to_csv(report, os);
    write_text(out, os.str());
  } else {
    write_text(out, dra::report_to_json(report).dump(2) + "\n");
  }
  return 0;
}

int run_simulate(const dra::SimulationConfig& config, const std::string& out,
                 const std::string& plot_path, int sweep_m,
                 const std::vector<std::size_t>& k_list, const std::string& sweep_out) {
  const auto table = dra::simulate_tradeoff(config);
  std::ostringstream os;
  dra::write_tradeoff_csv(table, os);
  write_text(out, os.str());
  if (!plot_path.empty()) dra::emit_plot(table, dra::PlotKind::kPrCurve, plot_path);
  if (sweep_m > 0) {
    const auto rows = dra::sweep_r_u(config, sweep_m, k_list);
    std::ostringstream ss;
    dra::write_ru_sweep_csv(rows, ss);
    write_text(sweep_out.empty() ? "ru_sweep.csv" : sweep_out, ss.str());
  }
  return 0;
}

int run_verify(const std::string& check, std::uint64_t seed, const std::string& out) {
  std::vector<dra::VerificationResult> results;
  const bool all = check == "all";
  if (all || check == "concentric")
    results.push_back(dra::verify_concentric_ball(2, 0.5, 1.0, 2000, seed));
  if (all || check == "iso")
    results.push_back(dra::verify_iso_wasserstein(32, 4, 100, 200, seed));
  if (all || check == "partial") {
    results.push_back(dra::verify_partial_ot_marginal(5, 5, seed));
    results.push_back(dra::verify_partial_ot_marginal(20, 20, seed));
  }
  if (all || check == "bound") {
    const dra::PointCloud X = dra::sample_uniform_ball(10, 1.0, 10000, seed);
    const double r_u = dra::calibrate_r_u(X, 500);
    const double r_v = dra::optimal_rv(10, 2, 1.0, r_u, 1.0);
    results.push_back(dra::verify_precision_bound(10, 2, 10000, r_u, r_v, seed));
  }
  if (results.empty())
    throw CLI::ValidationError("--check must be all, concentric, iso, partial, or bound");

  bool ok = true;
  json report = json::array();
  for (const auto& r : results) {
    ok = ok && r.pass;
    std::cout << (r.pass ? "PASS" : "FAIL") << ' ' << r.name << " (observed " << r.observed
              << ", expected " << r.expected << ", " << r.runtime_seconds << " s)\n";
    report.push_back(dra::verification_to_json(r));
  }
  if (!out.empty()) write_text(out, report.dump(2) + "\n");
  return ok ? 0 : 1;
}

int run_plot(const std::string& in, const std::string& kind, const std::string& out) {
  std::ifstream stream(in);
  if (!stream) throw std::runtime_error("cannot open: " + in);
  const auto table = dra::read_tradeoff_csv(stream);
  dra::PlotKind plot_kind;
  if (kind == "pr-curve")
    plot_kind = dra::PlotKind::kPrCurve;
  else if (kind == "bound-curve")
    plot_kind = dra::PlotKind::kBoundCurve;
  else
    throw CLI::ValidationError("--kind must be pr-curve or bound-curve");
  dra::emit_plot(table, plot_kind, out.empty() ? "plot.svg" : out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audit dimensionality-reduction maps: bounds, measures, theorem checks"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string out;
  std::string format;
  app.add_option("--seed", seed, "Random seed")->capture_default_str();
  app.add_option("--out", out, "Output path ('-' for stdout)");
  app.add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* sample = app.add_subcommand("sample", "Emit a synthetic point cloud");
  std::string sample_kind = "ball";
  int sample_n = 10;
  double sample_radius = 1.0, sample_noise = 0.0;
  std::size_t sample_count = 10000;
  sample->add_option("--kind", sample_kind, "ball | s-curve | swiss-roll")
      ->capture_default_str();
  sample->add_option("--n", sample_n, "Ball dimension")->capture_default_str();
  sample->add_option("--radius", sample_radius, "Ball radius")->capture_default_str();
  sample->add_option("--count", sample_count, "Number of points")->capture_default_str();
  sample->add_option("--noise", sample_noise, "Gaussian noise (manifold kinds)")
      ->capture_default_str();

  auto* project = app.add_subcommand("project", "Apply a linear DR map to a CSV cloud");
  std::string project_in, project_map = "random";
  std::size_t project_m = 2;
  bool project_raw = false;
  project->add_option("--in", project_in, "Input cloud CSV")->required();
  project->add_option("--map", project_map, "random | coordinate | pca")
      ->capture_default_str();
  project->add_option("--m", project_m, "Embedding dimension")->capture_default_str();
  project->add_flag("--raw-gaussian", project_raw,
                    "Skip row orthonormalization of the random map");

  auto* bounds = app.add_subcommand("bounds", "Print all theoretical quantities as JSON");
  int b_n = 10, b_m = 2;
  double b_R = 1.0, b_ru = 0.3, b_rv = 0.3, b_L = 1.0, b_delta = 0.0;
  bounds->add_option("--n", b_n, "Data dimension")->capture_default_str();
  bounds->add_option("--m", b_m, "Embedding dimension")->capture_default_str();
  bounds->add_option("--radius", b_R, "Domain radius R")->capture_default_str();
  bounds->add_option("--r-u", b_ru, "Relevant radius")->capture_default_str();
  bounds->add_option("--r-v", b_rv, "Retrieval radius")->capture_default_str();
  bounds->add_option("--lipschitz", b_L, "Lipschitz constant")->capture_default_str();
  bounds->add_option("--delta", b_delta, "Average-case margin (default: half the max)");

  auto* audit = app.add_subcommand("audit", "Audit an embedding pair from two CSVs");
  std::string audit_high, audit_low;
  dra::AuditConfig audit_config;
  audit->add_option("--high", audit_high, "High-dimensional cloud CSV")->required();
  audit->add_option("--low", audit_low, "Low-dimensional cloud CSV")->required();
  audit->add_option("--k", audit_config.k, "W2 neighborhood size")->capture_default_str();
  audit->add_option("--r-u", audit_config.r_U, "Relevant radius")->required();
  audit->add_option("--r-v", audit_config.r_V, "Retrieval radius")->required();
  audit->add_option("--beta", audit_config.beta, "f-beta weight")->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "Precision-recall tradeoff sweep");
  dra::SimulationConfig sim;
  std::string sim_plot, sim_sweep_out;
  int sim_sweep_m = 0;
  std::vector<std::size_t> sim_k_list{50, 100, 250, 500, 1000};
  simulate->add_option("--n", sim.n, "Data dimension")->capture_default_str();
  simulate->add_option("--count", sim.N, "Sample size")->capture_default_str();
  simulate->add_option("--k-target", sim.k_target, "Mean neighbor count for r_U")
      ->capture_default_str();
  simulate->add_option("--m-list", sim.m_list, "Embedding dimensions (default 1..n-1)");
  simulate->add_option("--rv-grid", sim.rv_grid, "Explicit r_V grid");
  simulate->add_option("--beta", sim.beta, "f-beta weight")->capture_default_str();
  simulate->add_flag("--coordinate-map", sim.coordinate_map,
                     "Use the coordinate projection instead of a random one");
  simulate->add_option("--plot", sim_plot, "Also emit a PR-curve SVG here");
  simulate->add_option("--sweep-ru-m", sim_sweep_m,
                       "Also sweep r_U targets at this fixed m");
  simulate->add_option("--k-list", sim_k_list, "r_U sweep targets")->capture_default_str();
  simulate->add_option("--sweep-out", sim_sweep_out, "r_U sweep CSV path");

  auto* verify = app.add_subcommand("verify", "Brute-force theorem checks");
  std::string verify_check = "all";
  verify->add_option("--check", verify_check, "all | concentric | iso | partial | bound")
      ->capture_default_str();

  auto* plot = app.add_subcommand("plot", "Render a tradeoff CSV as SVG");
  std::string plot_in, plot_kind = "pr-curve";
  plot->add_option("--in", plot_in, "Tradeoff CSV")->required();
  plot->add_option("--kind", plot_kind, "pr-curve | bound-curve")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sample)
      return run_sample(sample_kind, sample_n, sample_radius, sample_count, sample_noise,
                        seed, out, format);
    if (*project) return run_project(project_in, project_map, project_m, seed, project_raw, out);
    if (*bounds) return run_bounds(b_n, b_m, b_R, b_ru, b_rv, b_L, b_delta, out);
    if (*audit) return run_audit(audit_high, audit_low, audit_config, out, format);
    if (*simulate) {
      sim.seed = seed;
      return run_simulate(sim, out.empty() ? "tradeoff.csv" : out, sim_plot, sim_sweep_m,
                          sim_k_list, sim_sweep_out);
    }
    if (*verify) return run_verify(verify_check, seed, out);
    if (*plot) return run_plot(plot_in, plot_kind, out);
  } catch (const std::exception& e) {
    std::cerr << "dr-audit: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
