#include "kdvlab/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <stdexcept>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <json.hpp>

#include "kdvlab/bounds.hpp"
#include "kdvlab/config.hpp"
#include "kdvlab/experiments.hpp"
#include "kdvlab/floquet.hpp"
#include "kdvlab/version.hpp"

namespace kdvlab {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Overrides {
  std::string out;
  int threads = 0;
  std::optional<std::uint64_t> seed;
};

std::string expected_kind(const std::string& command) {
  if (command == "simulate") return "growth";
  if (command == "floquet") return "floquet";
  return command;
}

ExperimentConfig prepare(const std::string& command, const std::string& path, const Overrides& ov) {
  std::ifstream probe(path);
  if (!probe) throw std::invalid_argument("config file not found: " + path);
  json raw;
  try {
    raw = json::parse(probe);
  } catch (const json::exception& e) {
    throw std::invalid_argument("config " + path + " is not valid JSON: " + e.what());
  }
  if (!raw.is_object()) throw std::invalid_argument("config: top level must be an object");
  const std::string want = expected_kind(command);
  if (!raw.contains("kind")) raw["kind"] = want;
  const std::string kind = raw["kind"].is_string() ? raw["kind"].get<std::string>() : "";
  const bool ok = kind == want || (command == "floquet" && kind == "localization");
  if (!ok) throw std::invalid_argument("config kind '" + kind + "' does not match command '" + command + "'");
  if (!ov.out.empty()) raw["output"]["dir"] = ov.out;
  if (ov.threads > 0) raw["output"]["threads"] = ov.threads;
  if (ov.seed) raw["initial_data"]["seed"] = *ov.seed;
  ExperimentConfig cfg = parse_config(raw, fs::path(path).parent_path().string());
  if (!ov.out.empty()) cfg.output_dir = ov.out;  // taken as given, not relative to the config
  return cfg;
}

json versions() {
  return {{"kdvlab", kVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                        "." + std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", std::to_string(BOOST_VERSION / 100000) + "." +
                        std::to_string(BOOST_VERSION / 100 % 1000)}};
}

void write_manifest(const ExperimentConfig& cfg, const std::string& command, const json& results,
                    const json& scale, const std::vector<std::string>& outputs) {
  json m;
  m["command"] = command;
  m["config"] = cfg.raw;
  m["versions"] = versions();
  m["threads"] = cfg.threads;
  m["fingerprint"] = run_fingerprint(cfg);
  m["asymptotic_scale"] = scale;
  m["results"] = results;
  m["outputs"] = outputs;
  std::ofstream out(fs::path(cfg.output_dir) / "manifest.json");
  out << m.dump(2) << "\n";
}

std::ofstream open_output(const ExperimentConfig& cfg, const std::string& name) {
  std::ofstream out(fs::path(cfg.output_dir) / name);
  if (!out) throw std::invalid_argument("cannot write " + (fs::path(cfg.output_dir) / name).string());
  return out;
}

json fit_json(const GrowthFit& f) {
  return {{"s", f.s},           {"p_hat", f.p_hat},     {"p_se", f.p_se},
          {"p_residual", f.p_residual}, {"q_hat", f.q_hat}, {"q_se", f.q_se},
          {"q_residual", f.q_residual}, {"tail_samples", f.tail_samples},
          {"reference_poly", f.reference_poly}, {"reference_log", f.reference_log}};
}

int cmd_simulate(const ExperimentConfig& cfg) {
  GrowthSetup g;
  g.V = cfg.potential();
  g.prop = cfg.propagator();
  g.u0 = cfg.initial_data(cfg.N);
  g.times = growth_time_grid(cfg.t_max, cfg.samples);
  g.s_list = cfg.s_list;
  g.fit_s = cfg.s;
  g.margin = cfg.margin;
  g.varsigma = cfg.varsigma;
  const GrowthResult r = run_growth(g);
  {
    auto out = open_output(cfg, "trace.csv");
    write_trace_csv(out, r.trace);
  }
  json res = {{"fit", fit_json(r.fit)},
              {"verdict", r.verdict},
              {"polynomial_ok", r.polynomial_ok},
              {"polylog_consistent", r.polylog_consistent},
              {"admissibility",
               {{"shape", r.admissibility.shape},
                {"admissible", r.admissibility.admissible},
                {"integral", r.admissibility.integral},
                {"ratio", r.admissibility.ratio}}},
              {"trace_fingerprint", r.trace.fingerprint}};
  json scale = {{"varsigma_growth_bound", "> 3"}, {"varsigma_iteration", cfg.sigma + 1.0},
                {"varsigma_used", cfg.varsigma}};
  write_manifest(cfg, "simulate", res, scale, {"trace.csv", "manifest.json"});
  std::printf("p_hat=%.6f q_hat=%.6f verdict=%s\n", r.fit.p_hat, r.fit.q_hat, r.verdict.c_str());
  return 0;
}

int cmd_floquet(const ExperimentConfig& cfg) {
  const PotentialSpec V = cfg.potential();
  // A potential without time dependence is already periodic; only others are cut off.
  const PotentialSpec V1 =
      V.is_stationary() ? V : PotentialSpec::periodized(V, GevreyBump(cfg.alpha), cfg.T);
  const PotentialSpec V2 = band_truncate(V1, cfg.T, cfg.sigma);
  RegionCaps caps;
  caps.J_cap = cfg.J_cap;
  const LatticeRegion region = build_region(cfg.T, cfg.s, cfg.D, cfg.sigma, caps);
  const LatticeOperator H = assemble_H(V2, region);
  const FloquetSpectrum spec = eigendecompose(H);
  const LocalizationSummary sum = summarize_localization(spec, cfg.threshold);

  std::vector<ModeRow> rows;
  const bool all = !spec.block_structured();
  if (all) {
    for (long k = 0; k < spec.size(); ++k) {
      const FloquetMode m = spec.mode(k);
      rows.push_back({k, m.E, localization_profile(m, region), lattice_residual(H, m)});
    }
  } else {
    // Other rows repeat these vectors with E shifted by -n0/T.
    const long base = static_cast<long>(region.n_max) * region.row_size();
    for (long k = 0; k < region.row_size(); ++k) {
      const FloquetMode m = spec.raw_mode(base + k);
      rows.push_back({base + k, m.E, localization_profile(m, region), lattice_residual(H, m)});
    }
  }
  {
    auto out = open_output(cfg, "modes.csv");
    write_modes_csv(out, rows);
  }
  json res = {{"sites", region.sites()},
              {"J_max", region.J_max},
              {"n_max", region.n_max},
              {"block_structured", spec.block_structured()},
              {"modes_written", all ? "all" : "n0 = 0 row; other rows are shifts by -n0/T"},
              {"hermiticity_residual", H.hermiticity_residual()},
              {"norm_bound", H.norm_bound()},
              {"max_eigen_residual", spec.max_residual()},
              {"localization",
               {{"median", sum.median},
                {"mean", sum.mean},
                {"max", sum.max},
                {"threshold", sum.threshold},
                {"fraction_below", sum.fraction_below}}}};
  json scale = {{"J_asymptotic", region.J_asymptotic}, {"J_truncated", region.j_truncated},
                {"s_asymptotic", std::log(cfg.T)}, {"log_scale", region.log_scale()}};
  write_manifest(cfg, "floquet", res, scale, {"modes.csv", "manifest.json"});
  std::printf("sites=%ld median_outside_mass=%.3e\n", region.sites(), sum.median);
  return 0;
}

int cmd_commutator(const ExperimentConfig& cfg) {
  const PotentialSpec V = cfg.potential();
  std::vector<SweepRow> rows;
  json stat = json::array();
  for (int J : cfg.J_list) {
    const int N = std::max(cfg.N, J);
    const double v = hs_opnorm(commutator_matrix(V, cfg.t_eval, J, N), cfg.s);
    const double sb = commutator_schur_bound(V, cfg.t_eval, J, N, cfg.s);
    rows.push_back({J, cfg.s, cfg.t_eval, v, sb});
    stat.push_back({{"J", J}, {"norm", v}, {"schur", sb}});
  }
  json flow = json::array();
  if (cfg.flow) {
    const PropagatorConfig pc = cfg.propagator();
    const FourierField u0 = cfg.initial_data(cfg.N);
    std::vector<double> times;
    for (int i = 0; i <= cfg.samples; ++i) times.push_back(cfg.t_max * i / cfg.samples);
    for (int J : cfg.J_list) {
      const auto rep = flow_commutator_experiment(u0, V, J, cfg.s, times, pc);
      for (std::size_t i = 0; i < rep.times.size(); ++i)
        rows.push_back({J, cfg.s, rep.times[i], rep.values[i], std::numeric_limits<double>::quiet_NaN()});
      flow.push_back({{"J", J}, {"final", rep.values.back()}, {"side_condition", rep.side_condition}});
    }
  }
  {
    auto out = open_output(cfg, "sweep.csv");
    write_sweep_csv(out, rows);
  }
  write_manifest(cfg, "commutator", {{"commutator", stat}, {"flow", flow}},
                 {{"J_asymptotic", std::pow(cfg.T, 10.0 * cfg.s)}}, {"sweep.csv", "manifest.json"});
  for (const auto& r : stat) std::printf("J=%d norm=%.6e schur=%.6e\n", r["J"].get<int>(),
                                         r["norm"].get<double>(), r["schur"].get<double>());
  return 0;
}

int cmd_pipeline(const ExperimentConfig& cfg) {
  const PotentialSpec V = cfg.potential();
  const PropagatorConfig pc = cfg.propagator();
  const FourierField u0 = cfg.initial_data(cfg.N);
  const int T = static_cast<int>(cfg.T);
  const PipelineReport rep = run_iteration_pipeline(u0, V, T, cfg.J, cfg.J0, cfg.s, pc);
  json steps = json::array();
  for (const auto& st : rep.steps)
    steps.push_back({{"r", st.r}, {"intermediate", st.intermediate}, {"high", st.high}, {"low", st.low}});
  json res = {{"iterated", rep.iterated}, {"budget", rep.budget}, {"direct", rep.direct},
              {"slack", rep.slack},       {"holds", rep.holds},   {"steps", steps}};
  if (2 * cfg.J0 < cfg.J / 4) {
    const DecompositionReport d = decompose_norm(u0, V, cfg.T, cfg.J, cfg.J0, cfg.s, pc);
    res["decomposition"] = {{"lhs", d.lhs}, {"terms", d.terms}, {"shares", d.shares}};
  } else {
    res["decomposition"] = "skipped: needs 2 J0 < J/4";
  }
  json scale = {{"J_asymptotic", std::pow(cfg.T, 10.0 * std::log(cfg.T))}, {"s_asymptotic", std::log(cfg.T)},
                {"s_used", cfg.s}, {"J_used", cfg.J}};
  write_manifest(cfg, "pipeline", res, scale, {"manifest.json"});
  std::printf("direct=%.17g iterated=%.17g budget=%.17g holds=%s\n", rep.direct, rep.iterated,
              rep.budget, rep.holds ? "true" : "false");
  return 0;
}

int cmd_fit(const ExperimentConfig& cfg) {
  std::ifstream in(cfg.trace_path);
  if (!in) throw std::invalid_argument("cannot open trace " + cfg.trace_path);
  const GrowthTrace tr = read_trace_csv(in);
  const GrowthFit f = fit_exponents(tr, cfg.s, cfg.varsigma);
  write_manifest(cfg, "fit", {{"fit", fit_json(f)}}, json::object(), {"manifest.json"});
  std::printf("p_hat=%.6f q_hat=%.6f\n", f.p_hat, f.q_hat);
  return 0;
}

int dispatch(const std::string& command, const std::string& config, const Overrides& ov) {
  const ExperimentConfig cfg = prepare(command, config, ov);
  Eigen::setNbThreads(cfg.threads);
  fs::create_directories(cfg.output_dir);
  if (command == "simulate") return cmd_simulate(cfg);
  if (command == "floquet") return cmd_floquet(cfg);
  if (command == "commutator") return cmd_commutator(cfg);
  if (command == "pipeline") return cmd_pipeline(cfg);
  return cmd_fit(cfg);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Sobolev growth laboratory for the linear KdV-type flow on the circle"};
  app.require_subcommand(1);
  std::string config;
  Overrides ov;
  std::string chosen;
  for (const char* name : {"simulate", "floquet", "commutator", "pipeline", "fit"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "experiment config (JSON)")->required();
    sub->add_option("--out", ov.out, "output directory");
    sub->add_option("--threads", ov.threads, "thread count")->check(CLI::PositiveNumber);
    sub->add_option("--seed", ov.seed, "seed for random initial data");
    sub->callback([&chosen, name] { chosen = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    return dispatch(chosen, config, ov);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("kdvlab");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace kdvlab
