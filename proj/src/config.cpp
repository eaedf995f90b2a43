#include "kdvlab/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <stdexcept>

#include <Eigen/Core>
#include <boost/version.hpp>

#include "kdvlab/experiments.hpp"
#include "kdvlab/version.hpp"

namespace kdvlab {

namespace {

using nlohmann::json;

template <class T>
void take(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
}

}  // namespace

ExperimentConfig parse_config(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  reject_unknown(j, {"kind", "potential", "initial_data", "numerics", "output"}, "config");
  ExperimentConfig c;
  c.raw = j;
  take(j, "kind", c.kind);

  if (j.contains("potential")) {
    const auto& p = j.at("potential");
    reject_unknown(p, {"preset", "kappa", "file"}, "potential");
    take(p, "preset", c.preset);
    take(p, "kappa", c.kappa);
    take(p, "file", c.potential_file);
  }
  if (j.contains("initial_data")) {
    const auto& d = j.at("initial_data");
    reject_unknown(d, {"type", "decay", "seed", "exponent", "modes", "path", "trace"}, "initial_data");
    take(d, "type", c.initial.type);
    take(d, "decay", c.initial.decay);
    take(d, "seed", c.initial.seed);
    take(d, "exponent", c.initial.exponent);
    take(d, "path", c.initial.path);
    take(d, "trace", c.trace_path);
    if (d.contains("modes")) {
      for (const auto& m : d.at("modes")) {
        if (!m.is_array() || m.size() != 3)
          throw std::invalid_argument("config: each mode is [j, re, im]");
        c.initial.modes.emplace_back(m[0].get<int>(), m[1].get<double>(), m[2].get<double>());
      }
    }
  }
  if (j.contains("numerics")) {
    const auto& n = j.at("numerics");
    reject_unknown(n,
                   {"N", "dt", "exp_method", "conservation_tol", "t_max", "samples", "s_list", "s",
                    "margin", "varsigma", "T", "J", "J0", "sigma", "D", "alpha", "J_cap",
                    "threshold", "C_V", "J_list", "t_eval", "flow"},
                   "numerics");
    take(n, "N", c.N);
    take(n, "dt", c.dt);
    take(n, "exp_method", c.exp_method);
    take(n, "conservation_tol", c.conservation_tol);
    take(n, "t_max", c.t_max);
    take(n, "samples", c.samples);
    take(n, "s_list", c.s_list);
    take(n, "s", c.s);
    take(n, "margin", c.margin);
    take(n, "varsigma", c.varsigma);
    take(n, "T", c.T);
    take(n, "J", c.J);
    take(n, "J0", c.J0);
    take(n, "sigma", c.sigma);
    take(n, "D", c.D);
    take(n, "alpha", c.alpha);
    take(n, "J_cap", c.J_cap);
    take(n, "threshold", c.threshold);
    take(n, "C_V", c.C_V);
    take(n, "J_list", c.J_list);
    take(n, "t_eval", c.t_eval);
    take(n, "flow", c.flow);
  }
  if (j.contains("output")) {
    const auto& o = j.at("output");
    reject_unknown(o, {"dir", "threads"}, "output");
    take(o, "dir", c.output_dir);
    take(o, "threads", c.threads);
  }
  // Relative paths inside the config resolve against its directory.
  auto fix = [&](std::string& p) {
    if (!p.empty() && !base_dir.empty() && std::filesystem::path(p).is_relative())
      p = (std::filesystem::path(base_dir) / p).string();
  };
  fix(c.potential_file);
  fix(c.initial.path);
  fix(c.trace_path);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config file not found: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument("config " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(j, std::filesystem::path(path).parent_path().string());
}

void ExperimentConfig::validate() const {
  static const std::set<std::string> kinds{"growth", "floquet", "localization", "commutator", "pipeline", "fit"};
  if (!kinds.count(kind)) throw std::invalid_argument("config: unknown kind '" + kind + "'");
  if (kind == "fit") {
    if (trace_path.empty()) throw std::invalid_argument("config: fit needs initial_data.trace");
    if (!std::filesystem::exists(trace_path))
      throw std::invalid_argument("config: trace file not found: " + trace_path);
    return;
  }
  if (potential_file.empty()) {
    bool known = false;
    for (const auto& p : preset_names()) known = known || p == preset;
    if (!known) throw std::invalid_argument("config: unknown potential preset '" + preset + "'");
  } else if (!std::filesystem::exists(potential_file)) {
    throw std::invalid_argument("config: potential file not found: " + potential_file);
  }
  if (!std::isfinite(kappa)) throw std::invalid_argument("config: kappa must be finite");
  static const std::set<std::string> init{"analytic-random", "algebraic", "modes", "file"};
  if (!init.count(initial.type)) throw std::invalid_argument("config: unknown initial data type '" + initial.type + "'");
  if (initial.type == "file" && !std::filesystem::exists(initial.path))
    throw std::invalid_argument("config: initial data file not found: " + initial.path);
  if (initial.type == "modes" && initial.modes.empty())
    throw std::invalid_argument("config: initial data 'modes' needs at least one mode");
  if (N < 1) throw std::invalid_argument("config: N must be >= 1");
  if (dt < 0) throw std::invalid_argument("config: dt must be >= 0 (0 selects the default)");
  parse_exp_method(exp_method);
  if (!(conservation_tol > 0)) throw std::invalid_argument("config: conservation_tol must be positive");
  for (double v : s_list)
    if (!(v >= 0)) throw std::invalid_argument("config: s values must be >= 0");
  if (!(s >= 0)) throw std::invalid_argument("config: s must be >= 0");
  if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
  if (kind == "growth") {
    if (!(t_max > 0)) throw std::invalid_argument("config: t_max must be positive");
    if (samples < 20) throw std::invalid_argument("config: growth fits need samples >= 20");
    bool has = false;
    for (double v : s_list) has = has || std::abs(v - s) < 1e-12;
    if (!has) throw std::invalid_argument("config: s must appear in s_list");
  }
  if (kind == "floquet" || kind == "localization") {
    if (!(T > std::numbers::e)) throw std::invalid_argument("config: floquet needs T > e");
    if (!(alpha > 1)) throw std::invalid_argument("config: alpha must exceed 1");
  }
  if (kind == "commutator") {
    if (J_list.empty()) throw std::invalid_argument("config: J_list is empty");
    for (int J : J_list)
      if (J <= 0 || J % 2) throw std::invalid_argument("config: J values must be positive and even");
  }
  if (kind == "pipeline") {
    if (T < 1 || std::floor(T) != T) throw std::invalid_argument("config: pipeline T must be a positive integer");
    if (J % 8) throw std::invalid_argument("config: pipeline J must be divisible by 8");
    if (J0 < 1 || !(2 * J0 < J / 2)) throw std::invalid_argument("config: pipeline needs 2 J0 < J/2");
    if (N < J) throw std::invalid_argument("config: pipeline needs N >= J");
  }
}

PropagatorConfig ExperimentConfig::propagator() const {
  PropagatorConfig p;
  p.band_limit = N;
  p.dt = dt;
  p.exp_method = parse_exp_method(exp_method);
  p.conservation_tol = conservation_tol;
  p.validate();
  return p;
}

PotentialSpec ExperimentConfig::potential() const {
  if (!potential_file.empty()) {
    std::ifstream in(potential_file);
    if (!in) throw std::invalid_argument("cannot open potential file " + potential_file);
    return read_potential(in);
  }
  return make_preset(preset, kappa);
}

FourierField ExperimentConfig::initial_data(int N_field) const {
  if (initial.type == "analytic-random") return analytic_random_field(N_field, initial.decay, initial.seed);
  if (initial.type == "algebraic") return algebraic_field(N_field, initial.exponent);
  FourierField f;
  if (initial.type == "file") {
    std::ifstream in(initial.path);
    if (!in) throw std::invalid_argument("cannot open initial data file " + initial.path);
    f = read_field(in);
  } else {
    int band = 0;
    for (const auto& [j, re, im] : initial.modes) band = std::max(band, std::abs(j));
    f = FourierField(band);
    for (const auto& [j, re, im] : initial.modes) f[j] += cplx(re, im);
  }
  if (f.band_limit() > N_field)
    throw std::invalid_argument("initial data band " + std::to_string(f.band_limit()) +
                                " exceeds N = " + std::to_string(N_field));
  return f.resized(N_field);
}

std::string run_fingerprint(const ExperimentConfig& cfg) {
  // Where results land does not change them.
  nlohmann::json canon = cfg.raw;
  if (canon.is_object() && canon.contains("output") && canon["output"].is_object()) canon["output"].erase("dir");
  std::string blob = canon.dump();
  blob += "|threads=" + std::to_string(cfg.threads);
  blob += "|kdvlab=" + std::string(kVersion);
  blob += "|eigen=" + std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
          "." + std::to_string(EIGEN_MINOR_VERSION);
  blob += "|boost=" + std::to_string(BOOST_VERSION);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : blob) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace kdvlab
