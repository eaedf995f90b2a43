#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "kdvlab/evolution.hpp"
#include "kdvlab/potential.hpp"
#include "kdvlab/spectral.hpp"

namespace kdvlab {

struct InitialDataSpec {
  std::string type = "analytic-random";  // analytic-random | algebraic | modes | file
  double decay = 8.0;
  std::uint64_t seed = 1;
  double exponent = 2.75;
  std::vector<std::tuple<int, double, double>> modes;
  std::string path;
};

struct ExperimentConfig {
  std::string kind = "growth";  // growth | floquet | localization | commutator | pipeline | fit

  std::string preset = "decaying-envelope";
  double kappa = 1.0;
  std::string potential_file;

  InitialDataSpec initial;

  int N = 64;
  double dt = 0.0;
  std::string exp_method = "auto";
  double conservation_tol = 1e-10;
  double t_max = 10.0;
  int samples = 40;
  std::vector<double> s_list{1.0};
  double s = 1.0;
  double margin = 0.2;
  double varsigma = 4.0;

  double T = 8.0;
  int J = 64;
  int J0 = 8;
  double sigma = 3.0;
  double D = 7.0;
  double alpha = 2.0;
  int J_cap = 64;
  double threshold = 0.1;
  double C_V = 0.0;

  std::vector<int> J_list{32, 64, 128};
  double t_eval = 0.0;
  bool flow = false;

  std::string trace_path;

  std::string output_dir = "run";
  int threads = 1;

  nlohmann::json raw;

  void validate() const;
  PropagatorConfig propagator() const;
  PotentialSpec potential() const;
  FourierField initial_data(int N_field) const;
};

/// Relative file paths are taken against base_dir.
ExperimentConfig parse_config(const nlohmann::json& j, const std::string& base_dir = "");
/// Reads and validates a JSON config; missing or malformed files are validation errors.
ExperimentConfig load_config(const std::string& path);

/// FNV-1a over the canonical config dump, thread count and library versions.
std::string run_fingerprint(const ExperimentConfig& cfg);

}  // namespace kdvlab
