#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "kdvlab/evolution.hpp"
#include "kdvlab/fitting.hpp"
#include "kdvlab/potential.hpp"
#include "kdvlab/spectral.hpp"

namespace kdvlab {

/// Real field with |u^(j)| = e^{-|j|/decay} and random phases, unit L2 norm.
FourierField analytic_random_field(int N, double decay, std::uint64_t seed);
/// Real field u^(j) = (1 + |j|)^{-exponent}, unit L2 norm.
FourierField algebraic_field(int N, double exponent);

struct Admissibility {
  std::string shape;  // "zero", "logarithmic" or "linear"
  bool admissible = false;
  double integral = 0.0;  // int_0^{t_max} ||V_x||_inf
  double ratio = 0.0;     // (I/log(t+2)) at t_max over the same at t_max/8
};

/// Shape test of the admissible integral: a ratio above 1.5 reads as linear growth.
Admissibility classify_potential(const PotentialSpec& V, double t_max);

/// 0 followed by `samples` log-spaced times on [t_max/100, t_max].
std::vector<double> growth_time_grid(double t_max, int samples);

struct GrowthSetup {
  PotentialSpec V = make_preset("zero", 0.0);
  FourierField u0;
  PropagatorConfig prop;
  std::vector<double> times;
  std::vector<double> s_list{1.0};
  double fit_s = 1.0;
  double margin = 0.2;
  double varsigma = 4.0;
};

struct GrowthResult {
  GrowthTrace trace;
  GrowthFit fit;
  Admissibility admissibility;
  std::string verdict;
  bool polynomial_ok = false;
  bool polylog_consistent = false;
};

GrowthResult run_growth(const GrowthSetup& setup);

struct DecompositionReport {
  double lhs = 0.0;
  // low, intermediate, high (all under Pi_{J/4}) and the (I - Pi_{J/4}) tail
  std::array<double, 4> terms{};
  std::array<double, 4> shares{};
};

/// Four-term split of ||S(T) u0||_{H^s} through Pi_{2 J0}, Pi_{J/2}, Pi_{J/4}.
DecompositionReport decompose_norm(const FourierField& u0, const PotentialSpec& V, double T,
                                   int J, int J0, double s, const PropagatorConfig& cfg);

struct PipelineStep {
  int r;
  double intermediate;  // ||Pi_{J/4} S(r, T)(Pi_{J/2} - Pi_{2J0}) v_r||
  double high;          // ||Pi_{J/4} S(r, T)(I - Pi_{J/2}) v_r||
  double low;           // ||Pi_{2J0} v_r||
};

struct PipelineReport {
  std::vector<PipelineStep> steps;
  double iterated = 0.0;
  double budget = 0.0;
  double direct = 0.0;
  double slack = 0.0;  // iterated + budget + 1e-8 - direct
  bool holds = false;
};

/// Unit-time iteration w_r = Pi_{2J0} S(r-1, r) w_{r-1}, w_0 = Pi_{2J0} u0.
PipelineReport run_iteration_pipeline(const FourierField& u0, const PotentialSpec& V, int T,
                                      int J, int J0, double s, const PropagatorConfig& cfg);

}  // namespace kdvlab
