#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "kdvlab/evolution.hpp"
#include "kdvlab/potential.hpp"
#include "kdvlab/spectral.hpp"

namespace kdvlab {

/// Matrix on the band [-N, N] viewed as a map H^{s_in} -> H^{s_out}.
struct WeightedOperator {
  Eigen::MatrixXcd matrix;
  double s_in = 0.0;
  double s_out = 0.0;

  int band_limit() const { return static_cast<int>(matrix.rows() / 2); }
};

/// [d_x^gamma V, Pi_J](j, j') = (d_x^gamma V)^(j - j') (Pi_J(j') - Pi_J(j)) at time t.
WeightedOperator commutator_matrix(const PotentialSpec& V, double t, int J, int N, int gamma = 0);

/// Largest singular value of D^s M D^{-s}, D = diag(max(|j|, 1)).
double hs_opnorm(const WeightedOperator& M, double s);

/// Schur envelope of the weighted commutator: sqrt(max row sum * max column sum) of
/// w(j)/w(j') |V^(j - j')| min(1, 2|j - j'|/J). Dominates hs_opnorm.
double commutator_schur_bound(const PotentialSpec& V, double t, int J, int N, double s,
                              int gamma = 0);

struct TailReport {
  std::vector<double> times;
  std::vector<double> values;
  double a = 0.0;  // fit values ~ a + b t
  double b = 0.0;
  double residual = 0.0;
  bool side_condition = true;  // J > max(t)^s
};

/// t -> ||(I - Pi_J) S(t) u0||_{H^s}
TailReport tail_growth_experiment(const FourierField& u0, const PotentialSpec& V, int J, double s,
                                  const std::vector<double>& times, const PropagatorConfig& cfg);

struct FlowCommutatorReport {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> duhamel_values;  // empty unless the cross-check ran
  double max_discrepancy = 0.0;
  bool side_condition = true;
};

/// t -> ||S(t) Pi_J u0 - Pi_J S(t) u0||_{H^s}. With duhamel_check the same quantity
/// is integrated from its variation-of-constants form (band <= 64 only).
FlowCommutatorReport flow_commutator_experiment(const FourierField& u0, const PotentialSpec& V,
                                                int J, double s, const std::vector<double>& times,
                                                const PropagatorConfig& cfg,
                                                bool duhamel_check = false);

struct SweepRow {
  int J;
  double s;
  double t;
  double value;
  double schur_bound;  // NaN where no envelope applies
};

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace kdvlab
