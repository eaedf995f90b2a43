#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kdvlab/errors.hpp"
#include "kdvlab/expm.hpp"
#include "kdvlab/potential.hpp"
#include "kdvlab/spectral.hpp"

namespace kdvlab {

enum class Scheme { exp_midpoint, dense_oracle };

// How the per-step exponential is formed. automatic picks the tridiagonal
// spectral route whenever the potential has spatial band <= 1.
enum class ExpMethod { automatic, pade, tridiagonal };

std::string scheme_name(Scheme s);
Scheme parse_scheme(std::string_view name);
std::string exp_method_name(ExpMethod m);
ExpMethod parse_exp_method(std::string_view name);

struct PropagatorConfig {
  int band_limit = 32;
  double dt = 0.0;  // 0 selects default_dt(band_limit)
  Scheme scheme = Scheme::exp_midpoint;
  double conservation_tol = 1e-10;
  ExpMethod exp_method = ExpMethod::automatic;
  double oracle_tol = 1e-9;

  static double default_dt(int N);
  double step() const { return dt > 0 ? dt : default_dt(band_limit); }
  void validate() const;
};

/// G(t) on |j|, |j'| <= N, index j + N.
Eigen::MatrixXcd generator(const PotentialSpec& V, double t, int N);

/// A(t) = -i G(t), the Hermitian form of the generator.
Eigen::MatrixXcd hermitian_generator(const PotentialSpec& V, double t, int N);

/// Matrix-free G(t) u on the band of u.
Eigen::VectorXcd apply_generator(const PotentialSpec& V, double t, const Eigen::VectorXcd& u);

/// Exponential-midpoint stepper. Several fields can be carried through the same
/// steps as columns of one matrix.
class Propagator {
 public:
  Propagator(PotentialSpec V, PropagatorConfig cfg);

  const PropagatorConfig& config() const { return cfg_; }
  const PotentialSpec& potential() const { return V_; }
  ExpMethod resolved_method() const { return method_; }

  /// Columns are fields on the band [-N, N]; advanced from t0 to t1 in place.
  void advance(Eigen::MatrixXcd& U, double t0, double t1);
  FourierField advance(const FourierField& u, double t0, double t1);

 private:
  void step(Eigen::MatrixXcd& U, double t_mid, double h);

  PotentialSpec V_;
  PropagatorConfig cfg_;
  ExpMethod method_;
  bool stationary_;
  // Stationary potentials reuse one decomposition for every step.
  std::unique_ptr<TridiagonalEigen> cached_tri_;
  std::unique_ptr<Eigen::MatrixXcd> cached_herm_;
};

/// S(t1, t0) u0 using cfg.scheme. Throws ConservationFailure if the L2 drift exceeds
/// cfg.conservation_tol (relative).
FourierField propagate(const FourierField& u0, const PotentialSpec& V, double t0, double t1,
                       const PropagatorConfig& cfg);

/// eps |t|, the a priori Duhamel bound.
double duhamel_error(double residual_norm, double t);

struct GrowthTrace {
  std::vector<double> times;
  std::vector<double> s_list;
  std::vector<std::vector<double>> norms;  // norms[i][k]: time i, index s_list[k]
  std::string fingerprint;

  int column(double s) const;
  std::vector<double> series(double s) const;
  void validate() const;
};

GrowthTrace trace_norms(const FourierField& u0, const PotentialSpec& V,
                        const std::vector<double>& times, const std::vector<double>& s_list,
                        const PropagatorConfig& cfg);

void write_trace_csv(std::ostream& out, const GrowthTrace& trace);
GrowthTrace read_trace_csv(std::istream& in);

}  // namespace kdvlab
