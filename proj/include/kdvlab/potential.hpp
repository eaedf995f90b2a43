#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kdvlab/spectral.hpp"

namespace kdvlab {

enum class Envelope { none, inverse_linear };

/// a(t); inverse_linear is 1/(1+|t|).
double envelope_value(Envelope e, double t);
std::string envelope_name(Envelope e);
Envelope parse_envelope(std::string_view name);

/// Gevrey/periodization exponents carried by a potential file. The constructor
/// enforces sigma > sigma' > sigma'' > 2 alpha + delta, alpha + delta > 2, D > 2 pi.
struct Regularization {
  double T = 0.0;
  double alpha = 0.0;
  double sigma = 0.0;
  double sigma_prime = 0.0;
  double sigma_second = 0.0;
  double delta = 0.0;
  double D = 0.0;

  void validate() const;
};

/// Space-time Fourier table c(j, n) on |j| <= j_band, |n| <= n_band for terms
/// e^{i(jx + n t / time_scale)}.
class CoefficientTable {
 public:
  CoefficientTable() = default;
  CoefficientTable(int j_band, int n_band, double time_scale);

  int j_band() const { return jb_; }
  int n_band() const { return nb_; }
  double time_scale() const { return tau_; }

  cplx at(int j, int n) const;
  cplx& ref(int j, int n);
  void set(int j, int n, cplx v) { ref(j, n) = v; }

  /// c(-j,-n) = conj(c(j,n)) within tol (absolute, relative to the largest entry).
  bool respects_reality(double tol = 1e-12) const;
  bool is_zero() const;
  double max_abs() const;

 private:
  int jb_ = 0;
  int nb_ = 0;
  double tau_ = 1.0;
  std::vector<cplx> data_;
};

/// phi(tau) = 1 on |tau| <= 1, 0 on |tau| >= pi, and on the transition
/// h(a) / (h(a) + h(1-a)) with a = (pi - |tau|)/(pi - 1), h(a) = exp(-a^{-1/(alpha-1)}).
class GevreyBump {
 public:
  explicit GevreyBump(double alpha);
  double alpha() const { return alpha_; }
  double operator()(double tau) const;

 private:
  double alpha_;
};

/// Real potential V(x, t). Either a finite Fourier table times an optional
/// envelope, or the 2 pi T-periodic copy of a base potential cut off by a bump.
class PotentialSpec {
 public:
  explicit PotentialSpec(CoefficientTable table, Envelope envelope = Envelope::none,
                         std::optional<Regularization> regularization = std::nullopt);

  static PotentialSpec periodized(const PotentialSpec& base, const GevreyBump& bump, double T);

  bool is_table() const { return periodic_ == nullptr; }
  bool is_periodized() const { return periodic_ != nullptr; }
  const CoefficientTable& table() const;
  Envelope envelope() const { return envelope_; }
  const std::optional<Regularization>& regularization() const { return reg_; }

  /// Period T of a periodized potential; throws for table potentials.
  double period_scale() const;
  const GevreyBump& bump() const;
  const PotentialSpec& base() const;

  /// Largest |j| with a (possibly) nonzero spatial coefficient.
  int spatial_band() const;

  /// True when V does not depend on t.
  bool is_stationary() const;
  bool is_zero() const;

  /// Spatial Fourier coefficients v_k(t), k = -band..band, stored at k + band.
  void spatial_coefficients(double t, std::vector<cplx>& out) const;
  std::vector<cplx> spatial_coefficients(double t) const;

  double eval(double x, double t) const;
  double eval_x(double x, double t) const;
  /// Direct complex sum; the imaginary part vanishes for reality-respecting tables.
  cplx eval_complex(double x, double t) const;
  cplx eval_x_complex(double x, double t) const;

 private:
  struct Periodic {
    std::shared_ptr<const PotentialSpec> base;
    GevreyBump bump;
    double T;
  };

  PotentialSpec() = default;

  CoefficientTable table_;
  Envelope envelope_ = Envelope::none;
  std::optional<Regularization> reg_;
  std::shared_ptr<const Periodic> periodic_;
};

/// Shipped potentials: "zero", "decaying-envelope" (kappa sin(x+t)/(1+t)),
/// "stationary" (kappa cos x), "analytic-band" (kappa sum_{k<=8} e^{-k/2} cos(kx - t)).
PotentialSpec make_preset(std::string_view name, double kappa);
std::vector<std::string> preset_names();

/// Floor of (log T)^sigma and T (log T)^sigma: the retained rectangle of the band truncation.
std::pair<int, int> truncation_rectangle(double T, double sigma);

/// Space-time Fourier coefficients (period 2 pi T in t) on |j| <= j_max, |n| <= n_max.
/// Table potentials whose time scale is T are copied; periodized ones use FFT quadrature.
CoefficientTable fourier_table(const PotentialSpec& V, double T, int j_max, int n_max);

/// V2: coefficients of V1 kept on |j| <= (log T)^sigma, |n| <= T (log T)^sigma.
PotentialSpec band_truncate(const PotentialSpec& V1, double T, double sigma);
/// Uses the sigma carried by V1's regularization block.
PotentialSpec band_truncate(const PotentialSpec& V1, double T);

struct TruncationError {
  double sup_bound;     ///< sum |V1 - V2| >= ||V1 - V2||_inf
  double sup_bound_dx;  ///< sum |j| |V1 - V2| >= ||d_x(V1 - V2)||_inf
};

TruncationError truncation_error(const CoefficientTable& V1, const CoefficientTable& V2);

struct DecayReport {
  bool degenerate = false;
  std::string note;
  double c_x = 0.0;
  double c_t = 0.0;
  bool fitted_x = false;
  bool fitted_t = false;
  bool violation = false;
};

/// Fits log|c(j,n)| against |j| and against |n/T|^{1/alpha} on the tail.
DecayReport decay_check(const CoefficientTable& table, double alpha = 1.0);
DecayReport decay_check(const PotentialSpec& V);

/// sup_x |V(x,t)| and sup_x |V_x(x,t)|: grid search then golden-section refinement.
double sup_abs(const PotentialSpec& V, double t);
double sup_abs_dx(const PotentialSpec& V, double t);

/// int_0^t ||V_x(., tau)||_inf dtau by adaptive Gauss-Kronrod quadrature.
double admissible_integral(const PotentialSpec& V, double t);

/// Potential file: header "T alpha sigma sigma' sigma'' delta D envelope", then "j n re im".
PotentialSpec read_potential(std::istream& in);
void write_potential(std::ostream& out, const PotentialSpec& V);

}  // namespace kdvlab
