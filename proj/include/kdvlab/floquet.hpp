#pragma once

#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kdvlab/evolution.hpp"
#include "kdvlab/potential.hpp"
#include "kdvlab/spectral.hpp"

namespace kdvlab {

struct RegionCaps {
  int J_cap = 64;
  long max_sites = 100'000'000;
};

/// Index box |j| <= J_max, |n| <= n_max. Sites are numbered n-major so that each
/// n row is a contiguous block of 2 J_max + 1 entries.
struct LatticeRegion {
  int J_max = 0;
  int n_max = 0;
  double T = 0.0;
  double sigma = 0.0;
  double D = 0.0;
  double J_asymptotic = 0.0;  // T^{10 s}, usually far beyond reach
  bool j_truncated = false;

  int row_size() const { return 2 * J_max + 1; }
  long sites() const { return static_cast<long>(row_size()) * (2L * n_max + 1); }
  bool contains(int j, int n) const { return std::abs(j) <= J_max && std::abs(n) <= n_max; }
  long index(int j, int n) const {
    return static_cast<long>(n + n_max) * row_size() + (j + J_max);
  }
  std::pair<int, int> site(long idx) const {
    return {static_cast<int>(idx % row_size()) - J_max, static_cast<int>(idx / row_size()) - n_max};
  }
  /// (log T)^sigma
  double log_scale() const;
};

/// n_max = ceil(D T (log T)^sigma); J_max = min(T^{10 s_cap}, caps.J_cap).
LatticeRegion build_region(double T, double s_cap, double D, double sigma,
                           const RegionCaps& caps = {});

struct LatticeEntry {
  int j;
  int n;
  cplx value;
};

/// Sparse lattice vector.
using LatticeVector = std::vector<LatticeEntry>;

double lattice_norm(const LatticeVector& v);

/// H on the region: diagonal j^3 - n/T, kernel -((j+j')/2) V2(j-j', n-n').
class LatticeOperator {
 public:
  LatticeOperator(LatticeRegion region, CoefficientTable kernel);

  const LatticeRegion& region() const { return region_; }
  const CoefficientTable& kernel() const { return kernel_; }
  /// True when the kernel has no time modes, so H splits into identical n rows.
  bool block_diagonal() const { return kernel_.n_band() == 0; }

  cplx entry(int j, int n, int jp, int np) const;
  /// The (2 J_max + 1)-square block of row n.
  Eigen::MatrixXcd row_block(int n) const;
  Eigen::MatrixXcd dense(long max_sites = 4096) const;

  LatticeVector apply(const LatticeVector& v) const;
  /// max row sum of |H|, an upper bound for the spectral norm.
  double norm_bound() const;
  double hermiticity_residual() const;

 private:
  LatticeRegion region_;
  CoefficientTable kernel_;
  std::vector<std::pair<std::pair<int, int>, cplx>> taps_;  // nonzero (k, m) -> V2(k, m)
};

LatticeOperator assemble_H(const PotentialSpec& V2, const LatticeRegion& region);

struct Localization {
  std::string scenario;  // "Omega0" or "Omega'"
  int j0 = 0;
  int n0 = 0;
  double m0 = 0.0;
  double m_prime = 0.0;
  double outside_mass = 0.0;
};

struct FloquetMode {
  double E = 0.0;
  LatticeVector xi;
};

/// Eigenpairs of H. Block-diagonal operators keep a single row decomposition and
/// generate modes on demand: mode (k, n0) has E = lambda_k - n0/T.
class FloquetSpectrum {
 public:
  long size() const;
  bool block_structured() const { return block_; }
  const LatticeRegion& region() const { return region_; }

  // Unsorted access.
  double raw_eigenvalue(long r) const;
  FloquetMode raw_mode(long r) const;

  // Ascending order (sorted on first use).
  double eigenvalue(long k) const { return raw_eigenvalue(raw_index(k)); }
  FloquetMode mode(long k) const { return raw_mode(raw_index(k)); }
  long raw_index(long k) const;

  // Row decomposition of block-structured spectra; raw index r = (n0 + n_max) * rows + k.
  const Eigen::VectorXd& row_values() const { return values_; }
  const Eigen::MatrixXcd& row_vectors() const { return vectors_; }
  double max_residual() const { return max_residual_; }

 private:
  friend FloquetSpectrum eigendecompose(const LatticeOperator& H, long max_dense);

  LatticeRegion region_;
  bool block_ = false;
  Eigen::VectorXd values_;
  Eigen::MatrixXcd vectors_;
  double max_residual_ = 0.0;
  struct Order {
    std::once_flag once;
    std::vector<long> perm;
  };
  std::shared_ptr<Order> order_ = std::make_shared<Order>();
};

/// Dense Hermitian solve up to max_dense sites; block-diagonal operators of any
/// size go through one row solve. Residuals are checked against 1e-10 ||H||.
FloquetSpectrum eigendecompose(const LatticeOperator& H, long max_dense = 4096);

/// ||(H - E) xi||
double lattice_residual(const LatticeOperator& H, const FloquetMode& mode);

/// All (j, n) in the region with |j^3 + C_V j - n/T - E| <= threshold.
std::vector<std::pair<int, int>> resonant_set(const LatticeRegion& region, double E, double C_V,
                                              double threshold);

struct OmegaPrime {
  int j0 = 0;
  int n0 = 0;
  double half_j = 0.0;
  double half_n = 0.0;
  bool contains(int j, int n) const {
    return std::abs(std::abs(j) - std::abs(j0)) <= half_j && std::abs(n - n0) <= half_n;
  }
  /// Strip for the region's (log T)^sigma around (j0, n0).
  static OmegaPrime around(const LatticeRegion& region, int j0, int n0);
};

/// m0 = mass outside |j| <= 4 D (log T)^sigma; m' = smallest mass outside Omega'
/// over the ten largest entries as centres.
Localization localization_profile(const FloquetMode& mode, const LatticeRegion& region);

struct LocalizationSummary {
  long modes = 0;
  double median = 0.0;
  double mean = 0.0;
  double max = 0.0;
  double threshold = 0.1;
  double fraction_below = 0.0;  // share of modes with outside mass <= threshold
};

LocalizationSummary summarize_localization(const FloquetSpectrum& spectrum,
                                           double threshold = 0.1);

/// xi' = chi_{Omega'} xi
FloquetMode truncate_mode(const FloquetMode& mode, const OmegaPrime& omega);

struct FloquetErrorCurve {
  std::vector<double> times;
  std::vector<double> errors;
  double lattice_residual = 0.0;
};

/// || e^{iEt} xi'(t) - S(t) xi'(0) ||, xi'(x, t) = sum xi'(j, n) e^{i(jx + nt/T)}.
FloquetErrorCurve floquet_solution_error(const LatticeOperator& H, const FloquetMode& mode,
                                         const PotentialSpec& V1,
                                         const std::vector<double>& times,
                                         const PropagatorConfig& cfg);

/// Inner products (phi~, xi_r) in raw order, phi placed on the n = 0 row.
Eigen::VectorXcd mode_expand(const FourierField& phi, const FloquetSpectrum& spectrum);
/// Sum_r c_r xi_r restricted to the n = 0 row.
FourierField mode_reconstruct(const Eigen::VectorXcd& coeffs, const FloquetSpectrum& spectrum);

struct IntermediateBandReport {
  std::vector<double> times;
  std::vector<double> ratios;
  double phi_norm = 0.0;
  double log_slope = 0.0;  // slope of log ratio against log(1 + t)
};

/// phi = (Pi_{J/2} - Pi_{2 J0}) u0; ratio ||Pi_{J/2} S(t) phi||_{H^s} / ||phi||_{H^s}.
IntermediateBandReport intermediate_band_experiment(const FourierField& u0,
                                                    const PotentialSpec& V, int J, int J0,
                                                    double s, double T,
                                                    const std::vector<double>& times,
                                                    const PropagatorConfig& cfg);

struct ModeRow {
  long k;
  double E;
  Localization loc;
  double residual;
};

void write_modes_csv(std::ostream& out, const std::vector<ModeRow>& rows);

}  // namespace kdvlab
