#include "kdvlab/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/Eigenvalues>

#include "kdvlab/fitting.hpp"

namespace kdvlab {

double LatticeRegion::log_scale() const { return std::pow(std::log(T), sigma); }

LatticeRegion build_region(double T, double s_cap, double D, double sigma, const RegionCaps& caps) {
  if (!(T > std::numbers::e)) throw std::invalid_argument("lattice region requires T > e");
  if (!(D > 0)) throw std::invalid_argument("lattice region requires D > 0");
  if (!(sigma > 0)) throw std::invalid_argument("lattice region requires sigma > 0");
  if (!(s_cap >= 0)) throw std::invalid_argument("lattice region requires s >= 0");
  if (caps.J_cap < 0) throw std::invalid_argument("lattice region: J cap must be >= 0");
  LatticeRegion r;
  r.T = T;
  r.sigma = sigma;
  r.D = D;
  const double nm = std::ceil(D * T * r.log_scale() - 1e-9);
  if (nm > 1e9) throw std::invalid_argument("lattice region: n_max overflows");
  r.n_max = static_cast<int>(nm);
  r.J_asymptotic = std::pow(T, 10.0 * s_cap);
  if (r.J_asymptotic > caps.J_cap) {
    r.J_max = caps.J_cap;
    r.j_truncated = true;
  } else {
    r.J_max = static_cast<int>(std::floor(r.J_asymptotic));
  }
  if (r.sites() > caps.max_sites)
    throw std::invalid_argument("lattice region has " + std::to_string(r.sites()) +
                                " sites, above the cap of " + std::to_string(caps.max_sites));
  return r;
}

double lattice_norm(const LatticeVector& v) {
  double acc = 0;
  for (const auto& e : v) acc += std::norm(e.value);
  return std::sqrt(acc);
}

LatticeOperator::LatticeOperator(LatticeRegion region, CoefficientTable kernel)
    : region_(region), kernel_(std::move(kernel)) {
  for (int k = -kernel_.j_band(); k <= kernel_.j_band(); ++k)
    for (int m = -kernel_.n_band(); m <= kernel_.n_band(); ++m) {
      const cplx c = kernel_.at(k, m);
      if (c != cplx{}) taps_.push_back({{k, m}, c});
    }
}

cplx LatticeOperator::entry(int j, int n, int jp, int np) const {
  cplx v = -0.5 * (j + jp) * kernel_.at(j - jp, n - np);
  if (j == jp && n == np) v += static_cast<double>(j) * j * j - n / region_.T;
  return v;
}

Eigen::MatrixXcd LatticeOperator::row_block(int n) const {
  const int J = region_.J_max;
  Eigen::MatrixXcd B(2 * J + 1, 2 * J + 1);
  for (int j = -J; j <= J; ++j)
    for (int jp = -J; jp <= J; ++jp) B(j + J, jp + J) = entry(j, n, jp, n);
  return B;
}

Eigen::MatrixXcd LatticeOperator::dense(long max_sites) const {
  const long S = region_.sites();
  if (S > max_sites)
    throw std::invalid_argument("dense lattice operator limited to " + std::to_string(max_sites) +
                                " sites, region has " + std::to_string(S));
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(S, S);
  for (long a = 0; a < S; ++a) {
    const auto [j, n] = region_.site(a);
    H(a, a) += static_cast<double>(j) * j * j - n / region_.T;
    for (const auto& [km, c] : taps_) {
      const int jt = j + km.first, nt = n + km.second;
      if (!region_.contains(jt, nt)) continue;
      H(region_.index(jt, nt), a) += -0.5 * (jt + j) * c;
    }
  }
  return H;
}

LatticeVector LatticeOperator::apply(const LatticeVector& v) const {
  std::unordered_map<long, cplx> acc;
  acc.reserve(v.size() * (taps_.size() + 1));
  for (const auto& e : v) {
    if (!region_.contains(e.j, e.n)) throw std::invalid_argument("lattice vector leaves region");
    acc[region_.index(e.j, e.n)] += (static_cast<double>(e.j) * e.j * e.j - e.n / region_.T) * e.value;
    for (const auto& [km, c] : taps_) {
      const int jt = e.j + km.first, nt = e.n + km.second;
      if (!region_.contains(jt, nt)) continue;
      acc[region_.index(jt, nt)] += -0.5 * (jt + e.j) * c * e.value;
    }
  }
  std::vector<long> keys;
  keys.reserve(acc.size());
  for (const auto& kv : acc) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());
  LatticeVector out;
  out.reserve(keys.size());
  for (long k : keys) {
    const auto [j, n] = region_.site(k);
    out.push_back({j, n, acc[k]});
  }
  return out;
}

double LatticeOperator::norm_bound() const {
  const int J = region_.J_max;
  double best = 0;
  for (int j = -J; j <= J; ++j) {
    double row = std::abs(static_cast<double>(j) * j * j) + region_.n_max / region_.T;
    for (const auto& [km, c] : taps_) row += 0.5 * std::abs(2.0 * j + km.first) * std::abs(c);
    best = std::max(best, row);
  }
  return best;
}

double LatticeOperator::hermiticity_residual() const {
  // H(a, b) - conj(H(b, a)) only involves the kernel's reality defect.
  const int J = region_.J_max;
  double worst = 0;
  for (const auto& [km, c] : taps_) {
    const cplx defect = c - std::conj(kernel_.at(-km.first, -km.second));
    if (defect == cplx{}) continue;
    for (int j = -J; j <= J; ++j)
      if (std::abs(j + km.first) <= J)
        worst = std::max(worst, 0.5 * std::abs(2.0 * j + km.first) * std::abs(defect));
  }
  return worst;
}

LatticeOperator assemble_H(const PotentialSpec& V2, const LatticeRegion& region) {
  if (!V2.is_table()) throw std::invalid_argument("assemble_H: V2 must be a band-truncated table");
  if (V2.envelope() != Envelope::none)
    throw std::invalid_argument("assemble_H: V2 must not carry an envelope");
  const auto& tab = V2.table();
  if (tab.n_band() > 0 && std::abs(tab.time_scale() - region.T) > 1e-12 * region.T)
    throw std::invalid_argument("assemble_H: V2 time scale differs from the region's T");
  return LatticeOperator(region, tab);
}

long FloquetSpectrum::size() const {
  return block_ ? region_.sites() : static_cast<long>(values_.size());
}

double FloquetSpectrum::raw_eigenvalue(long r) const {
  if (!block_) return values_[r];
  const long rows = region_.row_size();
  const int n0 = static_cast<int>(r / rows) - region_.n_max;
  return values_[r % rows] - n0 / region_.T;
}

FloquetMode FloquetSpectrum::raw_mode(long r) const {
  FloquetMode m;
  m.E = raw_eigenvalue(r);
  if (block_) {
    const long rows = region_.row_size();
    const int n0 = static_cast<int>(r / rows) - region_.n_max;
    const long k = r % rows;
    for (int j = -region_.J_max; j <= region_.J_max; ++j) {
      const cplx v = vectors_(j + region_.J_max, k);
      if (v != cplx{}) m.xi.push_back({j, n0, v});
    }
    return m;
  }
  for (long a = 0; a < vectors_.rows(); ++a) {
    const cplx v = vectors_(a, r);
    if (v == cplx{}) continue;
    const auto [j, n] = region_.site(a);
    m.xi.push_back({j, n, v});
  }
  return m;
}

long FloquetSpectrum::raw_index(long k) const {
  std::call_once(order_->once, [this] {
    auto& p = order_->perm;
    p.resize(size());
    std::iota(p.begin(), p.end(), 0L);
    std::stable_sort(p.begin(), p.end(),
                     [this](long a, long b) { return raw_eigenvalue(a) < raw_eigenvalue(b); });
  });
  return order_->perm.at(k);
}

FloquetSpectrum eigendecompose(const LatticeOperator& H, long max_dense) {
  FloquetSpectrum out;
  out.region_ = H.region();
  const double tol = 1e-10 * H.norm_bound();
  if (H.block_diagonal()) {
    out.block_ = true;
    const Eigen::MatrixXcd B = H.row_block(0);
    if (H.kernel().j_band() <= 1) {
      const Eigen::Index n = B.rows();
      Eigen::VectorXd d = B.diagonal().real();
      Eigen::VectorXcd sub(std::max<Eigen::Index>(n - 1, 0));
      for (Eigen::Index k = 0; k + 1 < n; ++k) sub[k] = B(k + 1, k);
      if (n == 1) {
        out.values_ = d;
        out.vectors_ = Eigen::MatrixXcd::Identity(1, 1);
      } else {
        const auto eig = hermitian_tridiagonal_eigen(d, sub);
        out.values_ = eig.values;
        out.vectors_ = eig.phase.asDiagonal() * eig.vectors.cast<cplx>();
      }
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(B);
      if (es.info() != Eigen::Success)
        throw NumericalError("row eigensolve failed to converge (size " +
                             std::to_string(B.rows()) + ")");
      out.values_ = es.eigenvalues();
      out.vectors_ = es.eigenvectors();
    }
    const Eigen::MatrixXcd R = B * out.vectors_ - out.vectors_ * out.values_.asDiagonal();
    out.max_residual_ = R.colwise().norm().maxCoeff();
  } else {
    const Eigen::MatrixXcd D = H.dense(max_dense);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(D);
    if (es.info() != Eigen::Success)
      throw NumericalError("dense eigensolve failed to converge (size " +
                           std::to_string(D.rows()) + ")");
    out.values_ = es.eigenvalues();
    out.vectors_ = es.eigenvectors();
    const Eigen::MatrixXcd R = D * out.vectors_ - out.vectors_ * out.values_.asDiagonal();
    out.max_residual_ = R.colwise().norm().maxCoeff();
  }
  if (!(out.max_residual_ <= tol)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "eigenpair residual %.3e above %.3e (||H|| <= %.3e)",
                  out.max_residual_, tol, H.norm_bound());
    throw NumericalError(buf);
  }
  return out;
}

double lattice_residual(const LatticeOperator& H, const FloquetMode& mode) {
  const auto& reg = H.region();
  std::unordered_map<long, cplx> acc;
  for (const auto& e : H.apply(mode.xi)) acc[reg.index(e.j, e.n)] += e.value;
  for (const auto& e : mode.xi) acc[reg.index(e.j, e.n)] -= mode.E * e.value;
  double s = 0;
  for (const auto& kv : acc) s += std::norm(kv.second);
  return std::sqrt(s);
}

std::vector<std::pair<int, int>> resonant_set(const LatticeRegion& region, double E, double C_V,
                                              double threshold) {
  if (!(threshold > 0)) throw std::invalid_argument("resonant_set: threshold must be positive");
  std::vector<std::pair<int, int>> out;
  const double T = region.T;
  for (int j = -region.J_max; j <= region.J_max; ++j) {
    const double x = static_cast<double>(j) * j * j + C_V * j - E;
    const double lo = std::max(-static_cast<double>(region.n_max), std::floor(T * (x - threshold)) - 1);
    const double hi = std::min(static_cast<double>(region.n_max), std::ceil(T * (x + threshold)) + 1);
    for (double nn = lo; nn <= hi; nn += 1.0) {
      const int n = static_cast<int>(nn);
      if (std::abs(x - n / T) <= threshold) out.emplace_back(j, n);
    }
  }
  return out;
}

OmegaPrime OmegaPrime::around(const LatticeRegion& region, int j0, int n0) {
  const double L = region.log_scale();
  return {j0, n0, L, region.T * L};
}

Localization localization_profile(const FloquetMode& mode, const LatticeRegion& region) {
  Localization loc;
  const double L = region.log_scale();
  const double omega0 = 4.0 * region.D * L;
  double out0 = 0;
  for (const auto& e : mode.xi)
    if (std::abs(e.j) > omega0) out0 += std::norm(e.value);
  loc.m0 = std::min(1.0, std::sqrt(out0));

  std::vector<std::size_t> idx(mode.xi.size());
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t top = std::min<std::size_t>(10, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + top, idx.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(mode.xi[a].value) > std::abs(mode.xi[b].value);
  });
  loc.m_prime = 1.0;
  int cj = 0, cn = 0;
  for (std::size_t c = 0; c < top; ++c) {
    const auto& centre = mode.xi[idx[c]];
    const auto om = OmegaPrime::around(region, centre.j, centre.n);
    double out = 0;
    for (const auto& e : mode.xi)
      if (!om.contains(e.j, e.n)) out += std::norm(e.value);
    const double m = std::min(1.0, std::sqrt(out));
    if (m < loc.m_prime) {
      loc.m_prime = m;
      cj = centre.j;
      cn = centre.n;
    }
  }
  if (top > 0 && loc.m_prime == 1.0) {
    cj = mode.xi[idx[0]].j;
    cn = mode.xi[idx[0]].n;
  }
  if (loc.m0 <= loc.m_prime) {
    loc.scenario = "Omega0";
    loc.outside_mass = loc.m0;
    if (top > 0) {
      loc.j0 = mode.xi[idx[0]].j;
      loc.n0 = mode.xi[idx[0]].n;
    }
  } else {
    loc.scenario = "Omega'";
    loc.outside_mass = loc.m_prime;
    loc.j0 = cj;
    loc.n0 = cn;
  }
  return loc;
}

LocalizationSummary summarize_localization(const FloquetSpectrum& spectrum, double threshold) {
  LocalizationSummary s;
  s.threshold = threshold;
  s.modes = spectrum.size();
  std::vector<double> masses;
  if (spectrum.block_structured()) {
    // Every row carries the same vectors, so each row value has equal multiplicity.
    const long rows = spectrum.region().row_size();
    const long base = static_cast<long>(spectrum.region().n_max) * rows;
    for (long k = 0; k < rows; ++k)
      masses.push_back(localization_profile(spectrum.raw_mode(base + k), spectrum.region()).outside_mass);
  } else {
    for (long r = 0; r < spectrum.size(); ++r)
      masses.push_back(localization_profile(spectrum.raw_mode(r), spectrum.region()).outside_mass);
  }
  if (masses.empty()) return s;
  std::vector<double> sorted = masses;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  s.median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(m);
  s.max = sorted.back();
  s.fraction_below = static_cast<double>(std::count_if(sorted.begin(), sorted.end(),
                                                       [&](double v) { return v <= threshold; })) /
                     static_cast<double>(m);
  return s;
}

FloquetMode truncate_mode(const FloquetMode& mode, const OmegaPrime& omega) {
  FloquetMode out;
  out.E = mode.E;
  for (const auto& e : mode.xi)
    if (omega.contains(e.j, e.n)) out.xi.push_back(e);
  return out;
}

FloquetErrorCurve floquet_solution_error(const LatticeOperator& H, const FloquetMode& mode,
                                         const PotentialSpec& V1,
                                         const std::vector<double>& times,
                                         const PropagatorConfig& cfg) {
  const double T = H.region().T;
  const int N = cfg.band_limit;
  for (const auto& e : mode.xi)
    if (std::abs(e.j) > N)
      throw std::invalid_argument("floquet_solution_error: mode exceeds the propagation band");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0 || times[i] > T * (1 + 1e-12))
      throw std::invalid_argument("floquet_solution_error: times must lie in [0, T]");
    if (i > 0 && !(times[i] > times[i - 1]))
      throw std::invalid_argument("floquet_solution_error: times must increase");
  }
  // Spatial profile of the approximate solution at time t, without the e^{iEt} phase.
  auto profile = [&](double t) {
    FourierField f(N);
    for (const auto& e : mode.xi) f[e.j] += e.value * std::polar(1.0, e.n * t / T);
    return f;
  };
  FloquetErrorCurve curve;
  curve.lattice_residual = lattice_residual(H, mode);
  Propagator prop(V1, cfg);
  FourierField u = profile(0.0);
  double t = 0.0;
  for (double ti : times) {
    u = prop.advance(u, t, ti);
    t = ti;
    FourierField ubar = std::polar(1.0, mode.E * ti) * profile(ti);
    curve.times.push_back(ti);
    curve.errors.push_back(l2_norm(ubar - u));
  }
  return curve;
}

Eigen::VectorXcd mode_expand(const FourierField& phi, const FloquetSpectrum& spectrum) {
  const auto& reg = spectrum.region();
  if (phi.band_limit() > reg.J_max)
    throw std::invalid_argument("mode_expand: field band exceeds J_max");
  const Eigen::VectorXcd f = phi.resized(reg.J_max).coefficients();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(spectrum.size());
  if (spectrum.block_structured()) {
    const long base = static_cast<long>(reg.n_max) * reg.row_size();
    out.segment(base, reg.row_size()) = spectrum.row_vectors().adjoint() * f;
    return out;
  }
  const long base = reg.index(-reg.J_max, 0);
  out = spectrum.row_vectors().middleRows(base, reg.row_size()).adjoint() * f;
  return out;
}

FourierField mode_reconstruct(const Eigen::VectorXcd& coeffs, const FloquetSpectrum& spectrum) {
  const auto& reg = spectrum.region();
  if (coeffs.size() != spectrum.size())
    throw std::invalid_argument("mode_reconstruct: coefficient count mismatch");
  if (spectrum.block_structured()) {
    const long base = static_cast<long>(reg.n_max) * reg.row_size();
    return FourierField(reg.J_max, spectrum.row_vectors() * coeffs.segment(base, reg.row_size()));
  }
  const long base = reg.index(-reg.J_max, 0);
  return FourierField(reg.J_max, spectrum.row_vectors().middleRows(base, reg.row_size()) * coeffs);
}

IntermediateBandReport intermediate_band_experiment(const FourierField& u0,
                                                    const PotentialSpec& V, int J, int J0,
                                                    double s, double T,
                                                    const std::vector<double>& times,
                                                    const PropagatorConfig& cfg) {
  if (J0 < 1) throw std::invalid_argument("intermediate band: J0 must be >= 1");
  if (!(2 * J0 < J / 2)) throw std::invalid_argument("intermediate band: need 2 J0 < J/2");
  if (J % 4 != 0) throw std::invalid_argument("intermediate band: J must be divisible by 4");
  if (u0.band_limit() > cfg.band_limit)
    throw std::invalid_argument("intermediate band: u0 exceeds the propagation band");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0 || times[i] > T) throw std::invalid_argument("intermediate band: times must lie in [0, T]");
    if (i > 0 && !(times[i] > times[i - 1])) throw std::invalid_argument("intermediate band: times must increase");
  }
  const ProjectionProfile half(J / 2), low(2 * J0);
  const SobolevWeight w(s);
  const FourierField phi = project_difference(u0.resized(cfg.band_limit), half, low);
  IntermediateBandReport rep;
  rep.phi_norm = sobolev_norm(phi, w);
  if (!(rep.phi_norm > 0)) throw std::invalid_argument("intermediate band: phi vanishes");
  Propagator prop(V, cfg);
  FourierField u = phi;
  double t = 0.0;
  std::vector<double> lx, ly;
  for (double ti : times) {
    u = prop.advance(u, t, ti);
    t = ti;
    const double r = sobolev_norm(project(u, half), w) / rep.phi_norm;
    rep.times.push_back(ti);
    rep.ratios.push_back(r);
    if (ti > 0 && r > 0) {
      lx.push_back(std::log1p(ti));
      ly.push_back(std::log(r));
    }
  }
  if (lx.size() >= 2) rep.log_slope = fit_line(lx, ly).slope;
  return rep;
}

void write_modes_csv(std::ostream& out, const std::vector<ModeRow>& rows) {
  out << "k, E, scenario, j0, n0, outside_mass, residual\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%ld, %.17g, %s, %d, %d, %.17g, %.17g\n", r.k, r.E,
                  r.loc.scenario.c_str(), r.loc.j0, r.loc.n0, r.loc.outside_mass, r.residual);
    out << buf;
  }
}

}  // namespace kdvlab
