#include "kdvlab/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "kdvlab/oracle.hpp"

namespace kdvlab {

namespace {

constexpr cplx kI{0.0, 1.0};

std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t\r");
  const auto b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

}  // namespace

std::string scheme_name(Scheme s) {
  return s == Scheme::exp_midpoint ? "exp-midpoint" : "dense-oracle";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "exp-midpoint") return Scheme::exp_midpoint;
  if (name == "dense-oracle") return Scheme::dense_oracle;
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

std::string exp_method_name(ExpMethod m) {
  switch (m) {
    case ExpMethod::automatic:
      return "auto";
    case ExpMethod::pade:
      return "pade";
    case ExpMethod::tridiagonal:
      return "tridiagonal";
  }
  return "auto";
}

ExpMethod parse_exp_method(std::string_view name) {
  if (name == "auto") return ExpMethod::automatic;
  if (name == "pade") return ExpMethod::pade;
  if (name == "tridiagonal") return ExpMethod::tridiagonal;
  throw std::invalid_argument("unknown exponential method '" + std::string(name) + "'");
}

double PropagatorConfig::default_dt(int N) { return std::min(1e-2, 0.5 / std::max(N, 1)); }

void PropagatorConfig::validate() const {
  if (band_limit < 1) throw std::invalid_argument("propagator: band limit N must be >= 1");
  if (dt < 0 || !std::isfinite(dt)) throw std::invalid_argument("propagator: dt must be positive");
  if (!(conservation_tol > 0)) throw std::invalid_argument("propagator: tolerance must be positive");
  if (scheme == Scheme::dense_oracle && band_limit > 64)
    throw std::invalid_argument("dense oracle is limited to band limit 64");
}

Eigen::MatrixXcd hermitian_generator(const PotentialSpec& V, double t, int N) {
  if (N < 1) throw std::invalid_argument("generator: N must be >= 1");
  const int n = 2 * N + 1;
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n, n);
  for (int j = -N; j <= N; ++j) A(j + N, j + N) = static_cast<double>(j) * j * j;
  if (V.is_zero()) return A;
  const auto c = V.spatial_coefficients(t);
  const int b = static_cast<int>(c.size() / 2);
  for (int j = -N; j <= N; ++j)
    for (int k = -b; k <= b; ++k) {
      const int jp = j - k;
      if (jp < -N || jp > N) continue;
      A(j + N, jp + N) -= 0.5 * (j + jp) * c[k + b];
    }
  return A;
}

Eigen::MatrixXcd generator(const PotentialSpec& V, double t, int N) {
  return kI * hermitian_generator(V, t, N);
}

Eigen::VectorXcd apply_generator(const PotentialSpec& V, double t, const Eigen::VectorXcd& u) {
  const int N = static_cast<int>(u.size() / 2);
  Eigen::VectorXcd out(u.size());
  for (int j = -N; j <= N; ++j) out[j + N] = kI * (static_cast<double>(j) * j * j) * u[j + N];
  if (V.is_zero()) return out;
  const auto c = V.spatial_coefficients(t);
  const int b = static_cast<int>(c.size() / 2);
  for (int j = -N; j <= N; ++j) {
    cplx acc{};
    for (int k = -b; k <= b; ++k) {
      const int jp = j - k;
      if (jp < -N || jp > N) continue;
      acc += 0.5 * (j + jp) * c[k + b] * u[jp + N];
    }
    out[j + N] -= kI * acc;
  }
  return out;
}

Propagator::Propagator(PotentialSpec V, PropagatorConfig cfg)
    : V_(std::move(V)), cfg_(cfg), method_(cfg.exp_method), stationary_(V_.is_stationary()) {
  cfg_.validate();
  if (method_ == ExpMethod::automatic)
    method_ = V_.spatial_band() <= 1 ? ExpMethod::tridiagonal : ExpMethod::pade;
  if (method_ == ExpMethod::tridiagonal && V_.spatial_band() > 1)
    throw std::invalid_argument("tridiagonal exponential needs a potential of spatial band <= 1");
}

void Propagator::step(Eigen::MatrixXcd& U, double t_mid, double h) {
  const int N = cfg_.band_limit;
  if (method_ == ExpMethod::tridiagonal) {
    if (stationary_ && cached_tri_) {
      apply_exp_i(*cached_tri_, h, U);
      return;
    }
    const auto c = V_.spatial_coefficients(t_mid);
    const int b = static_cast<int>(c.size() / 2);
    const cplx v0 = c[b];
    const cplx v1 = b >= 1 ? c[b + 1] : cplx{};
    Eigen::VectorXd d(2 * N + 1);
    Eigen::VectorXcd sub(2 * N);
    for (int j = -N; j <= N; ++j) d[j + N] = static_cast<double>(j) * j * j - j * v0.real();
    for (int j = -N; j < N; ++j) sub[j + N] = -0.5 * (2 * j + 1) * v1;
    auto eig = std::make_unique<TridiagonalEigen>(hermitian_tridiagonal_eigen(d, sub));
    apply_exp_i(*eig, h, U);
    if (stationary_) cached_tri_ = std::move(eig);
    return;
  }
  if (stationary_) {
    if (!cached_herm_)
      cached_herm_ =
          std::make_unique<Eigen::MatrixXcd>(expm(kI * h * hermitian_generator(V_, t_mid, N)));
    U = (*cached_herm_) * U;
    return;
  }
  U = expm(kI * h * hermitian_generator(V_, t_mid, N)) * U;
}

void Propagator::advance(Eigen::MatrixXcd& U, double t0, double t1) {
  const int N = cfg_.band_limit;
  if (U.rows() != 2 * N + 1) throw std::invalid_argument("propagator: field band mismatch");
  if (t1 == t0) return;
  const Eigen::VectorXd before = U.colwise().norm();
  if (stationary_ && method_ == ExpMethod::tridiagonal) {
    // Midpoint rule is exact for a constant generator; one spectral step.
    step(U, 0.5 * (t0 + t1), t1 - t0);
  } else {
    const double span = t1 - t0;
    const auto steps = static_cast<long>(std::max(1.0, std::ceil(std::abs(span) / cfg_.step() - 1e-9)));
    const double h = span / static_cast<double>(steps);
    for (long k = 0; k < steps; ++k) step(U, t0 + (static_cast<double>(k) + 0.5) * h, h);
    // The cached Pade factor belongs to this step length only.
    cached_herm_.reset();
  }
  const Eigen::VectorXd after = U.colwise().norm();
  for (Eigen::Index c = 0; c < U.cols(); ++c) {
    if (before[c] == 0.0) continue;
    const double drift = std::abs(after[c] - before[c]) / before[c];
    if (!(drift <= cfg_.conservation_tol)) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "L2 drift %.3e exceeds tolerance %.1e over [%g, %g] (N=%d, method %s)", drift,
                    cfg_.conservation_tol, t0, t1, N, exp_method_name(method_).c_str());
      throw ConservationFailure(buf);
    }
  }
}

FourierField Propagator::advance(const FourierField& u, double t0, double t1) {
  if (u.band_limit() > cfg_.band_limit)
    throw std::invalid_argument("initial field band exceeds propagator band limit");
  Eigen::MatrixXcd U = u.resized(cfg_.band_limit).coefficients();
  advance(U, t0, t1);
  return FourierField(cfg_.band_limit, U.col(0));
}

FourierField propagate(const FourierField& u0, const PotentialSpec& V, double t0, double t1,
                       const PropagatorConfig& cfg) {
  cfg.validate();
  if (u0.band_limit() > cfg.band_limit)
    throw std::invalid_argument("initial field band exceeds propagator band limit");
  if (cfg.scheme == Scheme::dense_oracle)
    return dense_oracle(u0.resized(cfg.band_limit), V, t0, t1, cfg.oracle_tol);
  Propagator p(V, cfg);
  return p.advance(u0, t0, t1);
}

double duhamel_error(double residual_norm, double t) {
  if (!(residual_norm >= 0)) throw std::invalid_argument("duhamel_error: residual must be >= 0");
  if (!(t >= 0)) throw std::invalid_argument("duhamel_error: t must be >= 0");
  return residual_norm * std::abs(t);
}

int GrowthTrace::column(double s) const {
  for (std::size_t k = 0; k < s_list.size(); ++k)
    if (std::abs(s_list[k] - s) < 1e-12) return static_cast<int>(k);
  throw std::invalid_argument("trace has no column for s=" + std::to_string(s));
}

std::vector<double> GrowthTrace::series(double s) const {
  const int k = column(s);
  std::vector<double> out;
  out.reserve(norms.size());
  for (const auto& row : norms) out.push_back(row[k]);
  return out;
}

void GrowthTrace::validate() const {
  if (norms.size() != times.size()) throw std::invalid_argument("trace: row count mismatch");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("trace: times must increase");
  for (const auto& row : norms) {
    if (row.size() != s_list.size()) throw std::invalid_argument("trace: column count mismatch");
    for (double v : row)
      if (!(v >= 0)) throw std::invalid_argument("trace: norms must be nonnegative");
  }
}

GrowthTrace trace_norms(const FourierField& u0, const PotentialSpec& V,
                        const std::vector<double>& times, const std::vector<double>& s_list,
                        const PropagatorConfig& cfg) {
  if (times.empty()) throw std::invalid_argument("trace_norms: empty time grid");
  if (times.front() < 0) throw std::invalid_argument("trace_norms: times start at 0");
  if (u0.band_limit() > cfg.band_limit)
    throw std::invalid_argument("trace_norms: initial data exceeds the band limit");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw std::invalid_argument("trace_norms: times must be strictly increasing");
  std::vector<SobolevWeight> weights;
  for (double s : s_list) weights.emplace_back(s);

  GrowthTrace tr;
  tr.times = times;
  tr.s_list = s_list;
  char fp[200];
  std::snprintf(fp, sizeof fp, "N=%d;dt=%.17g;scheme=%s;exp=%s;tol=%.3g", cfg.band_limit,
                cfg.step(), scheme_name(cfg.scheme).c_str(), exp_method_name(cfg.exp_method).c_str(),
                cfg.conservation_tol);
  tr.fingerprint = fp;

  auto record = [&](const FourierField& u) {
    std::vector<double> row;
    for (const auto& w : weights) row.push_back(sobolev_norm(u, w));
    tr.norms.push_back(std::move(row));
  };

  FourierField u = u0.resized(cfg.band_limit);
  double t = 0.0;
  if (cfg.scheme == Scheme::dense_oracle) {
    for (double ti : times) {
      u = propagate(u, V, t, ti, cfg);
      t = ti;
      record(u);
    }
    return tr;
  }
  Propagator p(V, cfg);
  for (double ti : times) {
    u = p.advance(u, t, ti);
    t = ti;
    record(u);
  }
  return tr;
}

void write_trace_csv(std::ostream& out, const GrowthTrace& trace) {
  out << "t";
  char buf[64];
  for (double s : trace.s_list) {
    std::snprintf(buf, sizeof buf, ", s=%g", s);
    out << buf;
  }
  out << "\n";
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", trace.times[i]);
    out << buf;
    for (double v : trace.norms[i]) {
      std::snprintf(buf, sizeof buf, ", %.17g", v);
      out << buf;
    }
    out << "\n";
  }
}

GrowthTrace read_trace_csv(std::istream& in) {
  GrowthTrace tr;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("trace csv: empty input");
  {
    std::istringstream hs(line);
    std::string cell;
    bool first = true;
    while (std::getline(hs, cell, ',')) {
      cell = trim(cell);
      if (first) {
        if (cell != "t") throw std::invalid_argument("trace csv: first column must be 't'");
        first = false;
        continue;
      }
      if (cell.rfind("s=", 0) != 0) throw std::invalid_argument("trace csv: bad column '" + cell + "'");
      tr.s_list.push_back(std::stod(cell.substr(2)));
    }
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ls, cell, ',')) vals.push_back(std::stod(trim(cell)));
    if (vals.size() != tr.s_list.size() + 1)
      throw std::invalid_argument("trace csv: wrong column count on line " + std::to_string(lineno));
    tr.times.push_back(vals[0]);
    tr.norms.emplace_back(vals.begin() + 1, vals.end());
  }
  tr.validate();
  return tr;
}

}  // namespace kdvlab
