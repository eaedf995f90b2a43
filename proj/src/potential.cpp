#include "kdvlab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fftw3.h>

namespace kdvlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

// Ordinary least squares slope and intercept.
std::pair<double, double> ols(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxx > 0 ? sxy / sxx : 0.0;
  return {slope, my - slope * mx};
}

double wrap_period(double t, double T) {
  const double P = 2.0 * kPi * T;
  return t - P * std::round(t / P);
}

// max_x |sum_k c_k e^{ikx}| for a real trigonometric polynomial given by its
// coefficients (index k + band).
double trig_sup(const std::vector<cplx>& c) {
  const int band = static_cast<int>(c.size() / 2);
  auto f = [&](double x) {
    cplx acc = c[band];
    for (int k = 1; k <= band; ++k) {
      const cplx e = std::polar(1.0, k * x);
      acc += c[band + k] * e + c[band - k] * std::conj(e);
    }
    return std::abs(acc.real());
  };
  const int M = std::max(64, 16 * band);
  const double h = 2.0 * kPi / M;
  std::vector<std::pair<double, int>> samples(M);
  for (int m = 0; m < M; ++m) samples[m] = {f(m * h), m};
  std::partial_sort(samples.begin(), samples.begin() + std::min(M, 4), samples.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first; });
  double best = samples[0].first;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int r = 0; r < std::min(M, 4); ++r) {
    double a = samples[r].second * h - h, b = samples[r].second * h + h;
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 80 && b - a > 1e-14; ++it) {
      if (f1 > f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - g * (b - a);
        f1 = f(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + g * (b - a);
        f2 = f(x2);
      }
    }
    best = std::max({best, f1, f2});
  }
  return best;
}

}  // namespace

double envelope_value(Envelope e, double t) {
  switch (e) {
    case Envelope::none:
      return 1.0;
    case Envelope::inverse_linear:
      return 1.0 / (1.0 + std::abs(t));
  }
  return 1.0;
}

std::string envelope_name(Envelope e) {
  return e == Envelope::none ? "none" : "inverse-linear";
}

Envelope parse_envelope(std::string_view name) {
  if (name == "none") return Envelope::none;
  if (name == "inverse-linear") return Envelope::inverse_linear;
  throw std::invalid_argument("unknown envelope '" + std::string(name) + "'");
}

void Regularization::validate() const {
  if (!(T > 0)) throw std::invalid_argument("regularization: T must be positive");
  if (!(alpha > 1)) throw std::invalid_argument("regularization: alpha must exceed 1");
  if (!(delta > 0)) throw std::invalid_argument("regularization: delta must be positive");
  if (!(sigma > sigma_prime && sigma_prime > sigma_second && sigma_second > 2 * alpha + delta))
    throw std::invalid_argument(
        "regularization: need sigma > sigma' > sigma'' > 2 alpha + delta");
  if (!(alpha + delta > 2)) throw std::invalid_argument("regularization: need alpha + delta > 2");
  if (!(D > 2 * kPi)) throw std::invalid_argument("regularization: D must exceed 2 pi");
}

CoefficientTable::CoefficientTable(int j_band, int n_band, double time_scale)
    : jb_(j_band), nb_(n_band), tau_(time_scale),
      data_(static_cast<std::size_t>(2 * j_band + 1) * (2 * n_band + 1)) {
  if (j_band < 0 || n_band < 0) throw std::invalid_argument("table bands must be nonnegative");
  if (!(time_scale > 0)) throw std::invalid_argument("table time scale must be positive");
}

cplx CoefficientTable::at(int j, int n) const {
  if (std::abs(j) > jb_ || std::abs(n) > nb_) return {};
  return data_[static_cast<std::size_t>(j + jb_) * (2 * nb_ + 1) + (n + nb_)];
}

cplx& CoefficientTable::ref(int j, int n) {
  if (std::abs(j) > jb_ || std::abs(n) > nb_) throw std::out_of_range("table index");
  return data_[static_cast<std::size_t>(j + jb_) * (2 * nb_ + 1) + (n + nb_)];
}

bool CoefficientTable::respects_reality(double tol) const {
  const double scale = std::max(max_abs(), 1e-300);
  for (int j = -jb_; j <= jb_; ++j)
    for (int n = -nb_; n <= nb_; ++n)
      if (std::abs(at(-j, -n) - std::conj(at(j, n))) > tol * scale) return false;
  return true;
}

bool CoefficientTable::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](cplx c) { return c == cplx{}; });
}

double CoefficientTable::max_abs() const {
  double m = 0;
  for (const auto& c : data_) m = std::max(m, std::abs(c));
  return m;
}

GevreyBump::GevreyBump(double alpha) : alpha_(alpha) {
  if (!(alpha > 1.0)) throw std::invalid_argument("Gevrey order alpha must exceed 1");
}

double GevreyBump::operator()(double tau) const {
  const double a_tau = std::abs(tau);
  if (a_tau <= 1.0) return 1.0;
  if (a_tau >= kPi) return 0.0;
  const double p = 1.0 / (alpha_ - 1.0);
  auto h = [p](double a) { return a <= 0.0 ? 0.0 : std::exp(-std::pow(a, -p)); };
  const double a = (kPi - a_tau) / (kPi - 1.0);
  const double ha = h(a), hb = h(1.0 - a);
  return ha / (ha + hb);
}

PotentialSpec::PotentialSpec(CoefficientTable table, Envelope envelope,
                             std::optional<Regularization> regularization)
    : table_(std::move(table)), envelope_(envelope), reg_(std::move(regularization)) {
  if (!table_.respects_reality(1e-12))
    throw std::invalid_argument("potential table violates c(-j,-n) = conj(c(j,n))");
  if (reg_) reg_->validate();
}

PotentialSpec PotentialSpec::periodized(const PotentialSpec& base, const GevreyBump& bump,
                                        double T) {
  if (!(T > 0)) throw std::invalid_argument("periodize: T must be positive");
  PotentialSpec out;
  out.periodic_ = std::make_shared<const Periodic>(
      Periodic{std::make_shared<const PotentialSpec>(base), bump, T});
  out.reg_ = base.reg_;
  return out;
}

const CoefficientTable& PotentialSpec::table() const {
  if (periodic_) throw std::logic_error("periodized potential has no finite table");
  return table_;
}

double PotentialSpec::period_scale() const {
  if (!periodic_) throw std::logic_error("table potential has no periodization scale");
  return periodic_->T;
}

const GevreyBump& PotentialSpec::bump() const {
  if (!periodic_) throw std::logic_error("table potential has no bump");
  return periodic_->bump;
}

const PotentialSpec& PotentialSpec::base() const {
  if (!periodic_) throw std::logic_error("table potential has no base");
  return *periodic_->base;
}

int PotentialSpec::spatial_band() const {
  return periodic_ ? periodic_->base->spatial_band() : table_.j_band();
}

bool PotentialSpec::is_zero() const {
  return periodic_ ? periodic_->base->is_zero() : table_.is_zero();
}

bool PotentialSpec::is_stationary() const {
  if (is_zero()) return true;
  if (periodic_) return false;
  if (envelope_ != Envelope::none) return false;
  for (int j = -table_.j_band(); j <= table_.j_band(); ++j)
    for (int n = -table_.n_band(); n <= table_.n_band(); ++n)
      if (n != 0 && table_.at(j, n) != cplx{}) return false;
  return true;
}

void PotentialSpec::spatial_coefficients(double t, std::vector<cplx>& out) const {
  if (periodic_) {
    const double tw = wrap_period(t, periodic_->T);
    periodic_->base->spatial_coefficients(tw, out);
    const double phi = periodic_->bump(tw / periodic_->T);
    for (auto& c : out) c *= phi;
    return;
  }
  const int jb = table_.j_band(), nb = table_.n_band();
  out.assign(2 * jb + 1, cplx{});
  const double a = envelope_value(envelope_, t);
  for (int n = -nb; n <= nb; ++n) {
    const cplx phase = a * std::polar(1.0, n * t / table_.time_scale());
    for (int j = -jb; j <= jb; ++j) out[j + jb] += table_.at(j, n) * phase;
  }
}

std::vector<cplx> PotentialSpec::spatial_coefficients(double t) const {
  std::vector<cplx> out;
  spatial_coefficients(t, out);
  return out;
}

cplx PotentialSpec::eval_complex(double x, double t) const {
  const auto c = spatial_coefficients(t);
  const int band = static_cast<int>(c.size() / 2);
  cplx acc{};
  for (int k = -band; k <= band; ++k) acc += c[k + band] * std::polar(1.0, k * x);
  return acc;
}

cplx PotentialSpec::eval_x_complex(double x, double t) const {
  const auto c = spatial_coefficients(t);
  const int band = static_cast<int>(c.size() / 2);
  cplx acc{};
  for (int k = -band; k <= band; ++k)
    acc += kI * static_cast<double>(k) * c[k + band] * std::polar(1.0, k * x);
  return acc;
}

double PotentialSpec::eval(double x, double t) const { return eval_complex(x, t).real(); }
double PotentialSpec::eval_x(double x, double t) const { return eval_x_complex(x, t).real(); }

PotentialSpec make_preset(std::string_view name, double kappa) {
  if (name == "zero") return PotentialSpec(CoefficientTable(0, 0, 1.0));
  if (name == "decaying-envelope") {
    // kappa sin(x + t) = kappa (e^{i(x+t)} - e^{-i(x+t)}) / 2i
    CoefficientTable tab(1, 1, 1.0);
    tab.set(1, 1, -kI * kappa / 2.0);
    tab.set(-1, -1, kI * kappa / 2.0);
    return PotentialSpec(tab, Envelope::inverse_linear);
  }
  if (name == "stationary") {
    CoefficientTable tab(1, 0, 1.0);
    tab.set(1, 0, kappa / 2.0);
    tab.set(-1, 0, kappa / 2.0);
    return PotentialSpec(tab);
  }
  if (name == "analytic-band") {
    CoefficientTable tab(8, 1, 1.0);
    for (int k = 1; k <= 8; ++k) {
      const double c = kappa * std::exp(-0.5 * k) / 2.0;
      tab.set(k, -1, c);
      tab.set(-k, 1, c);
    }
    return PotentialSpec(tab);
  }
  throw std::invalid_argument("unknown potential preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() {
  return {"zero", "decaying-envelope", "stationary", "analytic-band"};
}

std::pair<int, int> truncation_rectangle(double T, double sigma) {
  if (!(T > std::numbers::e))
    throw std::invalid_argument("band truncation requires T > e");
  const double L = std::pow(std::log(T), sigma);
  // Inclusive comparison; the slack absorbs rounding in log(e^k)^sigma.
  return {static_cast<int>(std::floor(L + 1e-9)), static_cast<int>(std::floor(T * L + 1e-9))};
}

CoefficientTable fourier_table(const PotentialSpec& V, double T, int j_max, int n_max) {
  CoefficientTable out(j_max, n_max, T);
  if (V.is_table()) {
    const auto& tab = V.table();
    if (V.envelope() != Envelope::none)
      throw std::invalid_argument("fourier_table: enveloped potentials must be periodized first");
    if (tab.n_band() > 0 && std::abs(tab.time_scale() - T) > 1e-12 * T)
      throw std::invalid_argument("fourier_table: table time scale differs from T");
    for (int j = -j_max; j <= j_max; ++j)
      for (int n = -n_max; n <= n_max; ++n) out.set(j, n, tab.at(j, n));
    return out;
  }
  // Trapezoid rule over one period [-pi T, pi T) is spectrally accurate for the
  // smooth periodic integrand; the FFT evaluates all n at once.
  int M = 4096;
  while (M < 4 * (2 * n_max + 1)) M *= 2;
  const int jb = std::min(j_max, V.spatial_band());
  std::vector<std::vector<cplx>> samples(2 * jb + 1, std::vector<cplx>(M));
  std::vector<cplx> c;
  for (int m = 0; m < M; ++m) {
    const double t = -kPi * T + 2.0 * kPi * T * m / M;
    V.spatial_coefficients(t, c);
    const int band = static_cast<int>(c.size() / 2);
    for (int j = -jb; j <= jb; ++j) samples[j + jb][m] = std::abs(j) <= band ? c[j + band] : 0.0;
  }
  std::vector<cplx> buf(M);
  fftw_plan plan = fftw_plan_dft_1d(M, reinterpret_cast<fftw_complex*>(buf.data()),
                                    reinterpret_cast<fftw_complex*>(buf.data()), FFTW_FORWARD,
                                    FFTW_ESTIMATE);
  for (int j = -jb; j <= jb; ++j) {
    buf = samples[j + jb];
    fftw_execute(plan);
    for (int n = -n_max; n <= n_max; ++n) {
      // sum_m f(t_m) e^{-i n t_m / T} with t_m = -pi T + 2 pi T m / M
      const cplx shift = std::polar(1.0, n * kPi);
      const cplx v = buf[((n % M) + M) % M] * shift / static_cast<double>(M);
      out.set(j, n, v);
    }
  }
  fftw_destroy_plan(plan);
  // Restore exact conjugate symmetry lost to roundoff.
  for (int j = -j_max; j <= j_max; ++j)
    for (int n = -n_max; n <= n_max; ++n) {
      if (j > 0 || (j == 0 && n > 0)) {
        const cplx avg = 0.5 * (out.at(j, n) + std::conj(out.at(-j, -n)));
        out.set(j, n, avg);
        out.set(-j, -n, std::conj(avg));
      } else if (j == 0 && n == 0) {
        out.set(0, 0, out.at(0, 0).real());
      }
    }
  return out;
}

PotentialSpec band_truncate(const PotentialSpec& V1, double T, double sigma) {
  const auto [jk, nk] = truncation_rectangle(T, sigma);
  const int j_keep = std::min(jk, V1.spatial_band());
  int n_keep = nk;
  if (V1.is_table()) {
    n_keep = std::min(nk, V1.table().n_band());
  }
  CoefficientTable tab = fourier_table(V1, T, j_keep, n_keep);
  return PotentialSpec(std::move(tab), Envelope::none, V1.regularization());
}

PotentialSpec band_truncate(const PotentialSpec& V1, double T) {
  if (!V1.regularization())
    throw std::invalid_argument("band_truncate: potential carries no sigma; pass it explicitly");
  return band_truncate(V1, T, V1.regularization()->sigma);
}

TruncationError truncation_error(const CoefficientTable& V1, const CoefficientTable& V2) {
  if (V1.n_band() > 0 && V2.n_band() > 0 &&
      std::abs(V1.time_scale() - V2.time_scale()) > 1e-12 * V1.time_scale())
    throw std::invalid_argument("truncation_error: tables live on different time grids");
  const int jb = std::max(V1.j_band(), V2.j_band());
  const int nb = std::max(V1.n_band(), V2.n_band());
  TruncationError e{0.0, 0.0};
  for (int j = -jb; j <= jb; ++j)
    for (int n = -nb; n <= nb; ++n) {
      const double d = std::abs(V1.at(j, n) - V2.at(j, n));
      e.sup_bound += d;
      e.sup_bound_dx += std::abs(j) * d;
    }
  return e;
}

DecayReport decay_check(const CoefficientTable& table, double alpha) {
  DecayReport r;
  const double peak = table.max_abs();
  if (peak == 0.0) {
    r.degenerate = true;
    r.note = "degenerate: all-zero potential";
    return r;
  }
  const double floor = 1e-13 * peak;

  auto tail_fit = [](std::vector<double> x, std::vector<double> y, double& rate) {
    if (x.size() < 2) return false;
    // Fit from the peak outward.
    const auto ipk = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    x.erase(x.begin(), x.begin() + ipk);
    y.erase(y.begin(), y.begin() + ipk);
    if (x.size() < 2) return false;
    rate = -ols(x, y).first;
    return true;
  };

  std::vector<double> xs, ys;
  for (int j = 0; j <= table.j_band(); ++j) {
    double m = 0;
    for (int n = -table.n_band(); n <= table.n_band(); ++n)
      m = std::max({m, std::abs(table.at(j, n)), std::abs(table.at(-j, n))});
    if (m > floor) {
      xs.push_back(j);
      ys.push_back(std::log(m));
    }
  }
  r.fitted_x = tail_fit(xs, ys, r.c_x);

  xs.clear();
  ys.clear();
  for (int n = 0; n <= table.n_band(); ++n) {
    double m = 0;
    for (int j = -table.j_band(); j <= table.j_band(); ++j)
      m = std::max({m, std::abs(table.at(j, n)), std::abs(table.at(j, -n))});
    if (m > floor) {
      xs.push_back(std::pow(n / table.time_scale(), 1.0 / alpha));
      ys.push_back(std::log(m));
    }
  }
  r.fitted_t = tail_fit(xs, ys, r.c_t);

  if (!r.fitted_x && !r.fitted_t) {
    r.degenerate = true;
    r.note = "degenerate tail, skipped";
    return r;
  }
  r.violation = (r.fitted_x && r.c_x <= 0) || (r.fitted_t && r.c_t <= 0);
  if (!r.fitted_x) r.note = "spatial tail degenerate, skipped";
  if (!r.fitted_t) r.note = "temporal tail degenerate, skipped";
  return r;
}

DecayReport decay_check(const PotentialSpec& V) {
  if (V.is_table()) return decay_check(V.table(), 1.0);
  const double T = V.period_scale();
  const int n_max = static_cast<int>(std::ceil(16.0 * std::max(T, 1.0))) + 64;
  return decay_check(fourier_table(V, T, V.spatial_band(), n_max), V.bump().alpha());
}

double sup_abs(const PotentialSpec& V, double t) { return trig_sup(V.spatial_coefficients(t)); }

double sup_abs_dx(const PotentialSpec& V, double t) {
  auto c = V.spatial_coefficients(t);
  const int band = static_cast<int>(c.size() / 2);
  for (int k = -band; k <= band; ++k) c[k + band] *= kI * static_cast<double>(k);
  return trig_sup(c);
}

double admissible_integral(const PotentialSpec& V, double t) {
  if (!(t >= 0)) throw std::invalid_argument("admissible_integral requires t >= 0");
  if (t == 0.0 || V.is_zero()) return 0.0;
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [&V](double tau) { return sup_abs_dx(V, tau); }, 0.0, t, 15, 1e-11, &err);
}

PotentialSpec read_potential(std::istream& in) {
  std::string line;
  int lineno = 0;
  bool have_header = false;
  double time_scale = 1.0;
  Envelope env = Envelope::none;
  std::optional<Regularization> reg;
  std::vector<std::tuple<int, int, cplx>> entries;
  int jb = 0, nb = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    if (!have_header) {
      std::vector<std::string> tok;
      for (std::string s; ls >> s;) tok.push_back(s);
      if (tok.size() != 8)
        throw std::invalid_argument(
            "potential file: header must be 'T alpha sigma sigma' sigma'' delta D envelope'");
      time_scale = std::stod(tok[0]);
      env = parse_envelope(tok[7]);
      if (tok[1] != "-") {
        Regularization r{time_scale,         std::stod(tok[1]), std::stod(tok[2]),
                         std::stod(tok[3]),  std::stod(tok[4]), std::stod(tok[5]),
                         std::stod(tok[6])};
        r.validate();
        reg = r;
      }
      have_header = true;
      continue;
    }
    int j = 0, n = 0;
    double re = 0, im = 0;
    if (!(ls >> j >> n >> re >> im))
      throw std::invalid_argument("potential file: malformed line " + std::to_string(lineno));
    entries.emplace_back(j, n, cplx(re, im));
    jb = std::max(jb, std::abs(j));
    nb = std::max(nb, std::abs(n));
  }
  if (!have_header) throw std::invalid_argument("potential file: missing header");
  CoefficientTable tab(jb, nb, time_scale);
  for (const auto& [j, n, c] : entries) tab.ref(j, n) += c;
  return PotentialSpec(std::move(tab), env, reg);
}

void write_potential(std::ostream& out, const PotentialSpec& V) {
  const auto& tab = V.table();
  char buf[256];
  if (const auto& r = V.regularization()) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %s\n",
                  tab.time_scale(), r->alpha, r->sigma, r->sigma_prime, r->sigma_second,
                  r->delta, r->D, envelope_name(V.envelope()).c_str());
  } else {
    std::snprintf(buf, sizeof buf, "%.17g - - - - - - %s\n", tab.time_scale(),
                  envelope_name(V.envelope()).c_str());
  }
  out << buf;
  for (int j = -tab.j_band(); j <= tab.j_band(); ++j)
    for (int n = -tab.n_band(); n <= tab.n_band(); ++n) {
      const cplx c = tab.at(j, n);
      if (c == cplx{}) continue;
      std::snprintf(buf, sizeof buf, "%d %d %.17g %.17g\n", j, n, c.real(), c.imag());
      out << buf;
    }
}

}  // namespace kdvlab
