#include "kdvlab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "kdvlab/errors.hpp"

namespace kdvlab {

namespace {

namespace ode = boost::numeric::odeint;
using State = std::vector<double>;
using Stepper = ode::runge_kutta_fehlberg78<State>;

constexpr cplx kI{0.0, 1.0};
constexpr long kMaxSteps = 20000000;

const cplx* as_complex(const State& x, std::size_t offset = 0) {
  return reinterpret_cast<const cplx*>(x.data()) + offset;
}
cplx* as_complex(State& x, std::size_t offset = 0) {
  return reinterpret_cast<cplx*>(x.data()) + offset;
}

// Rotating frame: u(j) = e^{i j^3 t} w(j). In it the cubic diagonal drops out and only the
// potential term remains, dw/dt = e^{-i j^3 t} B(t) e^{i j^3 t} w with B = G - i diag(j^3).
struct Frame {
  int N;
  std::vector<cplx> phase;  // e^{i j^3 t}
  explicit Frame(int n) : N(n), phase(2 * static_cast<std::size_t>(n) + 1) {}
  void at(double t) {
    for (int j = -N; j <= N; ++j) phase[j + N] = std::polar(1.0, static_cast<double>(j) * j * j * t);
  }
};

// dst = e^{-iDt} B e^{iDt} src, with potential coefficients c (band b).
void apply_B(const std::vector<cplx>& c, const Frame& f, const cplx* src, cplx* dst) {
  const int N = f.N;
  const int b = static_cast<int>(c.size() / 2);
  for (int j = -N; j <= N; ++j) {
    cplx acc{};
    for (int k = -b; k <= b; ++k) {
      const int jp = j - k;
      if (jp < -N || jp > N) continue;
      acc += (0.5 * (j + jp)) * c[k + b] * f.phase[jp + N] * src[jp + N];
    }
    dst[j + N] = -kI * std::conj(f.phase[j + N]) * acc;
  }
}

template <class System>
void integrate(System sys, State& x, double t0, double t1, double tol) {
  if (t1 == t0) return;
  long steps = 0;
  auto observer = [&steps](const State&, double) {
    if (++steps > kMaxSteps) throw NumericalError("dense oracle: step budget exhausted");
  };
  const double h0 = (t1 > t0 ? 1.0 : -1.0) * std::min(1e-4, std::abs(t1 - t0));
  try {
    ode::integrate_adaptive(ode::make_controlled<Stepper>(tol, tol), sys, x, t0, t1, h0, observer);
  } catch (const NumericalError&) {
    throw;
  } catch (const std::exception& e) {
    throw NumericalError(std::string("dense oracle: tolerance not met: ") + e.what());
  }
}

// Integrates through every time in `times`, recording the state after each. The local
// tolerance is tightened by 16x until two successive runs agree to tol, so tol bounds the
// global error rather than the per-step one.
template <class System>
std::vector<State> solve_checked(System sys, const State& x0, double t0, const std::vector<double>& times,
                                 double tol) {
  auto run = [&](double local) {
    std::vector<State> snaps;
    State x = x0;
    double t = t0;
    for (double ti : times) {
      integrate(sys, x, t, ti, local);
      t = ti;
      snaps.push_back(x);
    }
    return snaps;
  };
  auto gap = [](const std::vector<State>& a, const std::vector<State>& b) {
    double worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      double d = 0, m = 0;
      for (std::size_t k = 0; k < a[i].size(); ++k) {
        d += (a[i][k] - b[i][k]) * (a[i][k] - b[i][k]);
        m += b[i][k] * b[i][k];
      }
      worst = std::max(worst, std::sqrt(d) / std::max(1.0, std::sqrt(m)));
    }
    return worst;
  };
  double local = tol;
  std::vector<State> prev = run(local);
  while (true) {
    local /= 16;
    if (local < 1e-15) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "dense oracle: tolerance %.1e not met before the roundoff floor", tol);
      throw NumericalError(buf);
    }
    std::vector<State> next = run(local);
    const double g = gap(prev, next);
    if (g <= tol) return next;
    prev = std::move(next);
  }
}

}  // namespace

FourierField dense_oracle(const FourierField& u0, const PotentialSpec& V, double t0, double t1,
                          double tol) {
  const int N = u0.band_limit();
  if (N > 64) throw std::invalid_argument("dense oracle is limited to band limit 64");
  if (!(tol > 0)) throw std::invalid_argument("dense oracle: tolerance must be positive");
  const std::size_t n = 2 * static_cast<std::size_t>(N) + 1;
  Frame frame(N);
  State x(2 * n);
  frame.at(t0);
  for (int j = -N; j <= N; ++j) as_complex(x)[j + N] = std::conj(frame.phase[j + N]) * u0[j];
  std::vector<cplx> c;
  auto sys = [&](const State& y, State& dy, double t) {
    V.spatial_coefficients(t, c);
    frame.at(t);
    apply_B(c, frame, as_complex(y), as_complex(dy));
  };
  x = solve_checked(sys, x, t0, {t1}, tol).back();
  frame.at(t1);
  FourierField out(N);
  for (int j = -N; j <= N; ++j) out[j] = frame.phase[j + N] * as_complex(x)[j + N];
  return out;
}

std::vector<FourierField> duhamel_commutator(const FourierField& u0, const PotentialSpec& V,
                                             int J, const std::vector<double>& times,
                                             double tol) {
  const int N = u0.band_limit();
  if (N > 64) throw std::invalid_argument("Duhamel oracle is limited to band limit 64");
  const ProjectionProfile P(J);
  const std::size_t n = 2 * static_cast<std::size_t>(N) + 1;
  std::vector<double> pi(n);
  for (int j = -N; j <= N; ++j) pi[j + N] = P(j);

  // State: u = S(t) u0 followed by w = [S(t), Pi_J] u0, both in the rotating frame.
  // Pi_J commutes with the cubic diagonal, so [G, Pi_J] = [B, Pi_J].
  Frame frame(N);
  State x(4 * n, 0.0);
  for (int j = -N; j <= N; ++j) as_complex(x)[j + N] = u0[j];
  std::vector<cplx> c;
  auto sys = [&](const State& y, State& dy, double t) {
    V.spatial_coefficients(t, c);
    frame.at(t);
    const cplx* u = as_complex(y);
    const cplx* w = as_complex(y, n);
    apply_B(c, frame, u, as_complex(dy));
    cplx* dw = as_complex(dy, n);
    apply_B(c, frame, w, dw);
    const int b = static_cast<int>(c.size() / 2);
    for (int j = -N; j <= N; ++j) {
      cplx acc{};
      for (int k = -b; k <= b; ++k) {
        const int jp = j - k;
        if (jp < -N || jp > N) continue;
        acc += (0.5 * (j + jp)) * c[k + b] * (pi[jp + N] - pi[j + N]) * frame.phase[jp + N] * u[jp + N];
      }
      dw[j + N] -= kI * std::conj(frame.phase[j + N]) * acc;
    }
  };
  std::vector<FourierField> out;
  const auto snaps = solve_checked(sys, x, 0.0, times, tol);
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    frame.at(times[i]);
    FourierField w(N);
    for (int j = -N; j <= N; ++j) w[j] = frame.phase[j + N] * as_complex(snaps[i], n)[j + N];
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace kdvlab
