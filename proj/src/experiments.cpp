#include "kdvlab/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <stdexcept>

namespace kdvlab {

FourierField analytic_random_field(int N, double decay, std::uint64_t seed) {
  if (N < 1) throw std::invalid_argument("initial data: N must be >= 1");
  if (!(decay > 0)) throw std::invalid_argument("initial data: decay must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  FourierField u(N);
  u[0] = (rng() & 1) ? 1.0 : -1.0;
  for (int j = 1; j <= N; ++j) {
    const cplx c = std::polar(std::exp(-j / decay), angle(rng));
    u[j] = c;
    u[-j] = std::conj(c);
  }
  u *= 1.0 / l2_norm(u);
  return u;
}

FourierField algebraic_field(int N, double exponent) {
  if (N < 1) throw std::invalid_argument("initial data: N must be >= 1");
  if (!(exponent > 0)) throw std::invalid_argument("initial data: exponent must be positive");
  FourierField u(N);
  for (int j = -N; j <= N; ++j) u[j] = std::pow(1.0 + std::abs(j), -exponent);
  u *= 1.0 / l2_norm(u);
  return u;
}

Admissibility classify_potential(const PotentialSpec& V, double t_max) {
  if (!(t_max > 0)) throw std::invalid_argument("classify_potential: t_max must be positive");
  Admissibility a;
  const double t0 = t_max / 8.0;
  a.integral = admissible_integral(V, t_max);
  const double i0 = admissible_integral(V, t0);
  if (a.integral == 0.0) {
    a.shape = "zero";
    a.admissible = true;
    return a;
  }
  a.ratio = (a.integral / std::log(t_max + 2.0)) / (i0 / std::log(t0 + 2.0));
  a.admissible = a.ratio <= 1.5;
  a.shape = a.admissible ? "logarithmic" : "linear";
  return a;
}

std::vector<double> growth_time_grid(double t_max, int samples) {
  if (!(t_max > 0)) throw std::invalid_argument("time grid: t_max must be positive");
  if (samples < 2) throw std::invalid_argument("time grid: need at least 2 samples");
  std::vector<double> t{0.0};
  const double a = std::log(t_max / 100.0), b = std::log(t_max);
  for (int i = 0; i < samples; ++i) t.push_back(std::exp(a + (b - a) * i / (samples - 1)));
  t.back() = t_max;
  return t;
}

GrowthResult run_growth(const GrowthSetup& setup) {
  GrowthResult res;
  res.admissibility = classify_potential(setup.V, setup.times.back());
  res.trace = trace_norms(setup.u0, setup.V, setup.times, setup.s_list, setup.prop);
  res.fit = fit_exponents(res.trace, setup.fit_s, setup.varsigma);
  res.polynomial_ok = res.fit.p_hat <= setup.fit_s + setup.margin;
  res.polylog_consistent = std::isfinite(res.fit.q_hat) && std::abs(res.fit.p_hat) <= setup.margin;
  if (!res.admissibility.admissible)
    res.verdict = "hypotheses unmet";
  else
    res.verdict = res.polynomial_ok ? "polynomial bound consistent" : "polynomial bound exceeded";
  return res;
}

DecompositionReport decompose_norm(const FourierField& u0, const PotentialSpec& V, double T,
                                   int J, int J0, double s, const PropagatorConfig& cfg) {
  if (J % 8 != 0) throw std::invalid_argument("decompose_norm: J must be divisible by 8");
  if (J0 < 1 || !(2 * J0 < J / 4)) throw std::invalid_argument("decompose_norm: need 1 <= J0 and 2 J0 < J/4");
  if (!(T >= 0)) throw std::invalid_argument("decompose_norm: T must be >= 0");
  const int N = cfg.band_limit;
  if (u0.band_limit() > N) throw std::invalid_argument("decompose_norm: u0 exceeds the band");
  const ProjectionProfile low(2 * J0), half(J / 2), quarter(J / 4);
  const SobolevWeight w(s);
  const FourierField u = u0.resized(N);
  Eigen::MatrixXcd U(2 * N + 1, 4);
  U.col(0) = u.coefficients();
  U.col(1) = project(u, low).coefficients();
  U.col(2) = project_difference(u, half, low).coefficients();
  U.col(3) = project_complement(u, half).coefficients();
  Propagator prop(V, cfg);
  prop.advance(U, 0.0, T);
  DecompositionReport rep;
  const FourierField su(N, U.col(0));
  rep.lhs = sobolev_norm(su, w);
  for (int k = 0; k < 3; ++k) rep.terms[k] = sobolev_norm(project(FourierField(N, U.col(k + 1)), quarter), w);
  rep.terms[3] = sobolev_norm(project_complement(su, quarter), w);
  const double total = rep.terms[0] + rep.terms[1] + rep.terms[2] + rep.terms[3];
  for (int k = 0; k < 4; ++k) rep.shares[k] = total > 0 ? rep.terms[k] / total : 0.0;
  if (!(rep.lhs <= total + 1e-8)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "decomposition audit failed: lhs %.17g > terms %.17g", rep.lhs, total);
    throw NumericalError(buf);
  }
  return rep;
}

PipelineReport run_iteration_pipeline(const FourierField& u0, const PotentialSpec& V, int T,
                                      int J, int J0, double s, const PropagatorConfig& cfg) {
  if (T < 1) throw std::invalid_argument("pipeline: T must be a positive integer");
  if (J % 8 != 0) throw std::invalid_argument("pipeline: J must be divisible by 8");
  if (J0 < 1 || !(2 * J0 < J / 2)) throw std::invalid_argument("pipeline: need 1 <= J0 and 2 J0 < J/2");
  const int N = cfg.band_limit;
  if (u0.band_limit() > N) throw std::invalid_argument("pipeline: u0 exceeds the band");
  const ProjectionProfile low(2 * J0), half(J / 2), quarter(J / 4);
  const SobolevWeight w(s);
  Propagator prop(V, cfg);

  PipelineReport rep;
  FourierField wr = project(u0.resized(N), low);
  const FourierField w0 = wr;
  for (int r = 1; r <= T; ++r) {
    FourierField v;
    try {
      v = prop.advance(wr, r - 1.0, static_cast<double>(r));
      Eigen::MatrixXcd P(2 * N + 1, 2);
      P.col(0) = project_difference(v, half, low).coefficients();
      P.col(1) = project_complement(v, half).coefficients();
      prop.advance(P, static_cast<double>(r), static_cast<double>(T));
      PipelineStep st;
      st.r = r;
      st.intermediate = sobolev_norm(project(FourierField(N, P.col(0)), quarter), w);
      st.high = sobolev_norm(project(FourierField(N, P.col(1)), quarter), w);
      wr = project(v, low);
      st.low = sobolev_norm(wr, w);
      rep.budget += st.intermediate + st.high;
      rep.steps.push_back(st);
    } catch (const NumericalError& e) {
      throw NumericalError("pipeline step " + std::to_string(r) + ": " + e.what());
    }
  }
  rep.iterated = sobolev_norm(project(wr, quarter), w);
  rep.direct = sobolev_norm(project(prop.advance(w0, 0.0, static_cast<double>(T)), quarter), w);
  rep.slack = rep.iterated + rep.budget + 1e-8 - rep.direct;
  rep.holds = rep.slack >= 0;
  if (!rep.holds) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "pipeline audit failed: direct %.17g > iterated %.17g + budget %.17g",
                  rep.direct, rep.iterated, rep.budget);
    throw NumericalError(buf);
  }
  return rep;
}

}  // namespace kdvlab
