#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "kdvlab/evolution.hpp"
#include "kdvlab/oracle.hpp"

using namespace kdvlab;
using std::numbers::pi;

namespace {

FourierField random_field(std::mt19937_64& rng, int N, double decay = 4.0) {
  std::normal_distribution<double> g;
  FourierField f(N);
  for (int j = -N; j <= N; ++j) f[j] = cplx(g(rng), g(rng)) * std::exp(-std::abs(j) / decay);
  return f;
}

PotentialSpec random_potential(std::mt19937_64& rng, int jb, int nb, double tau) {
  std::normal_distribution<double> g;
  CoefficientTable c(jb, nb, tau);
  for (int j = 0; j <= jb; ++j)
    for (int n = -nb; n <= nb; ++n) {
      if (j == 0 && n < 0) continue;
      const cplx v(g(rng), (j == 0 && n == 0) ? 0.0 : g(rng));
      c.set(j, n, v);
      c.set(-j, -n, std::conj(v));
    }
  return PotentialSpec(c);
}

double l2_diff(const FourierField& a, const FourierField& b) {
  return (a.coefficients() - b.coefficients()).norm();
}

PropagatorConfig cfg_for(int N, double dt, ExpMethod m = ExpMethod::automatic) {
  PropagatorConfig c;
  c.band_limit = N;
  c.dt = dt;
  c.exp_method = m;
  return c;
}

}  // namespace

TEST_CASE("names and validation") {
  CHECK(parse_scheme("exp-midpoint") == Scheme::exp_midpoint);
  CHECK(parse_scheme("dense-oracle") == Scheme::dense_oracle);
  CHECK(parse_exp_method(exp_method_name(ExpMethod::tridiagonal)) == ExpMethod::tridiagonal);
  CHECK_THROWS_AS(parse_scheme("rk4"), std::invalid_argument);
  PropagatorConfig c;
  CHECK(c.step() == doctest::Approx(std::min(1e-2, 0.5 / 32)));
  c.dt = -1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = PropagatorConfig{};
  c.band_limit = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = PropagatorConfig{};
  c.scheme = Scheme::dense_oracle;
  c.band_limit = 65;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("generator entries") {
  const int N = 6;
  const Eigen::MatrixXcd G0 = generator(make_preset("zero", 0.0), 0.0, N);
  for (int j = -N; j <= N; ++j)
    for (int k = -N; k <= N; ++k)
      CHECK(G0(j + N, k + N) == (j == k ? cplx(0, double(j) * j * j) : cplx(0)));

  // V = 2 cos x: V_hat(+-1) = 1. Expanding (1/2) V_x u + V u_x for u = e^{ijx}:
  // V_x = -2 sin x = i(e^{ix} - e^{-ix}), so the e^{i(j+1)x} coefficient of
  // -(1/2 V_x u + V u_x) is -(i/2 + i j) = -i (2j+1)/2.
  CoefficientTable c(1, 0, 1.0);
  c.set(1, 0, 1.0);
  c.set(-1, 0, 1.0);
  const PotentialSpec V(c);
  const Eigen::MatrixXcd G = generator(V, 0.0, N);
  for (int j = -N; j < N; ++j) CHECK(std::abs(G(j + 1 + N, j + N) - cplx(0, -(2.0 * j + 1) / 2)) < 1e-15);
  CHECK((G + G.adjoint()).norm() < 1e-13);
  const Eigen::MatrixXcd A = hermitian_generator(V, 0.0, N);
  CHECK((A - A.adjoint()).norm() < 1e-13);
  CHECK((A - cplx(0, -1) * G).norm() < 1e-13);

  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const PotentialSpec W = random_potential(rng, 3, 2, 1.7);
    const Eigen::MatrixXcd Gw = generator(W, 0.37 * trial, 10);
    CHECK((Gw + Gw.adjoint()).norm() < 1e-13 * Gw.norm());
    const FourierField u = random_field(rng, 10);
    CHECK((Gw * u.coefficients() - apply_generator(W, 0.37 * trial, u.coefficients())).norm() <
          1e-12 * Gw.norm());
  }
}

TEST_CASE("generator against physical-space products") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const int N = 12, K = 3;
    const PotentialSpec V = random_potential(rng, K, 1, 2.0);
    const FourierField u = random_field(rng, N, 100.0);
    const double t = 0.5 + trial;
    const int M = 4 * (N + K);
    std::vector<cplx> f(M);
    for (int m = 0; m < M; ++m) {
      const double x = 2 * pi * m / M;
      cplx uu = 0, ux = 0, uxxx = 0;
      for (int j = -N; j <= N; ++j) {
        const cplx e = u[j] * std::exp(cplx(0, j * x));
        uu += e;
        ux += cplx(0, j) * e;
        uxxx += cplx(0, -double(j) * j * j) * e;
      }
      f[m] = -uxxx - 0.5 * V.eval_x(x, t) * uu - V.eval(x, t) * ux;
    }
    const Eigen::VectorXcd Gu = generator(V, t, N) * u.coefficients();
    double worst = 0;
    for (int j = -N; j <= N; ++j) {
      cplx c = 0;
      for (int m = 0; m < M; ++m) c += f[m] * std::exp(cplx(0, -j * 2 * pi * m / M));
      c /= double(M);
      worst = std::max(worst, std::abs(c - Gu(j + N)));
    }
    CHECK(worst < 1e-10 * std::max(1.0, Gu.norm()));
  }
}

TEST_CASE("free flow is exact") {
  std::mt19937_64 rng(3);
  const FourierField u0 = random_field(rng, 16);
  const PotentialSpec V = make_preset("zero", 0.0);
  const FourierField u = propagate(u0, V, 0.0, 2.7, cfg_for(16, 0.01));
  for (int j = -16; j <= 16; ++j) {
    const cplx expect = u0[j] * std::exp(cplx(0, std::fmod(double(j) * j * j * 2.7, 2 * pi)));
    CHECK(std::abs(u[j] - expect) < 1e-13);
  }
  for (double s : {0.0, 1.0, 2.0, 4.0})
    CHECK(std::abs(sobolev_norm(u, s) - sobolev_norm(u0, s)) < 1e-12 * sobolev_norm(u0, s));
}

TEST_CASE("unitarity on random problems") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> un(4, 40), uk(1, 4);
  std::uniform_real_distribution<double> ut(0.1, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int N = un(rng);
    const PotentialSpec V = random_potential(rng, uk(rng), 1, 2.0);
    const FourierField u0 = random_field(rng, N);
    const double t = ut(rng);
    const FourierField u = propagate(u0, V, 0.0, t, cfg_for(N, 0.05));
    CHECK(std::abs(l2_norm(u) / l2_norm(u0) - 1) <= 1e-10);
  }
}

TEST_CASE("conservation failure is reported") {
  // A tolerance below roundoff must trip the drift check.
  std::mt19937_64 rng(5);
  const FourierField u0 = random_field(rng, 32);
  PropagatorConfig c = cfg_for(32, 0.01);
  c.conservation_tol = 1e-300;
  CHECK_THROWS_AS(propagate(u0, make_preset("analytic-band", 3.0), 0.0, 1.0, c), ConservationFailure);
}

TEST_CASE("tridiagonal and pade paths agree") {
  std::mt19937_64 rng(9);
  const FourierField u0 = random_field(rng, 24);
  for (const char* name : {"decaying-envelope", "stationary"}) {
    const PotentialSpec V = make_preset(name, 1.3);
    Propagator a(V, cfg_for(24, 0.02, ExpMethod::tridiagonal));
    Propagator b(V, cfg_for(24, 0.02, ExpMethod::pade));
    CHECK(a.resolved_method() == ExpMethod::tridiagonal);
    CHECK(b.resolved_method() == ExpMethod::pade);
    const FourierField ua = a.advance(u0, 0.0, 1.0);
    const FourierField ub = b.advance(u0, 0.0, 1.0);
    CHECK(l2_diff(ua, ub) < 1e-9);
  }
  CHECK(Propagator(make_preset("analytic-band", 1.0), cfg_for(8, 0.1)).resolved_method() == ExpMethod::pade);
  CHECK_THROWS_AS(Propagator(make_preset("analytic-band", 1.0), cfg_for(8, 0.1, ExpMethod::tridiagonal)),
                  std::invalid_argument);
}

TEST_CASE("multi-column propagation matches single columns") {
  std::mt19937_64 rng(10);
  const PotentialSpec V = make_preset("analytic-band", 0.8);
  Propagator p(V, cfg_for(12, 0.05));
  const FourierField a = random_field(rng, 12), b = random_field(rng, 12);
  Eigen::MatrixXcd U(25, 2);
  U.col(0) = a.coefficients();
  U.col(1) = b.coefficients();
  p.advance(U, 0.0, 1.0);
  CHECK((U.col(0) - p.advance(a, 0.0, 1.0).coefficients()).norm() < 1e-14);
  CHECK((U.col(1) - p.advance(b, 0.0, 1.0).coefficients()).norm() < 1e-14);
}

TEST_CASE("time reversibility") {
  std::mt19937_64 rng(31);
  for (const char* name : {"decaying-envelope", "analytic-band", "stationary"}) {
    const FourierField u0 = random_field(rng, 20);
    const PotentialSpec V = make_preset(name, 1.0);
    const auto c = cfg_for(20, 0.02);
    const FourierField back = propagate(propagate(u0, V, 0.0, 1.5, c), V, 1.5, 0.0, c);
    CHECK(l2_diff(back, u0) < 1e-9 * l2_norm(u0));
  }
}

TEST_CASE("dense oracle") {
  std::mt19937_64 rng(41);
  const FourierField u0 = random_field(rng, 8), v0 = random_field(rng, 8);
  const PotentialSpec zero = make_preset("zero", 0.0);
  const FourierField f = dense_oracle(u0, zero, 0.0, 0.7, 1e-10);
  for (int j = -8; j <= 8; ++j)
    CHECK(std::abs(f[j] - u0[j] * std::exp(cplx(0, double(j) * j * j * 0.7))) < 1e-8);

  const PotentialSpec V = make_preset("analytic-band", 1.0);
  const cplx al(0.3, -1.1), be(2.0, 0.5);
  FourierField w0(8);
  w0.coefficients() = al * u0.coefficients() + be * v0.coefficients();
  const auto ow = dense_oracle(w0, V, 0.0, 1.0, 1e-10);
  const auto ou = dense_oracle(u0, V, 0.0, 1.0, 1e-10);
  const auto ov = dense_oracle(v0, V, 0.0, 1.0, 1e-10);
  CHECK((ow.coefficients() - al * ou.coefficients() - be * ov.coefficients()).norm() < 1e-8);

  // Dispatch through the scheme flag.
  PropagatorConfig c = cfg_for(8, 0.01);
  c.scheme = Scheme::dense_oracle;
  c.oracle_tol = 1e-10;
  CHECK(l2_diff(propagate(u0, V, 0.0, 1.0, c), ou) < 1e-9);
}

TEST_CASE("second order in dt") {
  // Asymptotic only once h * (j^3 spacing) is small, hence the narrow band.
  std::mt19937_64 rng(55);
  for (const char* name : {"decaying-envelope", "analytic-band"}) {
    const PotentialSpec V = make_preset(name, 1.5);
    const FourierField u0 = random_field(rng, 8, 3.0);
    const FourierField ref = dense_oracle(u0, V, 0.0, 1.0, 1e-10);
    const double e1 = l2_diff(propagate(u0, V, 0.0, 1.0, cfg_for(8, 0.005)), ref);
    const double e2 = l2_diff(propagate(u0, V, 0.0, 1.0, cfg_for(8, 0.0025)), ref);
    INFO(name << " errors " << e1 << " " << e2);
    CHECK(e1 / e2 >= 3.5);
    CHECK(e1 / e2 <= 4.5);
  }
}

TEST_CASE("duhamel bound") {
  CHECK(duhamel_error(0.0, 5.0) == 0.0);
  CHECK(duhamel_error(1e-8, 10.0) == doctest::Approx(1e-7));
  CHECK(duhamel_error(2e-8, 10.0) > duhamel_error(1e-8, 10.0));
  CHECK(duhamel_error(1e-8, 11.0) > duhamel_error(1e-8, 10.0));
  CHECK_THROWS_AS(duhamel_error(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("growth traces") {
  std::mt19937_64 rng(60);
  const FourierField u0 = random_field(rng, 16);
  const std::vector<double> times{0.0, 0.5, 1.0, 2.0};
  const std::vector<double> s_list{0.0, 1.0, 2.0};
  const auto free = trace_norms(u0, make_preset("zero", 0.0), times, s_list, cfg_for(16, 0.05));
  for (std::size_t k = 0; k < s_list.size(); ++k)
    for (const auto& row : free.norms) CHECK(std::abs(row[k] - free.norms[0][k]) < 1e-12 * free.norms[0][k]);

  const auto tr = trace_norms(u0, make_preset("analytic-band", 1.0), times, s_list, cfg_for(16, 0.05));
  for (const auto& row : tr.norms) CHECK(std::abs(row[0] - tr.norms[0][0]) < 1e-10 * tr.norms[0][0]);
  CHECK(tr.column(2.0) == 2);
  CHECK_THROWS_AS(tr.column(3.0), std::invalid_argument);
  CHECK(tr.series(1.0).size() == times.size());

  std::stringstream ss;
  write_trace_csv(ss, tr);
  const auto back = read_trace_csv(ss);
  CHECK(back.times == tr.times);
  CHECK(back.s_list == tr.s_list);
  CHECK(back.norms == tr.norms);

  CHECK_THROWS_AS(trace_norms(u0, make_preset("zero", 0.0), {0.0, 1.0, 0.5}, s_list, cfg_for(16, 0.05)),
                  std::invalid_argument);
  CHECK_THROWS_AS(trace_norms(random_field(rng, 20), make_preset("zero", 0.0), times, s_list, cfg_for(16, 0.05)),
                  std::invalid_argument);
}

TEST_CASE("oracle refuses unreachable tolerances") {
  FourierField u(6);
  u[1] = 1.0;
  u[-1] = 1.0;
  CHECK_THROWS_AS(dense_oracle(u, make_preset("decaying-envelope", 1.0), 0.0, 0.5, 1e-16), NumericalError);
  CHECK_THROWS_AS(dense_oracle(u, make_preset("zero", 0.0), 0.0, 0.5, 0.0), std::invalid_argument);
}
