#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "kdvlab/bounds.hpp"

using namespace kdvlab;

namespace {

PotentialSpec table_potential(int band, const std::vector<cplx>& positive) {
  CoefficientTable c(band, 0, 1.0);
  for (int k = 1; k <= band; ++k) {
    c.set(k, 0, positive[k - 1]);
    c.set(-k, 0, std::conj(positive[k - 1]));
  }
  return PotentialSpec(c);
}

double weighted_norm_brute(const Eigen::MatrixXcd& M, double s) {
  const int N = static_cast<int>(M.rows() / 2);
  Eigen::MatrixXcd W = M;
  for (int a = -N; a <= N; ++a)
    for (int b = -N; b <= N; ++b)
      W(a + N, b + N) *= std::pow(std::max(std::abs(a), 1), s) / std::pow(std::max(std::abs(b), 1), s);
  return Eigen::JacobiSVD<Eigen::MatrixXcd>(W).singularValues()(0);
}

FourierField smooth_field(int N, double decay) {
  FourierField f(N);
  for (int j = -N; j <= N; ++j) f[j] = std::exp(-std::abs(j) / decay) * std::polar(1.0, 0.3 * j);
  return f;
}

PropagatorConfig cfg_for(int N, double dt) {
  PropagatorConfig c;
  c.band_limit = N;
  c.dt = dt;
  return c;
}

}  // namespace

TEST_CASE("commutator entries") {
  const auto V = table_potential(1, {1.0});
  const auto M = commutator_matrix(V, 0.0, 4, 8).matrix;
  CHECK(M(3 + 8, 2 + 8) == cplx(0.5, 0));
  CHECK(M(2 + 8, 3 + 8) == cplx(-0.5, 0));
  for (int j = -2; j <= 2; ++j)
    for (int jp = -2; jp <= 2; ++jp) CHECK(M(j + 8, jp + 8) == cplx{});

  CoefficientTable c0(0, 0, 1.0);
  c0.set(0, 0, 2.5);
  CHECK(commutator_matrix(PotentialSpec(c0), 0.0, 8, 16).matrix.cwiseAbs().maxCoeff() == 0.0);

  // general formula, with derivatives
  const auto W = make_preset("analytic-band", 1.3);
  const ProjectionProfile P(16);
  for (int gamma = 0; gamma <= 2; ++gamma) {
    const double t = 0.7;
    const auto v = W.spatial_coefficients(t);
    const int b = W.spatial_band();
    const auto Mg = commutator_matrix(W, t, 16, 24, gamma).matrix;
    double worst = 0;
    for (int j = -24; j <= 24; ++j)
      for (int jp = -24; jp <= 24; ++jp) {
        const int k = j - jp;
        cplx vk = std::abs(k) <= b ? v[k + b] : cplx{};
        for (int g = 0; g < gamma; ++g) vk *= cplx(0, k);
        worst = std::max(worst, std::abs(Mg(j + 24, jp + 24) - vk * (P(jp) - P(j))));
      }
    CHECK(worst < 1e-13);
  }
  CHECK_THROWS_AS(commutator_matrix(W, 0.0, 32, 16), std::invalid_argument);
  CHECK_THROWS_AS(commutator_matrix(W, 0.0, 8, 16, -1), std::invalid_argument);
}

TEST_CASE("weighted operator norm") {
  WeightedOperator Z;
  Z.matrix = Eigen::MatrixXcd::Zero(9, 9);
  CHECK(hs_opnorm(Z, 1.0) == 0.0);

  WeightedOperator D;
  D.matrix = Eigen::MatrixXcd::Zero(9, 9);
  for (int i = 0; i < 9; ++i) D.matrix(i, i) = cplx(i - 4.0, 0.5);
  for (double s : {0.0, 1.0, 3.5}) CHECK(hs_opnorm(D, s) == doctest::Approx(std::abs(cplx(4.0, 0.5))));

  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  WeightedOperator R;
  R.matrix = Eigen::MatrixXcd(11, 11);
  for (int a = 0; a < 11; ++a)
    for (int b = 0; b < 11; ++b) R.matrix(a, b) = cplx(g(rng), g(rng));
  for (double s : {0.0, 0.5, 2.0}) CHECK(hs_opnorm(R, s) == doctest::Approx(weighted_norm_brute(R.matrix, s)).epsilon(1e-12));

  WeightedOperator bad;
  bad.matrix = Eigen::MatrixXcd::Zero(3, 4);
  CHECK_THROWS_AS(hs_opnorm(bad, 0.0), std::invalid_argument);
  bad.matrix = Eigen::MatrixXcd::Zero(3, 3);
  bad.matrix(0, 0) = std::nan("");
  CHECK_THROWS_AS(hs_opnorm(bad, 0.0), std::invalid_argument);
}

TEST_CASE("Schur envelope and 1/J decay") {
  for (const char* name : {"analytic-band", "decaying-envelope", "stationary"}) {
    const auto V = make_preset(name, 1.0);
    for (int gamma = 0; gamma <= 2; ++gamma)
      for (double s : {0.0, 1.0, 2.0}) {
        const auto M = commutator_matrix(V, 0.4, 16, 32, gamma);
        CHECK(hs_opnorm(M, s) <= commutator_schur_bound(V, 0.4, 16, 32, s, gamma) * (1 + 1e-12));
      }
  }
  const auto V = make_preset("analytic-band", 1.0);
  const double a = hs_opnorm(commutator_matrix(V, 0.0, 32, 64), 2.0);
  const double b = hs_opnorm(commutator_matrix(V, 0.0, 64, 128), 2.0);
  CHECK(b / a >= 0.4);
  CHECK(b / a <= 0.6);
  const double sa = commutator_schur_bound(V, 0.0, 32, 64, 2.0);
  const double sb = commutator_schur_bound(V, 0.0, 64, 128, 2.0);
  CHECK(sb / sa <= 0.6);
}

TEST_CASE("tail growth") {
  const auto cfg = cfg_for(64, 0.01);
  FourierField low(16);
  for (int j = -16; j <= 16; ++j) low[j] = 1.0 / (1 + j * j);
  const std::vector<double> times{0.0, 0.5, 1.0, 2.0};
  const auto z = tail_growth_experiment(low, make_preset("zero", 0.0), 32, 1.0, times, cfg);
  for (double v : z.values) CHECK(v == 0.0);
  CHECK(z.side_condition);

  const auto u0 = smooth_field(64, 10.0);
  const auto r = tail_growth_experiment(u0, make_preset("decaying-envelope", 1.0), 32, 2.0, times, cfg);
  CHECK(r.values.front() == doctest::Approx(sobolev_norm(project_complement(u0, ProjectionProfile(32)), 2.0)).epsilon(1e-12));
  CHECK(r.values.size() == times.size());

  const auto late = tail_growth_experiment(u0, make_preset("zero", 0.0), 2, 2.0, times, cfg);
  CHECK_FALSE(late.side_condition);
  CHECK_THROWS_AS(tail_growth_experiment(smooth_field(80, 4), make_preset("zero", 0.0), 32, 1.0, times, cfg),
                  std::invalid_argument);
  CHECK_THROWS_AS(tail_growth_experiment(u0, make_preset("zero", 0.0), 32, 1.0, {1.0, 0.5}, cfg),
                  std::invalid_argument);
}

TEST_CASE("flow commutator") {
  const auto u0 = smooth_field(32, 6.0);
  const std::vector<double> times{0.0, 0.25, 0.5, 1.0};
  const auto z = flow_commutator_experiment(u0, make_preset("zero", 0.0), 16, 1.0, times, cfg_for(32, 0.01));
  for (double v : z.values) CHECK(v < 1e-13);

  const auto r = flow_commutator_experiment(u0, make_preset("analytic-band", 1.0), 16, 1.0, times,
                                            cfg_for(32, 0.01));
  CHECK(r.values.front() == 0.0);
  CHECK(r.values.back() > 0.0);
}

TEST_CASE("flow commutator against its integral form") {
  // Small band and step, so the midpoint error sits well below the oracle tolerance scale.
  auto cfg = cfg_for(12, 5e-5);
  cfg.oracle_tol = 1e-9;
  const auto u0 = smooth_field(12, 3.0);
  const std::vector<double> times{0.0, 0.1, 0.2};
  const auto r = flow_commutator_experiment(u0, make_preset("decaying-envelope", 1.0), 8, 1.0, times, cfg, true);
  REQUIRE(r.duhamel_values.size() == times.size());
  CHECK(r.duhamel_values.front() < 1e-14);
  for (std::size_t i = 0; i < times.size(); ++i)
    CHECK(r.duhamel_values[i] == doctest::Approx(r.values[i]).epsilon(1e-6));
  MESSAGE("max discrepancy " << r.max_discrepancy);
  CHECK(r.max_discrepancy < 10 * cfg.oracle_tol);
}

TEST_CASE("sweep csv") {
  std::ostringstream os;
  write_sweep_csv(os, {{32, 1.0, 0.5, 0.25, std::nan("")}, {64, 1.0, 0.5, 0.125, 0.5}});
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "J, s, t, value, schur_bound");
  std::getline(in, line);
  CHECK(line.rfind("32, 1, 0.5, 0.25,", 0) == 0);
  std::getline(in, line);
  CHECK(line == "64, 1, 0.5, 0.125, 0.5");
}
