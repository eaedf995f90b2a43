#include "kdvlab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "kdvlab/fitting.hpp"
#include "kdvlab/oracle.hpp"

namespace kdvlab {

namespace {

constexpr cplx kI{0.0, 1.0};

// Spatial coefficients of d_x^gamma V at time t, index k + band.
std::vector<cplx> derivative_coefficients(const PotentialSpec& V, double t, int gamma) {
  if (gamma < 0) throw std::invalid_argument("derivative order must be >= 0");
  auto c = V.spatial_coefficients(t);
  const int b = static_cast<int>(c.size() / 2);
  for (int k = -b; k <= b; ++k) c[k + b] *= std::pow(kI * static_cast<double>(k), gamma);
  return c;
}

void check_times(const std::vector<double>& times) {
  if (times.empty()) throw std::invalid_argument("time grid is empty");
  if (times.front() < 0) throw std::invalid_argument("time grid must start at t >= 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("time grid must increase");
}

}  // namespace

WeightedOperator commutator_matrix(const PotentialSpec& V, double t, int J, int N, int gamma) {
  const ProjectionProfile P(J);
  if (N < J) throw std::invalid_argument("commutator_matrix: need N >= J");
  const auto c = derivative_coefficients(V, t, gamma);
  const int b = static_cast<int>(c.size() / 2);
  WeightedOperator op;
  op.matrix = Eigen::MatrixXcd::Zero(2 * N + 1, 2 * N + 1);
  for (int j = -N; j <= N; ++j)
    for (int k = -b; k <= b; ++k) {
      const int jp = j - k;
      if (jp < -N || jp > N) continue;
      op.matrix(j + N, jp + N) = c[k + b] * (P(jp) - P(j));
    }
  return op;
}

double hs_opnorm(const WeightedOperator& M, double s) {
  const Eigen::Index n = M.matrix.rows();
  if (n == 0 || M.matrix.cols() != n) throw std::invalid_argument("hs_opnorm: square matrix required");
  if (!M.matrix.allFinite()) throw std::invalid_argument("hs_opnorm: matrix must be finite");
  const int N = static_cast<int>(n / 2);
  const SobolevWeight w(s);
  Eigen::VectorXd d(n);
  for (int j = -N; j <= N; ++j) d[j + N] = w(j);
  const Eigen::MatrixXcd A = d.asDiagonal() * M.matrix * d.cwiseInverse().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A.adjoint() * A, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double commutator_schur_bound(const PotentialSpec& V, double t, int J, int N, double s, int gamma) {
  const ProjectionProfile P(J);
  const auto c = derivative_coefficients(V, t, gamma);
  const int b = static_cast<int>(c.size() / 2);
  const SobolevWeight w(s);
  std::vector<double> row(2 * N + 1, 0.0), col(2 * N + 1, 0.0);
  for (int j = -N; j <= N; ++j)
    for (int k = -b; k <= b; ++k) {
      const int jp = j - k;
      if (jp < -N || jp > N || k == 0) continue;
      // |Pi(j') - Pi(j)| <= min(1, 2|j - j'|/J) since the ramp has slope 2/J.
      const double e = w(j) / w(jp) * std::abs(c[k + b]) * std::min(1.0, 2.0 * std::abs(k) / J);
      row[j + N] += e;
      col[jp + N] += e;
    }
  return std::sqrt(*std::max_element(row.begin(), row.end()) *
                   *std::max_element(col.begin(), col.end()));
}

TailReport tail_growth_experiment(const FourierField& u0, const PotentialSpec& V, int J, double s,
                                  const std::vector<double>& times, const PropagatorConfig& cfg) {
  check_times(times);
  const ProjectionProfile P(J);
  const SobolevWeight w(s);
  if (u0.band_limit() > cfg.band_limit)
    throw std::invalid_argument("tail experiment: u0 exceeds the propagation band");
  TailReport rep;
  rep.side_condition = J > std::pow(times.back(), s);
  Propagator prop(V, cfg);
  FourierField u = u0.resized(cfg.band_limit);
  double t = 0.0;
  for (double ti : times) {
    u = prop.advance(u, t, ti);
    t = ti;
    rep.times.push_back(ti);
    rep.values.push_back(sobolev_norm(project_complement(u, P), w));
  }
  if (times.size() >= 2) {
    const LineFit f = fit_line(rep.times, rep.values);
    rep.a = f.intercept;
    rep.b = f.slope;
    rep.residual = f.rms_residual;
  }
  return rep;
}

FlowCommutatorReport flow_commutator_experiment(const FourierField& u0, const PotentialSpec& V,
                                                int J, double s, const std::vector<double>& times,
                                                const PropagatorConfig& cfg, bool duhamel_check) {
  check_times(times);
  const ProjectionProfile P(J);
  const SobolevWeight w(s);
  const int N = cfg.band_limit;
  if (u0.band_limit() > N)
    throw std::invalid_argument("flow commutator: u0 exceeds the propagation band");
  FlowCommutatorReport rep;
  rep.side_condition = J > std::pow(times.back(), s);
  const FourierField base = u0.resized(N);
  // Columns: u0 and Pi_J u0 share every step.
  Eigen::MatrixXcd U(2 * N + 1, 2);
  U.col(0) = base.coefficients();
  U.col(1) = project(base, P).coefficients();
  Propagator prop(V, cfg);
  std::vector<FourierField> direct;
  double t = 0.0;
  for (double ti : times) {
    prop.advance(U, t, ti);
    t = ti;
    const FourierField su(N, U.col(0)), spu(N, U.col(1));
    direct.push_back(spu - project(su, P));
    rep.times.push_back(ti);
    rep.values.push_back(sobolev_norm(direct.back(), w));
  }
  if (duhamel_check) {
    const auto ws = duhamel_commutator(base, V, J, times, cfg.oracle_tol);
    for (std::size_t i = 0; i < ws.size(); ++i) {
      rep.duhamel_values.push_back(sobolev_norm(ws[i], w));
      rep.max_discrepancy = std::max(rep.max_discrepancy, sobolev_norm(ws[i] - direct[i], w));
    }
  }
  return rep;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "J, s, t, value, schur_bound\n";
  char buf[200];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d, %.17g, %.17g, %.17g, %.17g\n", r.J, r.s, r.t, r.value,
                  r.schur_bound);
    out << buf;
  }
}

}  // namespace kdvlab
