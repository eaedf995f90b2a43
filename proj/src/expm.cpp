#include "kdvlab/expm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>
#include <string>

#include <lapacke.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "kdvlab/errors.hpp"

namespace kdvlab {

Eigen::MatrixXcd expm(const Eigen::MatrixXcd& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("expm: matrix must be square");
  return A.exp();
}

namespace {

// O(n^2) audit on a fixed probe p: ||T Z p - Z diag(w) p|| and ||Z^T Z p|| against ||p||.
bool decomposition_ok(const Eigen::VectorXd& d, const Eigen::VectorXd& e, const Eigen::VectorXd& w,
                      const Eigen::MatrixXd& Z) {
  const Eigen::Index n = d.size();
  double scale = 1.0;
  for (Eigen::Index k = 0; k < n; ++k)
    scale = std::max(scale, std::abs(d[k]) + (k > 0 ? e[k - 1] : 0.0) + (k + 1 < n ? e[k] : 0.0));
  Eigen::VectorXd p(n);
  for (Eigen::Index k = 0; k < n; ++k) p[k] = std::sin(1.0 + 0.7 * static_cast<double>(k));
  const Eigen::VectorXd y = Z * p;
  Eigen::VectorXd r = d.cwiseProduct(y) - Z * w.cwiseProduct(p);
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    r[k] += e[k] * y[k + 1];
    r[k + 1] += e[k] * y[k];
  }
  const double pn = p.norm();
  if (!(r.norm() <= 1e-12 * scale * pn)) return false;
  return std::abs((Z.transpose() * y).norm() / pn - 1) <= 1e-11;
}

}  // namespace

Eigen::VectorXcd TridiagonalEigen::eigenvector(int k) const {
  return phase.cwiseProduct(vectors.col(k).cast<std::complex<double>>());
}

TridiagonalEigen hermitian_tridiagonal_eigen(const Eigen::VectorXd& diag,
                                             const Eigen::VectorXcd& sub) {
  const lapack_int n = static_cast<lapack_int>(diag.size());
  if (n == 0) throw std::invalid_argument("tridiagonal eigen: empty matrix");
  if (sub.size() != n - 1) throw std::invalid_argument("tridiagonal eigen: sub length must be n-1");
  TridiagonalEigen out;
  out.phase.resize(n);
  out.phase[0] = 1.0;
  // Gauge the complex couplings onto the positive reals.
  Eigen::VectorXd e(std::max<lapack_int>(n, 1));
  e.setZero();
  for (lapack_int k = 0; k + 1 < n; ++k) {
    const double a = std::abs(sub[k]);
    out.phase[k + 1] = a > 0 ? out.phase[k] * (sub[k] / a) : out.phase[k];
    e[k] = a;
  }
  out.values.resize(n);
  out.vectors.resize(n, n);
  Eigen::VectorXd d = diag, sub_abs = e;
  // Divide and conquer first: the strong diagonal makes deflation do most of the work.
  lapack_int info = LAPACKE_dstedc(LAPACK_COL_MAJOR, 'I', n, d.data(), sub_abs.data(),
                                   out.vectors.data(), n);
  if (info == 0 && decomposition_ok(diag, e, d, out.vectors)) {
    out.values = d;
    return out;
  }
  // The reference dlaed path occasionally loses orthogonality without reporting it; MRRR is
  // slower here but has not shown that failure.
  d = diag;
  sub_abs = e;
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
  lapack_int m = 0;
  lapack_logical tryrac = 1;
  info = LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'A', n, d.data(), sub_abs.data(), 0.0, 0.0, 0, 0, &m,
                        out.values.data(), out.vectors.data(), n, n, isuppz.data(), &tryrac);
  if (info != 0 || m != n)
    throw NumericalError("dstemr failed (info " + std::to_string(info) + ", found " +
                         std::to_string(m) + " of " + std::to_string(n) + " eigenpairs)");
  if (!decomposition_ok(diag, e, out.values, out.vectors))
    throw NumericalError("tridiagonal eigensolve lost accuracy (n = " + std::to_string(n) + ")");
  return out;
}

void apply_exp_i(const TridiagonalEigen& eig, double h, Eigen::MatrixXcd& X) {
  const Eigen::Index n = eig.size();
  if (X.rows() != n) throw std::invalid_argument("apply_exp_i: dimension mismatch");
  // Work in real arithmetic on the gauged basis: Y = Z^T P^H X.
  Eigen::MatrixXcd Y = eig.phase.conjugate().asDiagonal() * X;
  Eigen::MatrixXd re = eig.vectors.transpose() * Y.real();
  Eigen::MatrixXd im = eig.vectors.transpose() * Y.imag();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double c = std::cos(h * eig.values[k]), s = std::sin(h * eig.values[k]);
    for (Eigen::Index col = 0; col < X.cols(); ++col) {
      const double a = re(k, col), b = im(k, col);
      re(k, col) = c * a - s * b;
      im(k, col) = s * a + c * b;
    }
  }
  Y.real() = eig.vectors * re;
  Y.imag() = eig.vectors * im;
  X = eig.phase.asDiagonal() * Y;
}

}  // namespace kdvlab
