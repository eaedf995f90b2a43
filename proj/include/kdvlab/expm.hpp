#pragma once

#include <complex>

#include <Eigen/Dense>

namespace kdvlab {

/// Dense exponential e^{A}; scaling and squaring with a degree-13 Pade approximant.
Eigen::MatrixXcd expm(const Eigen::MatrixXcd& A);

/// Spectral data of a Hermitian tridiagonal matrix A = P S P^H with P a diagonal
/// phase and S real symmetric tridiagonal, S = Z diag(values) Z^T.
struct TridiagonalEigen {
  Eigen::VectorXcd phase;
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;

  int size() const { return static_cast<int>(values.size()); }
  /// k-th eigenvector of A (column of P Z).
  Eigen::VectorXcd eigenvector(int k) const;
};

/// diag: real diagonal of A; sub: A(k+1, k), k = 0..n-2.
TridiagonalEigen hermitian_tridiagonal_eigen(const Eigen::VectorXd& diag,
                                             const Eigen::VectorXcd& sub);

/// X <- e^{i h A} X using a precomputed decomposition.
void apply_exp_i(const TridiagonalEigen& eig, double h, Eigen::MatrixXcd& X);

}  // namespace kdvlab
