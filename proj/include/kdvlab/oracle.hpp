#pragma once

#include <vector>

#include "kdvlab/potential.hpp"
#include "kdvlab/spectral.hpp"

namespace kdvlab {

/// Reference solution of the coefficient ODE by adaptive Runge-Kutta-Fehlberg 7(8).
/// The step tolerance is tightened until successive runs agree to tol, relative to
/// max(1, ||u||). No structural conservation. Throws NumericalError if tol is out of reach.
FourierField dense_oracle(const FourierField& u0, const PotentialSpec& V, double t0, double t1,
                          double tol);

/// [S(t), Pi_J] u0 at each time, from the variation-of-constants system
/// w' = G w + [G, Pi_J] S(t) u0, w(0) = 0.
std::vector<FourierField> duhamel_commutator(const FourierField& u0, const PotentialSpec& V,
                                             int J, const std::vector<double>& times,
                                             double tol);

}  // namespace kdvlab
