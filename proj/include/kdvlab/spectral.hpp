#pragma once

#include <complex>
#include <iosfwd>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace kdvlab {

using cplx = std::complex<double>;

/// A periodic function on the circle, u(x) = sum_j c_j e^{ijx}, stored on the
/// symmetric mode band [-N, N]. Norms are l2 of coefficients (no 2*pi factor).
class FourierField {
 public:
  FourierField() = default;
  explicit FourierField(int band_limit);
  FourierField(int band_limit, Eigen::VectorXcd coefficients);

  int band_limit() const { return band_; }
  int size() const { return 2 * band_ + 1; }

  cplx operator[](int j) const { return coeffs_[j + band_]; }
  cplx& operator[](int j) { return coeffs_[j + band_]; }

  /// Coefficient of mode j, zero outside the band.
  cplx at(int j) const;

  const Eigen::VectorXcd& coefficients() const { return coeffs_; }
  Eigen::VectorXcd& coefficients() { return coeffs_; }

  /// True when c_{-j} = conj(c_j) for every j, up to `tol` relative to the l2 norm.
  bool is_real_valued(double tol = 1e-12) const;

  /// Copy onto a different band, zero-padding or dropping modes.
  FourierField resized(int band_limit) const;

  FourierField& operator+=(const FourierField& other);
  FourierField& operator-=(const FourierField& other);
  FourierField& operator*=(cplx a);

 private:
  int band_ = 0;
  Eigen::VectorXcd coeffs_;
};

FourierField operator+(FourierField a, const FourierField& b);
FourierField operator-(FourierField a, const FourierField& b);
FourierField operator*(cplx a, FourierField f);

/// w(j) = max(|j|, 1)^s.
class SobolevWeight {
 public:
  explicit SobolevWeight(double s);
  double s() const { return s_; }
  double operator()(int j) const;

 private:
  double s_;
};

/// The smoothed cutoff: 1 on |j| <= J/2, 2(1 - |j|/J) on the ramp, 0 beyond J.
class ProjectionProfile {
 public:
  explicit ProjectionProfile(int J);
  int cutoff() const { return J_; }
  double operator()(int j) const;

 private:
  int J_;
};

double sobolev_norm(const FourierField& field, const SobolevWeight& weight);
double sobolev_norm(const FourierField& field, double s);
double l2_norm(const FourierField& field);

FourierField project(const FourierField& field, const ProjectionProfile& profile);

/// Pi_a - Pi_b applied to the field.
FourierField project_difference(const FourierField& field, const ProjectionProfile& a,
                                const ProjectionProfile& b);

/// (I - Pi_J) applied to the field.
FourierField project_complement(const FourierField& field, const ProjectionProfile& profile);

/// Keeps lo <= |j| <= hi; everything else is zeroed.
FourierField band_filter(const FourierField& field, double lo,
                         double hi = std::numeric_limits<double>::infinity());

struct DyadicBlock {
  int R;
  FourierField block;
};

/// Blocks phi_R = sum_{R/4 < |k| < 4R} c_k e^{ikx} for R = 1, 2, 4, ... <= 2N.
std::vector<DyadicBlock> dyadic_blocks(const FourierField& field);

/// ||u||_{H^s}^{(s-g)/s} ||u||_{L2}^{g/s} - ||u||_{H^{s-g}}; nonnegative by Holder.
double interpolation_gap(const FourierField& field, double s, double gamma);

/// Columnar "j re im" text format; the band limit is the largest |j| present.
FourierField read_field(std::istream& in);
void write_field(std::ostream& out, const FourierField& field);

}  // namespace kdvlab
