#include "kdvlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace kdvlab {

FourierField::FourierField(int band_limit)
    : band_(band_limit), coeffs_(Eigen::VectorXcd::Zero(2 * band_limit + 1)) {
  if (band_limit < 0) throw std::invalid_argument("band limit must be nonnegative");
}

FourierField::FourierField(int band_limit, Eigen::VectorXcd coefficients)
    : band_(band_limit), coeffs_(std::move(coefficients)) {
  if (band_limit < 0) throw std::invalid_argument("band limit must be nonnegative");
  if (coeffs_.size() != 2 * band_limit + 1)
    throw std::invalid_argument("coefficient array length must be 2N+1");
}

cplx FourierField::at(int j) const {
  if (j < -band_ || j > band_) return {};
  return (*this)[j];
}

bool FourierField::is_real_valued(double tol) const {
  const double scale = std::max(coeffs_.norm(), 1e-300);
  for (int j = 1; j <= band_; ++j) {
    if (std::abs((*this)[-j] - std::conj((*this)[j])) > tol * scale) return false;
  }
  return std::abs((*this)[0].imag()) <= tol * scale;
}

FourierField FourierField::resized(int band_limit) const {
  FourierField out(band_limit);
  const int m = std::min(band_limit, band_);
  for (int j = -m; j <= m; ++j) out[j] = (*this)[j];
  return out;
}

FourierField& FourierField::operator+=(const FourierField& other) {
  if (other.band_ != band_) throw std::invalid_argument("band limits differ");
  coeffs_ += other.coeffs_;
  return *this;
}

FourierField& FourierField::operator-=(const FourierField& other) {
  if (other.band_ != band_) throw std::invalid_argument("band limits differ");
  coeffs_ -= other.coeffs_;
  return *this;
}

FourierField& FourierField::operator*=(cplx a) {
  coeffs_ *= a;
  return *this;
}

FourierField operator+(FourierField a, const FourierField& b) { return a += b; }
FourierField operator-(FourierField a, const FourierField& b) { return a -= b; }
FourierField operator*(cplx a, FourierField f) { return f *= a; }

SobolevWeight::SobolevWeight(double s) : s_(s) {
  if (!(s >= 0.0)) throw std::invalid_argument("Sobolev index must be nonnegative");
}

double SobolevWeight::operator()(int j) const {
  const int a = std::max(std::abs(j), 1);
  return a == 1 ? 1.0 : std::pow(static_cast<double>(a), s_);
}

ProjectionProfile::ProjectionProfile(int J) : J_(J) {
  if (J <= 0 || J % 2 != 0)
    throw std::invalid_argument("projection cutoff J must be a positive even integer");
}

double ProjectionProfile::operator()(int j) const {
  const int a = std::abs(j);
  if (2 * a <= J_) return 1.0;
  if (a <= J_) return 2.0 * (1.0 - static_cast<double>(a) / J_);
  return 0.0;
}

double sobolev_norm(const FourierField& field, const SobolevWeight& weight) {
  double acc = 0.0;
  for (int j = -field.band_limit(); j <= field.band_limit(); ++j) {
    const double w = weight(j);
    acc += w * w * std::norm(field[j]);
  }
  return std::sqrt(acc);
}

double sobolev_norm(const FourierField& field, double s) {
  return sobolev_norm(field, SobolevWeight(s));
}

double l2_norm(const FourierField& field) { return field.coefficients().norm(); }

FourierField project(const FourierField& field, const ProjectionProfile& profile) {
  FourierField out = field;
  for (int j = -field.band_limit(); j <= field.band_limit(); ++j) out[j] *= profile(j);
  return out;
}

FourierField project_difference(const FourierField& field, const ProjectionProfile& a,
                                const ProjectionProfile& b) {
  FourierField out = field;
  for (int j = -field.band_limit(); j <= field.band_limit(); ++j) out[j] *= a(j) - b(j);
  return out;
}

FourierField project_complement(const FourierField& field, const ProjectionProfile& profile) {
  FourierField out = field;
  for (int j = -field.band_limit(); j <= field.band_limit(); ++j) out[j] *= 1.0 - profile(j);
  return out;
}

FourierField band_filter(const FourierField& field, double lo, double hi) {
  if (!(lo >= 0.0)) throw std::invalid_argument("band_filter: lo must be nonnegative");
  if (!(lo < hi)) throw std::invalid_argument("band_filter: lo must be below hi");
  FourierField out = field;
  for (int j = -field.band_limit(); j <= field.band_limit(); ++j) {
    const double a = std::abs(j);
    if (a < lo || a > hi) out[j] = 0.0;
  }
  return out;
}

std::vector<DyadicBlock> dyadic_blocks(const FourierField& field) {
  std::vector<DyadicBlock> blocks;
  const int N = field.band_limit();
  for (int R = 1; R <= std::max(2 * N, 1); R *= 2) {
    FourierField block(N);
    for (int k = -N; k <= N; ++k) {
      const int a = std::abs(k);
      // R/4 < |k| < 4R, kept in integers.
      if (R < 4 * a && a < 4 * R) block[k] = field[k];
    }
    blocks.push_back({R, std::move(block)});
  }
  return blocks;
}

double interpolation_gap(const FourierField& field, double s, double gamma) {
  if (!(gamma > 0.0 && gamma < s))
    throw std::invalid_argument("interpolation_gap requires 0 < gamma < s");
  const double l2 = l2_norm(field);
  if (l2 == 0.0) throw std::invalid_argument("interpolation_gap requires a nonzero field");
  const double hs = sobolev_norm(field, s);
  const double lower = sobolev_norm(field, s - gamma);
  return std::pow(hs, (s - gamma) / s) * std::pow(l2, gamma / s) - lower;
}

FourierField read_field(std::istream& in) {
  std::vector<std::pair<int, cplx>> entries;
  std::string line;
  int band = 0;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    int j = 0;
    double re = 0.0, im = 0.0;
    if (!(ls >> j >> re >> im))
      throw std::invalid_argument("field file: malformed line " + std::to_string(lineno));
    entries.emplace_back(j, cplx(re, im));
    band = std::max(band, std::abs(j));
  }
  FourierField out(band);
  for (const auto& [j, c] : entries) out[j] += c;
  return out;
}

void write_field(std::ostream& out, const FourierField& field) {
  char buf[96];
  for (int j = -field.band_limit(); j <= field.band_limit(); ++j) {
    std::snprintf(buf, sizeof buf, "%d %.17g %.17g\n", j, field[j].real(), field[j].imag());
    out << buf;
  }
}

}  // namespace kdvlab
