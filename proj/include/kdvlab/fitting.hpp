#pragma once

#include <vector>

#include "kdvlab/evolution.hpp"

namespace kdvlab {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double rms_residual = 0.0;
  int points = 0;
};

/// Ordinary least squares y = intercept + slope x; needs at least two distinct x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct GrowthFit {
  double s = 0.0;
  double p_hat = 0.0;  // slope of log ||u|| against log t
  double p_se = 0.0;
  double p_residual = 0.0;
  double q_hat = 0.0;  // slope of log ||u|| against log log(t + 2)
  double q_se = 0.0;
  double q_residual = 0.0;
  int tail_samples = 0;
  double reference_poly = 0.0;  // s
  double reference_log = 0.0;   // varsigma s
};

/// Fits on the tail half of the samples with t > 0. Needs >= 20 such samples
/// spanning at least a decade in t.
GrowthFit fit_exponents(const GrowthTrace& trace, double s, double varsigma = 4.0);

}  // namespace kdvlab
