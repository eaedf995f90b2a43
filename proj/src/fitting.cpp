#include "kdvlab/fitting.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace kdvlab {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: length mismatch");
  if (x.size() < 2) throw std::invalid_argument("fit_line: need at least two points");
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0)) throw std::invalid_argument("fit_line: abscissae are all equal");
  LineFit f;
  f.points = static_cast<int>(x.size());
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    rss += r * r;
  }
  f.rms_residual = std::sqrt(rss / n);
  f.slope_se = x.size() > 2 ? std::sqrt(rss / (n - 2) / sxx) : 0.0;
  return f;
}

GrowthFit fit_exponents(const GrowthTrace& trace, double s, double varsigma) {
  const auto values = trace.series(s);
  std::vector<double> t, v;
  for (std::size_t i = 0; i < trace.times.size(); ++i)
    if (trace.times[i] > 0) {
      t.push_back(trace.times[i]);
      v.push_back(values[i]);
    }
  if (t.size() < 20)
    throw std::invalid_argument("fit_exponents: need at least 20 samples with t > 0, got " +
                                std::to_string(t.size()));
  if (t.back() < 10.0 * t.front())
    throw std::invalid_argument("fit_exponents: samples must span at least one decade in t");
  for (double x : v)
    if (!(x > 0)) throw std::invalid_argument("fit_exponents: norms must be positive");

  const std::size_t start = t.size() / 2;
  std::vector<double> lt, llt, lv;
  for (std::size_t i = start; i < t.size(); ++i) {
    lt.push_back(std::log(t[i]));
    llt.push_back(std::log(std::log(t[i] + 2.0)));
    lv.push_back(std::log(v[i]));
  }
  const LineFit p = fit_line(lt, lv);
  const LineFit q = fit_line(llt, lv);
  GrowthFit g;
  g.s = s;
  g.p_hat = p.slope;
  g.p_se = p.slope_se;
  g.p_residual = p.rms_residual;
  g.q_hat = q.slope;
  g.q_se = q.slope_se;
  g.q_residual = q.rms_residual;
  g.tail_samples = p.points;
  g.reference_poly = s;
  g.reference_log = varsigma * s;
  return g;
}

}  // namespace kdvlab
