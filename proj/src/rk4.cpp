#include "weaksym/rk4.hpp"

namespace weaksym {

std::vector<double> rk4_solve(
    const std::function<std::vector<double>(double, const std::vector<double>&)>& rhs,
    std::vector<double> y, double t0, double t1, int steps) {
  if (steps < 1) throw std::invalid_argument("rk4_solve: steps must be >= 1");
  const double h = (t1 - t0) / steps;
  const size_t n = y.size();
  std::vector<double> k1, k2, k3, k4, tmp(n);
  for (int s = 0; s < steps; ++s) {
    double t = t0 + s * h;
    k1 = rhs(t, y);
    for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    k2 = rhs(t + 0.5 * h, tmp);
    for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    k3 = rhs(t + 0.5 * h, tmp);
    for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    k4 = rhs(t + h, tmp);
    for (size_t i = 0; i < n; ++i) {
      y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!std::isfinite(y[i]) || std::fabs(y[i]) > 1e12)
        throw OdeBlowup("rk4_solve: trajectory escaped (|y| > 1e12)");
    }
  }
  return y;
}

PowerLawFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys) {
  PowerLawFit fit;
  if (xs.size() != ys.size() || xs.size() < 4) return fit;
  for (size_t i = 1; i < xs.size(); ++i)
    if ((xs[i] - xs[i - 1]) * (xs[1] - xs[0]) <= 0) return fit;  // not monotone
  std::vector<double> lx, ly;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] <= 0.0 || ys[i] <= 0.0) return fit;  // undefined slope, reported
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(ys[i]));
  }
  double n = (double)lx.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0.0) return fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double rss = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    double r = ly[i] - (fit.slope * lx[i] + fit.intercept);
    rss += r * r;
  }
  fit.residual_norm = std::sqrt(rss);
  fit.span = std::fabs(lx.back() - lx.front());
  fit.valid = true;
  return fit;
}

}  // namespace weaksym
