#include "weaksym/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace weaksym {

namespace {

// Nodes via Newton iteration on Legendre polynomials; deterministic tables.
void legendre_nodes(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::fabs(dt) < 1e-15) break;
    }
    double p0 = 1.0, p1 = t;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (t * p1 - p0) / (t * t - 1.0);
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

struct Table {
  std::vector<double> x, w;
};

const Table& table_for(int order) {
  static std::mutex mu;
  static std::map<int, Table> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) {
    Table t;
    legendre_nodes(order, t.x, t.w);
    it = cache.emplace(order, std::move(t)).first;
  }
  return it->second;
}

double panel(const std::function<double(double)>& f, double a, double b,
             const Table& t) {
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (size_t i = 0; i < t.x.size(); ++i) acc += t.w[i] * f(mid + half * t.x[i]);
  return acc * half;
}

}  // namespace

const std::vector<double>& gauss_nodes(int order) { return table_for(order).x; }
const std::vector<double>& gauss_weights(int order) { return table_for(order).w; }

QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, const QuadratureSpec& spec) {
  const Table& t = table_for(spec.panel_order);
  const Table& t2 = table_for(spec.panel_order + 6);

  struct Seg { double a, b; };
  std::vector<double> cuts{a, b};
  for (double p : spec.layer_points) {
    if (!std::isfinite(p) || p <= a || p >= b) continue;
    double w = spec.layer_width > 0 ? spec.layer_width : (b - a) * 1e-3;
    for (double c : {p - 8 * w, p - w, p, p + w, p + 8 * w})
      if (c > a && c < b) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<Seg> work;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) work.push_back({cuts[i], cuts[i + 1]});

  QuadratureResult res;
  int panels = 0;
  double value = 0.0, err = 0.0;
  // per-segment tolerance share
  double tol_per = spec.tolerance / std::max<size_t>(1, work.size());
  std::vector<Seg> stack = work;
  while (!stack.empty()) {
    Seg s = stack.back();
    stack.pop_back();
    if (++panels > spec.max_panels) {
      res.converged = false;
      res.value = value;
      res.error_estimate = err + 1.0;  // flag non-convergence
      res.panels_used = panels;
      return res;
    }
    double coarse = panel(f, s.a, s.b, t);
    double fine = panel(f, s.a, s.b, t2);
    double e = std::fabs(fine - coarse);
    double local_tol = std::max(tol_per, 1e-16 * std::fabs(fine));
    if (e <= local_tol || (s.b - s.a) < 1e-14 * (b - a)) {
      value += fine;
      err += e;
    } else {
      double mid = 0.5 * (s.a + s.b);
      stack.push_back({s.a, mid});
      stack.push_back({mid, s.b});
    }
  }
  res.value = value;
  res.error_estimate = err;
  res.converged = err <= spec.tolerance * 10 + 1e-14;
  res.panels_used = panels;
  return res;
}

QuadratureResult integrate2d(const std::function<double(double, double)>& f,
                             double ax, double bx, double ay, double by,
                             const QuadratureSpec& spec,
                             const std::function<double(double)>& layer_curve) {
  QuadratureSpec inner = spec;
  inner.tolerance = spec.tolerance * 0.1;
  bool ok = true;
  double err_acc = 0.0;
  int panels_acc = 0;
  auto outer_f = [&](double y) {
    QuadratureSpec si = inner;
    if (layer_curve) si.layer_points = {layer_curve(y)};
    auto r = integrate([&](double x) { return f(x, y); }, ax, bx, si);
    ok = ok && r.converged;
    err_acc += r.error_estimate;
    panels_acc += r.panels_used;
    return r.value;
  };
  QuadratureSpec outer = spec;
  outer.layer_points.clear();
  auto r = integrate(outer_f, ay, by, outer);
  r.converged = r.converged && ok;
  r.panels_used += panels_acc;
  return r;
}

}  // namespace weaksym
