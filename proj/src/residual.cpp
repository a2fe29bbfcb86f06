#include "weaksym/residual.hpp"

#include <cmath>
#include <limits>

#include "weaksym/quadrature.hpp"
#include "weaksym/rk4.hpp"

namespace weaksym {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void ensure_bump2(SymbolTable& table) {
  if (table.has_opaque("bump2")) return;
  OpaqueFn d;
  d.arity = 1;
  d.evaluator = [](const std::vector<double>& a) {
    double w = a[0];
    if (w >= 1.0) return 0.0;
    double s = 1.0 - w;
    return -std::exp(-1.0 / s) / (s * s);
  };
  table.register_opaque("bump2_d", d);
  OpaqueFn f;
  f.arity = 1;
  f.evaluator = [](const std::vector<double>& a) {
    double w = a[0];
    if (w >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - w));
  };
  f.rules = {[](const std::vector<Expr>& a) {
    return Expr::opaque("bump2_d", a);
  }};
  table.register_opaque("bump2", f);
}

Expr radial_bump(const std::vector<double>& center, double radius, double s,
                 const JetSpec& spec) {
  Expr w = Expr::integer(0);
  for (int i = 0; i < spec.p(); ++i) {
    Expr d = (Expr::symbol(spec.independent(i)) - Expr::number(center[i])) /
             Expr::number(s * radius);
    w = w + d * d;
  }
  return Expr::opaque("bump2", {w});
}

// Substitution of every jet coordinate by the matching derivative of the net.
std::vector<std::pair<SymbolId, Expr>> net_jet_map(const GNet& net,
                                                   const JetSpec& spec,
                                                   SymbolTable& table) {
  if ((int)net.u.size() != spec.q())
    throw NetError("net component count does not match the jet space");
  std::vector<std::pair<SymbolId, Expr>> map;
  for (const auto& c : spec.coordinates()) {
    if (c.dep < 0) continue;
    Expr e = net.u[c.dep];
    for (int i : c.multi) e = differentiate(e, spec.independent(i), table);
    map.push_back({c.sym, e});
  }
  return map;
}

// Root of the layer expression in the first variable at fixed remaining
// variables; NaN when there is no sign change on [a, b].
double layer_root(const CompiledExpr& layer, double a, double b,
                  const std::vector<double>& rest) {
  std::vector<double> args(rest.size() + 1);
  std::copy(rest.begin(), rest.end(), args.begin() + 1);
  auto f = [&](double x) {
    args[0] = x;
    return layer.eval(args.data());
  };
  const int scan = 64;
  double x0 = a, f0 = f(a);
  for (int i = 1; i <= scan; ++i) {
    double x1 = a + (b - a) * i / scan;
    double f1 = f(x1);
    if (f0 == 0.0) return x0;
    if (f0 * f1 < 0.0) {
      for (int it = 0; it < 60; ++it) {
        double xm = 0.5 * (x0 + x1), fm = f(xm);
        if (f0 * fm <= 0.0) {
          x1 = xm;
        } else {
          x0 = xm;
          f0 = fm;
        }
      }
      return 0.5 * (x0 + x1);
    }
    x0 = x1;
    f0 = f1;
  }
  return kNaN;
}

}  // namespace

ProbeFamily make_probe_family(const std::vector<std::pair<double, double>>& box,
                              int k, const JetSpec& spec, SymbolTable& table,
                              int centers) {
  if ((int)box.size() != spec.p()) throw NetError("probe box dimension mismatch");
  ensure_bump2(table);
  ProbeFamily fam;
  fam.k = k;
  for (int c = 0; c < centers; ++c) {
    double t = (c + 1) / (double)(centers + 1);
    std::vector<double> a(spec.p());
    double radius = std::numeric_limits<double>::max();
    for (int i = 0; i < spec.p(); ++i) {
      a[i] = box[i].first + t * (box[i].second - box[i].first);
      radius = std::min(radius,
                        0.9 * std::min(a[i] - box[i].first,
                                       box[i].second - a[i]));
    }
    for (double s : {1.0, 0.5, 0.25}) {
      Expr pre = Expr::number(std::pow(s, k));
      fam.members.push_back(pre * radial_bump(a, radius, s, spec));
    }
  }
  return fam;
}

Expr unit_mass_probe(const std::vector<std::pair<double, double>>& box,
                     const JetSpec& spec, SymbolTable& table) {
  if ((int)box.size() != spec.p() || spec.p() > 2)
    throw NetError("unit-mass probe supports p <= 2");
  ensure_bump2(table);
  std::vector<double> a(spec.p());
  double radius = std::numeric_limits<double>::max();
  for (int i = 0; i < spec.p(); ++i) {
    a[i] = 0.5 * (box[i].first + box[i].second);
    radius = std::min(radius, 0.45 * (box[i].second - box[i].first));
  }
  Expr bump = radial_bump(a, radius, 1.0, spec);
  std::vector<SymbolId> inputs;
  for (int i = 0; i < spec.p(); ++i) inputs.push_back(spec.independent(i));
  CompiledExpr ce(bump, table, inputs);
  double mass;
  if (spec.p() == 1) {
    auto q = integrate([&](double x) { return ce.eval(&x); }, box[0].first,
                       box[0].second);
    mass = q.value;
  } else {
    auto q = integrate2d(
        [&](double x, double y) {
          double args[2] = {x, y};
          return ce.eval(args);
        },
        box[0].first, box[0].second, box[1].first, box[1].second);
    mass = q.value;
  }
  return bump / Expr::number(mass);
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::ConvergesToZero: return "converges-to-zero";
    case Verdict::ConvergesToNonzero: return "converges-to-nonzero";
    case Verdict::Diverges: return "diverges";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

void classify_curve(const std::vector<double>& eps,
                    const std::vector<double>& r, double& slope,
                    Verdict& verdict, double& limit) {
  slope = 0.0;
  limit = kNaN;
  size_t n = eps.size();
  double maxr = 0.0;
  for (double v : r) maxr = std::max(maxr, std::fabs(v));
  if (maxr <= 1e-13) {
    slope = 4.0;
    verdict = Verdict::ConvergesToZero;
    return;
  }
  size_t half = n - n / 2;  // last ceil(n/2) points
  std::vector<double> e2(eps.end() - half, eps.end());
  std::vector<double> a2;
  for (size_t i = n - half; i < n; ++i) a2.push_back(std::fabs(r[i]));
  auto fit = fit_power_law(e2, a2);
  double eps_min = eps.back();
  double r_min = std::fabs(r.back());
  if (fit.valid) {
    slope = fit.slope;
    if (slope >= 0.5 && r_min <= 10.0 * std::sqrt(eps_min) * maxr) {
      verdict = Verdict::ConvergesToZero;
      return;
    }
    if (slope <= -0.5) {
      verdict = Verdict::Diverges;
      return;
    }
  }
  // Richardson extrapolation assuming r = L + C eps on a halving grid
  auto rich = [&](size_t i) {
    double e1 = eps[i - 1], e0 = eps[i];
    return r[i] + (r[i] - r[i - 1]) * e0 / (e1 - e0);
  };
  double L2 = rich(n - 1);
  double L1 = rich(n / 2);
  double scale = std::max({std::fabs(L1), std::fabs(L2), 1e-12});
  if (std::fabs(L1 - L2) > 0.2 * scale) {
    verdict = Verdict::Inconclusive;
    return;
  }
  limit = L2;
  verdict = Verdict::ConvergesToNonzero;
}

ResidualCurve weak_residual_curve(const PDESystem& sys, const GNet& net,
                                  const Expr& phi,
                                  const std::vector<double>& grid,
                                  SymbolTable& table) {
  const JetSpec& spec = sys.spec;
  if (spec.p() > 2) throw NetError("residual quadrature supports p <= 2");
  if (net.domain.empty()) throw NetError("net needs a domain box");
  std::vector<double> eps = grid;
  std::sort(eps.begin(), eps.end(), std::greater<double>());

  auto jmap = net_jet_map(net, spec, table);
  std::vector<SymbolId> inputs;
  for (int i = 0; i < spec.p(); ++i) inputs.push_back(spec.independent(i));
  inputs.push_back(table.eps());

  std::optional<CompiledExpr> layer;
  if (net.layer) layer.emplace(*net.layer, table, inputs);

  ResidualCurve curve;
  curve.epsilons = eps;
  curve.residuals.assign(sys.s(), {});
  const auto& box = net.domain;

  for (int i = 0; i < sys.s(); ++i) {
    Expr integrand = substitute(sys.delta[i], jmap) * phi;
    CompiledExpr ce(integrand, table, inputs);
    for (double e : eps) {
      QuadratureSpec qs;
      qs.layer_width = e;
      QuadratureResult res;
      if (spec.p() == 1) {
        if (layer) {
          double root = layer_root(*layer, box[0].first, box[0].second, {e});
          if (std::isfinite(root)) qs.layer_points = {root};
        }
        res = integrate(
            [&](double x) {
              double args[2] = {x, e};
              return ce.eval(args);
            },
            box[0].first, box[0].second, qs);
      } else {
        std::function<double(double)> curve_fn = nullptr;
        if (layer) {
          curve_fn = [&, e](double y) {
            return layer_root(*layer, box[0].first, box[0].second, {y, e});
          };
        }
        res = integrate2d(
            [&](double x, double y) {
              double args[3] = {x, y, e};
              return ce.eval(args);
            },
            box[0].first, box[0].second, box[1].first, box[1].second, qs,
            curve_fn);
      }
      if (!res.converged) curve.quadrature_trouble = true;
      curve.residuals[i].push_back(res.value);
    }
  }

  for (int i = 0; i < sys.s(); ++i) {
    double slope, limit;
    Verdict v;
    classify_curve(curve.epsilons, curve.residuals[i], slope, v, limit);
    if (curve.quadrature_trouble) v = Verdict::Inconclusive;
    curve.slopes.push_back(slope);
    curve.verdicts.push_back(v);
    curve.limit_estimates.push_back(limit);
  }
  return curve;
}

ResidualCurve strong_association_check(const PDESystem& sys, const GNet& net,
                                       const ProbeFamily& family,
                                       const std::vector<double>& grid,
                                       SymbolTable& table) {
  ResidualCurve sup;
  bool first = true;
  for (const Expr& phi : family.members) {
    ResidualCurve c = weak_residual_curve(sys, net, phi, grid, table);
    if (first) {
      sup = c;
      for (auto& row : sup.residuals)
        for (auto& v : row) v = std::fabs(v);
      first = false;
      continue;
    }
    sup.quadrature_trouble = sup.quadrature_trouble || c.quadrature_trouble;
    for (int i = 0; i < sys.s(); ++i)
      for (size_t j = 0; j < sup.epsilons.size(); ++j)
        sup.residuals[i][j] =
            std::max(sup.residuals[i][j], std::fabs(c.residuals[i][j]));
  }
  if (first) throw NetError("empty probe family");
  sup.slopes.clear();
  sup.verdicts.clear();
  sup.limit_estimates.clear();
  for (int i = 0; i < sys.s(); ++i) {
    double slope, limit;
    Verdict v;
    classify_curve(sup.epsilons, sup.residuals[i], slope, v, limit);
    if (sup.quadrature_trouble) v = Verdict::Inconclusive;
    sup.slopes.push_back(slope);
    sup.verdicts.push_back(v);
    sup.limit_estimates.push_back(limit);
  }
  return sup;
}

}  // namespace weaksym
