#include "weaksym/gnet.hpp"

#include <cmath>
#include <limits>

#include "weaksym/rk4.hpp"

namespace weaksym {

GNet embed_heaviside(const Mollifier& m, const Expr& shift,
                     const SymbolTable& table) {
  GNet net;
  Expr eps = Expr::symbol(table.eps());
  net.u = {m.primitive(shift / eps)};
  net.layer = shift;
  net.claims_bounded = true;
  return net;
}

GNet embed_delta(const Mollifier& m, const Expr& shift,
                 const SymbolTable& table) {
  GNet net;
  Expr eps = Expr::symbol(table.eps());
  net.u = {m.theta(shift / eps) / eps};
  net.layer = shift;
  return net;
}

GNet apply_group(const GNet& net, const GroupAction& g, double eta,
                 const JetSpec& spec, SymbolTable& table) {
  validate_group_action(g, spec, table);
  if (std::fabs(eta) >= g.eta_max)
    throw NetError("eta outside the declared action range");

  Expr eta_e = Expr::number(eta);
  Expr meta_e = Expr::number(-eta);
  std::vector<Expr> fwd(spec.p()), inv(spec.p());
  for (int i = 0; i < spec.p(); ++i) {
    fwd[i] = substitute(g.Xi[i], table.eta(), eta_e);
    inv[i] = substitute(g.Xi[i], table.eta(), meta_e);
  }

  // Xi_{-eta} must invert Xi_eta on the domain box; validate at lattice points.
  {
    const auto& box =
        net.domain.empty()
            ? std::vector<std::pair<double, double>>(spec.p(), {-1.0, 1.0})
            : net.domain;
    if ((int)box.size() != spec.p())
      throw NetError("domain box dimension mismatch");
    int steps = 5;
    std::vector<int> idx(spec.p(), 0);
    bool carry = false;
    while (!carry) {
      Bindings b;
      for (int i = 0; i < spec.p(); ++i) {
        double t = (double)idx[i] / steps;
        b.set(spec.independent(i), box[i].first +
                                       t * (box[i].second - box[i].first));
      }
      try {
        Bindings mid;
        for (int i = 0; i < spec.p(); ++i)
          mid.set(spec.independent(i), evaluate(inv[i], b, table));
        for (int i = 0; i < spec.p(); ++i) {
          double back = evaluate(fwd[i], mid, table);
          if (std::fabs(back - b.get(spec.independent(i))) > 1e-8)
            throw NetError("group inverse validation failed on the domain");
        }
      } catch (const EvalError&) {
        throw NetError("group inverse leaves the evaluation domain");
      }
      int d = 0;
      for (; d < spec.p(); ++d) {
        if (++idx[d] <= steps) break;
        idx[d] = 0;
      }
      carry = (d == spec.p());
    }
  }

  std::vector<std::pair<SymbolId, Expr>> xmap;
  for (int i = 0; i < spec.p(); ++i) xmap.push_back({spec.independent(i), inv[i]});

  GNet out;
  out.domain = net.domain;
  out.claims_bounded = net.claims_bounded;
  if ((int)net.u.size() != spec.q())
    throw NetError("net component count does not match the jet space");
  std::vector<std::pair<SymbolId, Expr>> full = xmap;
  for (int a = 0; a < spec.q(); ++a)
    full.push_back({spec.dependent(a), substitute(net.u[a], xmap)});
  for (int a = 0; a < spec.q(); ++a) {
    Expr phi = substitute(g.Phi[a], table.eta(), eta_e);
    out.u.push_back(normalize(substitute(phi, full)));
  }
  if (net.layer) out.layer = substitute(*net.layer, xmap);
  return out;
}

std::vector<double> default_eps_grid() {
  std::vector<double> g;
  for (int j = 3; j <= 12; ++j) g.push_back(std::ldexp(1.0, -j));
  return g;
}

GrowthFit growth_exponent(const GNet& net, int component,
                          const std::vector<int>& alpha, const JetSpec& spec,
                          const std::vector<double>& grid, SymbolTable& table) {
  if (component < 0 || component >= (int)net.u.size())
    throw NetError("component out of range");
  if ((int)grid.size() < 8) throw NetError("growth fit needs >= 8 grid points");
  if (net.domain.empty()) throw NetError("growth fit needs a domain box");
  Expr e = net.u[component];
  for (int i : alpha) {
    if (i < 0 || i >= spec.p()) throw NetError("bad derivative index");
    e = differentiate(e, spec.independent(i), table);
  }
  e = normalize(e);

  std::vector<SymbolId> inputs;
  for (int i = 0; i < spec.p(); ++i) inputs.push_back(spec.independent(i));
  inputs.push_back(table.eps());
  CompiledExpr ce(e, table, inputs);

  const auto& box = net.domain;
  int n = 200;
  auto sup_on = [&](double eps, std::vector<std::pair<double, double>> b,
                    int pts, std::vector<double>* argmax) {
    std::vector<int> idx(spec.p(), 0);
    std::vector<double> args(spec.p() + 1);
    args[spec.p()] = eps;
    double best = 0.0;
    bool carry = false;
    while (!carry) {
      for (int i = 0; i < spec.p(); ++i)
        args[i] = b[i].first +
                  (b[i].second - b[i].first) * idx[i] / (double)pts;
      double v = std::fabs(ce.eval(args.data()));
      if (v > best) {
        best = v;
        if (argmax) argmax->assign(args.begin(), args.begin() + spec.p());
      }
      int d = 0;
      for (; d < spec.p(); ++d) {
        if (++idx[d] <= pts) break;
        idx[d] = 0;
      }
      carry = (d == spec.p());
    }
    return best;
  };

  // The coarse lattice misses layer-concentrated nets once eps drops below
  // the lattice spacing; add an eps-wide scan around the layer's zero set.
  std::optional<CompiledExpr> lce;
  if (net.layer && spec.p() <= 2) lce.emplace(*net.layer, table, inputs);
  auto layer_sup = [&](double eps) {
    double best = 0.0;
    std::vector<double> args(spec.p() + 1);
    args[spec.p()] = eps;
    int slices = (spec.p() == 1) ? 0 : 50;
    for (int j = 0; j <= slices; ++j) {
      if (spec.p() == 2)
        args[1] = box[1].first +
                  (box[1].second - box[1].first) * j / (double)slices;
      double x0 = box[0].first;
      args[0] = x0;
      double f0 = lce->eval(args.data());
      double root = std::numeric_limits<double>::quiet_NaN();
      for (int i = 1; i <= 128; ++i) {
        double x1 = box[0].first +
                    (box[0].second - box[0].first) * i / 128.0;
        args[0] = x1;
        double f1 = lce->eval(args.data());
        if (f0 == 0.0) {
          root = x0;
          break;
        }
        if (f0 * f1 < 0.0) {
          for (int it = 0; it < 60; ++it) {
            double xm = 0.5 * (x0 + x1);
            args[0] = xm;
            double fm = lce->eval(args.data());
            if (f0 * fm <= 0.0) {
              x1 = xm;
            } else {
              x0 = xm;
              f0 = fm;
            }
          }
          root = 0.5 * (x0 + x1);
          break;
        }
        x0 = x1;
        f0 = f1;
      }
      if (!std::isfinite(root)) continue;
      for (int i = 0; i <= 80; ++i) {
        args[0] = root - 2.0 * eps + 4.0 * eps * i / 80.0;
        if (args[0] < box[0].first || args[0] > box[0].second) continue;
        best = std::max(best, std::fabs(ce.eval(args.data())));
      }
    }
    return best;
  };

  GrowthFit fit;
  for (double eps : grid) {
    std::vector<double> am(spec.p(), 0.0);
    double s0 = sup_on(eps, box, n, &am);
    std::vector<std::pair<double, double>> refined(spec.p());
    for (int i = 0; i < spec.p(); ++i) {
      double cell = (box[i].second - box[i].first) / n;
      refined[i] = {std::max(box[i].first, am[i] - cell),
                    std::min(box[i].second, am[i] + cell)};
    }
    double s1 = sup_on(eps, refined, 40, nullptr);
    double s2 = lce ? layer_sup(eps) : 0.0;
    fit.sups.push_back(std::max({s0, s1, s2}));
  }

  auto pl = fit_power_law(grid, fit.sups);
  if (!pl.valid) throw NetError("growth fit failed (nonpositive sups?)");
  fit.p = -pl.slope;
  fit.intercept = pl.intercept;
  if (std::fabs(fit.p) < 0.1)
    fit.verdict = GrowthVerdict::Bounded;
  else if (fit.p <= -3.0)
    fit.verdict = GrowthVerdict::NegligibleCandidate;
  else
    fit.verdict = GrowthVerdict::Moderate;
  return fit;
}

}  // namespace weaksym
