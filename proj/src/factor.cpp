#include "weaksym/factor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "weaksym/quadrature.hpp"
#include "weaksym/rk4.hpp"

namespace weaksym {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng);
}

bool semantically_zero(const Expr& e, const SymbolTable& table,
                       std::mt19937_64& rng) {
  Expr n = normalize(e);
  if (n.is_zero()) return true;
  return is_zero_sampled(n, table, rng);
}

/// pr v applied to every Delta_i.
std::vector<Expr> lie_derivative(const PDESystem& sys, const VectorField& v,
                                 SymbolTable& table) {
  auto pv = prolong_vector_field(v, sys.spec, table);
  std::vector<Expr> out;
  for (const Expr& d : sys.delta) {
    Expr acc = Expr::integer(0);
    for (int k = 0; k < sys.spec.N(); ++k) {
      SymbolId sk = sys.spec.coordinate(k).sym;
      if (!depends_on(d, sk)) continue;
      acc = acc + pv[k] * differentiate(d, sk, table);
    }
    out.push_back(normalize(acc));
  }
  return out;
}

/// Qtilde and the on-shell remainder G_i = pr v(Delta_i) - (Qtilde Delta)_i.
void qtilde_and_remainder(const PDESystem& sys, const VectorField& v,
                          SymbolTable& table,
                          std::vector<std::vector<Expr>>& Qt,
                          std::vector<Expr>& G) {
  check_projectable(v, sys.spec, table);
  int s = sys.s();
  SolvedForm sf = build_solved_form(sys, table);
  if (!sf.affine_in_solved)
    throw FactorError("system is not affine in its solved coordinates");
  auto E = lie_derivative(sys, v, table);

  std::mt19937_64 rng(0x9711ull);
  std::vector<SymbolId> zsym(s);
  for (int j = 0; j < s; ++j) zsym[j] = sys.spec.coordinate(sys.solved[j]).sym;

  std::vector<std::vector<Expr>> C(s, std::vector<Expr>(s, Expr()));
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) {
      C[i][j] = normalize(differentiate(E[i], zsym[j], table));
      for (SymbolId z : zsym)
        if (depends_on(C[i][j], z) &&
            !semantically_zero(differentiate(C[i][j], z, table), table, rng))
          throw FactorError("pr v(Delta) is not affine in the solved block");
    }

  Qt.assign(s, std::vector<Expr>(s, Expr()));
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) {
      Expr acc = Expr::integer(0);
      for (int k = 0; k < s; ++k) acc = acc + C[i][k] * sf.Ainv[k][j];
      Qt[i][j] = normalize(acc);
    }

  G.clear();
  for (int i = 0; i < s; ++i) {
    Expr acc = E[i];
    for (int j = 0; j < s; ++j) acc = acc - Qt[i][j] * sys.delta[j];
    G.push_back(normalize(acc));
  }
}

int factorial(int k) {
  int f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

constexpr int kTauDegreeCap = 8;

void collect_poly(const Expr& e, const std::vector<SymbolId>& vars, size_t vi,
                  SymbolTable& table, std::mt19937_64& rng,
                  std::vector<Expr>& out) {
  if (vi == vars.size()) {
    Expr n = normalize(e);
    if (!n.is_zero() && !is_zero_sampled(n, table, rng)) out.push_back(n);
    return;
  }
  Expr cur = e;
  for (int k = 0; k <= kTauDegreeCap; ++k) {
    Expr coeff = normalize(substitute(cur, vars[vi], Expr::integer(0)));
    if (k > 0)
      coeff = normalize(coeff * Expr::rational(Rational(1, factorial(k))));
    collect_poly(coeff, vars, vi + 1, table, rng, out);
    cur = normalize(differentiate(cur, vars[vi], table));
    if (cur.is_zero() || is_zero_sampled(cur, table, rng)) return;
  }
  throw FactorError("expression is not polynomial in a jet coordinate");
}

}  // namespace

const char* dependence_class_name(DependenceClass d) {
  switch (d) {
    case DependenceClass::EtaX: return "eta-x";
    case DependenceClass::EtaXU: return "eta-x-u";
    case DependenceClass::FullJet: return "full-jet";
  }
  return "full-jet";
}

DependenceClass classify_dependence(const std::vector<std::vector<Expr>>& m,
                                    const JetSpec& spec,
                                    const SymbolTable& table) {
  DependenceClass d = DependenceClass::EtaX;
  for (const auto& row : m)
    for (const auto& e : row)
      for (SymbolId s : free_symbols(e)) {
        if (s == table.eta() || s == table.tau()) continue;
        int k = spec.index_of(s);
        if (k < 0 || k < spec.p()) continue;
        if (k < spec.p() + spec.q()) {
          if (d == DependenceClass::EtaX) d = DependenceClass::EtaXU;
        } else {
          return DependenceClass::FullJet;
        }
      }
  return d;
}

FactorMatrix compute_factor_Q(const PDESystem& sys, const GroupAction& g,
                              SymbolTable& table) {
  validate_group_action(g, sys.spec, table);
  int s = sys.s();
  SolvedForm sf = build_solved_form(sys, table);
  if (!sf.affine_in_solved)
    throw FactorError("factor computation requires a system affine in its "
                      "solved coordinates");
  ProlongedAction pa = prolong_group_action(g, sys.spec, table);

  std::vector<std::pair<SymbolId, Expr>> bar_map;
  for (int k = 0; k < sys.spec.N(); ++k)
    bar_map.push_back({sys.spec.coordinate(k).sym, pa.zbar[k]});

  std::vector<std::pair<SymbolId, Expr>> inv_map;
  for (int j = 0; j < s; ++j)
    inv_map.push_back({sys.spec.coordinate(sys.solved[j]).sym, sf.inverse[j]});

  Expr tau = Expr::symbol(table.tau());
  std::vector<std::pair<SymbolId, Expr>> w_map;
  for (int j = 0; j < s; ++j)
    w_map.push_back({sf.w[j], normalize(tau * sys.delta[j])});

  std::mt19937_64 rng(0xfac7ull);
  FactorMatrix Q;
  Q.eta_max = g.eta_max;
  Q.entries.assign(s, std::vector<Expr>(s, Expr()));
  for (int i = 0; i < s; ++i) {
    Expr f = substitute(sys.delta[i], bar_map);
    Expr h = normalize(substitute(f, inv_map));
    for (int j = 0; j < s; ++j) {
      Expr m = normalize(differentiate(h, sf.w[j], table));
      bool uses_w = false;
      for (SymbolId w : sf.w) uses_w = uses_w || depends_on(m, w);
      if (!uses_w) {  // constant in tau: the integral is the integrand
        Q.entries[i][j] = m;
        continue;
      }
      m = normalize(substitute(m, w_map));
      // termwise exact tau-integral when m is polynomial in tau
      Expr cur = m;
      Expr acc = Expr::integer(0);
      bool poly = false;
      try {
        for (int k = 0; k <= kTauDegreeCap; ++k) {
          Expr ck = substitute(cur, table.tau(), Expr::integer(0));
          acc = acc + ck * Expr::rational(Rational(1, factorial(k) * (k + 1)));
          cur = normalize(differentiate(cur, table.tau(), table));
          if (cur.is_zero()) {  // exact only: a truncated series is not an
            poly = true;        // integral, and the remainder blows up near
            break;              // the action's singular set
          }
        }
      } catch (const std::runtime_error&) {
        poly = false;  // expression swell; leave tau to numeric quadrature
      }
      if (poly) {
        Q.entries[i][j] = normalize(acc);
      } else {
        Q.entries[i][j] = m;
        Q.tau_integrated = false;
      }
    }
  }
  Q.dep = classify_dependence(Q.entries, sys.spec, table);

  // Q(0, z) must be the identity
  for (int trial = 0; trial < 20; ++trial) {
    Bindings b;
    b.set(table.eta(), 0.0);
    b.set(table.tau(), uniform(rng, 0.0, 1.0));
    for (int k = 0; k < sys.spec.N(); ++k)
      b.set(sys.spec.coordinate(k).sym, uniform(rng, -2.0, 2.0));
    bool ok = true;
    double dev = 0.0;
    try {
      for (int i = 0; i < s && ok; ++i)
        for (int j = 0; j < s; ++j) {
          double v = evaluate(Q.entries[i][j], b, table);
          if (!std::isfinite(v)) {
            ok = false;
            break;
          }
          dev = std::max(dev, std::fabs(v - (i == j ? 1.0 : 0.0)));
        }
    } catch (const EvalError&) {
      ok = false;
    }
    if (!ok) continue;
    if (dev > 1e-10) throw FactorError("Q(0, z) deviates from the identity");
  }
  return Q;
}

double factor_entry_value(const FactorMatrix& Q, int i, int j,
                          const Bindings& b, const SymbolTable& table) {
  const Expr& e = Q.entries.at(i).at(j);
  if (Q.tau_integrated || !depends_on(e, table.tau()))
    return evaluate(e, b, table);
  const auto& xs = gauss_nodes(32);
  const auto& ws = gauss_weights(32);
  double acc = 0.0;
  for (size_t n = 0; n < xs.size(); ++n) {
    Bindings bt = b;
    bt.set(table.tau(), 0.5 + 0.5 * xs[n]);
    acc += 0.5 * ws[n] * evaluate(e, bt, table);
  }
  return acc;
}

FactorCheck verify_factorization(const PDESystem& sys, const GroupAction& g,
                                 const FactorMatrix& Q, int samples,
                                 double eta_range, SymbolTable& table,
                                 uint64_t seed) {
  const JetSpec& spec = sys.spec;
  int s = sys.s();
  ProlongedAction pa = prolong_group_action(g, spec, table);
  std::mt19937_64 rng(seed);
  FactorCheck check;

  auto eval_sides = [&](const Bindings& b, std::vector<double>& lhs,
                        std::vector<double>& rhs) {
    std::vector<double> zb(spec.N());
    for (int k = 0; k < spec.N(); ++k) {
      zb[k] = evaluate(pa.zbar[k], b, table);
      if (!std::isfinite(zb[k]) || std::fabs(zb[k]) > 1e3)
        throw EvalError("bar coordinate escaped the domain");
    }
    Bindings bb;
    for (int k = 0; k < spec.N(); ++k) bb.set(spec.coordinate(k).sym, zb[k]);
    for (int i = 0; i < s; ++i) {
      lhs[i] = evaluate(sys.delta[i], bb, table);
      rhs[i] = 0.0;
      for (int j = 0; j < s; ++j)
        rhs[i] += factor_entry_value(Q, i, j, b, table) *
                  evaluate(sys.delta[j], b, table);
      if (!std::isfinite(lhs[i]) || !std::isfinite(rhs[i]))
        throw EvalError("residual not finite");
    }
  };

  auto sample_residual = [&](const Bindings& base, double eta) {
    Bindings b = base;
    b.set(table.eta(), eta);
    std::vector<double> lhs(s), rhs(s);
    eval_sides(b, lhs, rhs);
    // re-evaluate under a tiny relative input perturbation; near the singular
    // set of the action the expanded forms lose digits to cancellation and
    // the identity cannot be checked in doubles, so such samples are rejected
    Bindings bp;
    for (int k = 0; k < spec.N(); ++k) {
      SymbolId sk = spec.coordinate(k).sym;
      bp.set(sk, base.get(sk) * (1.0 + 1e-9));
    }
    bp.set(table.eta(), eta * (1.0 + 1e-9));
    std::vector<double> lhs2(s), rhs2(s);
    eval_sides(bp, lhs2, rhs2);
    double worst = 0.0;
    for (int i = 0; i < s; ++i) {
      double scale = std::max({1.0, std::fabs(lhs[i]), std::fabs(rhs[i])});
      if (std::fabs(lhs[i] - lhs2[i]) > 1e-7 * scale ||
          std::fabs(rhs[i] - rhs2[i]) > 1e-7 * scale)
        throw EvalError("sample too close to the singular set");
      worst = std::max(worst, std::fabs(lhs[i] - rhs[i]) / scale);
    }
    return worst;
  };

  int done = 0;
  while (done < samples) {
    Bindings b;
    for (int k = 0; k < spec.N(); ++k)
      b.set(spec.coordinate(k).sym, uniform(rng, -2.0, 2.0));
    double eta = uniform(rng, -eta_range, eta_range);
    try {
      check.max_residual = std::max(check.max_residual, sample_residual(b, eta));
      ++done;
    } catch (const EvalError&) {
      ++check.rejected;
      if (check.rejected > 100 * samples)
        throw FactorError("factorization sampling kept escaping the domain");
    }
  }

  // functional form along a random polynomial section u(x)
  std::vector<Expr> u;
  for (int a = 0; a < spec.q(); ++a) {
    Expr e = Expr::number(uniform(rng, -1.0, 1.0));
    for (int i = 0; i < spec.p(); ++i) {
      Expr xi = Expr::symbol(spec.independent(i));
      e = e + Expr::number(uniform(rng, -1.0, 1.0)) * xi;
      for (int j = i; j < spec.p(); ++j)
        e = e + Expr::number(uniform(rng, -0.5, 0.5)) * xi *
                    Expr::symbol(spec.independent(j));
    }
    u.push_back(e);
  }
  auto section = prolong_function(u, spec, table);
  done = 0;
  while (done < samples) {
    Bindings bx;
    for (int i = 0; i < spec.p(); ++i)
      bx.set(spec.independent(i), uniform(rng, -2.0, 2.0));
    Bindings b;
    for (int k = 0; k < spec.N(); ++k)
      b.set(spec.coordinate(k).sym, evaluate(section[k], bx, table));
    double eta = uniform(rng, -eta_range, eta_range);
    try {
      check.functional_residual =
          std::max(check.functional_residual, sample_residual(b, eta));
      ++done;
    } catch (const EvalError&) {
      ++check.rejected;
      if (check.rejected > 100 * samples)
        throw FactorError("factorization sampling kept escaping the domain");
    }
  }
  return check;
}

std::vector<std::vector<Expr>> infinitesimal_factor(const PDESystem& sys,
                                                    const VectorField& v,
                                                    SymbolTable& table) {
  std::vector<std::vector<Expr>> Qt;
  std::vector<Expr> G;
  qtilde_and_remainder(sys, v, table, Qt, G);
  std::mt19937_64 rng(0x3c4dull);
  for (const Expr& g : G)
    if (!semantically_zero(g, table, rng))
      throw FactorError("on-shell remainder does not vanish: " +
                        to_string(normalize(g), table));
  return Qt;
}

std::vector<Expr> determining_equations(const PDESystem& sys,
                                        const VectorField& v,
                                        SymbolTable& table) {
  if (sys.cls == SystemClass::General)
    throw FactorError("determining equations need a linear, semilinear or "
                      "quasilinear system");
  std::vector<std::vector<Expr>> Qt;
  std::vector<Expr> G;
  qtilde_and_remainder(sys, v, table, Qt, G);

  std::set<int> solved(sys.solved.begin(), sys.solved.end());
  std::mt19937_64 rng(0xde7ull);
  std::vector<Expr> out;
  for (const Expr& g : G) {
    std::vector<SymbolId> vars;
    for (int k = sys.spec.p() + sys.spec.q(); k < sys.spec.N(); ++k) {
      if (solved.count(k)) continue;
      SymbolId sk = sys.spec.coordinate(k).sym;
      if (depends_on(g, sk)) vars.push_back(sk);
    }
    collect_poly(g, vars, 0, table, rng, out);
  }
  return out;
}

std::vector<std::vector<double>> principal_matrix_from_Qtilde(
    const std::vector<std::vector<Expr>>& Qtilde, const GroupAction& g,
    const Bindings& z, double eta, const PDESystem& sys, SymbolTable& table) {
  const JetSpec& spec = sys.spec;
  int s = (int)Qtilde.size();
  ProlongedAction pa = prolong_group_action(g, spec, table);

  std::vector<SymbolId> inputs{table.eta()};
  for (int k = 0; k < spec.N(); ++k) inputs.push_back(spec.coordinate(k).sym);
  std::vector<CompiledExpr> zbar;
  for (int k = 0; k < spec.N(); ++k)
    zbar.emplace_back(pa.zbar[k], table, inputs);

  std::vector<SymbolId> coord_inputs(inputs.begin() + 1, inputs.end());
  std::vector<CompiledExpr> qt;
  for (const auto& row : Qtilde)
    for (const Expr& e : row) qt.emplace_back(e, table, coord_inputs);

  std::vector<double> args(spec.N() + 1);
  for (int k = 0; k < spec.N(); ++k)
    args[k + 1] = z.get(spec.coordinate(k).sym);

  auto rhs = [&](double e, const std::vector<double>& y) {
    args[0] = e;
    std::vector<double> zb(spec.N());
    for (int k = 0; k < spec.N(); ++k) zb[k] = zbar[k].eval(args.data());
    std::vector<double> qv(s * s);
    for (int i = 0; i < s * s; ++i) qv[i] = qt[i].eval(zb.data());
    std::vector<double> dy(s * s, 0.0);
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j)
        for (int k = 0; k < s; ++k)
          dy[i * s + j] += qv[i * s + k] * y[k * s + j];
    return dy;
  };

  std::vector<double> y0(s * s, 0.0);
  for (int i = 0; i < s; ++i) y0[i * s + i] = 1.0;
  auto yT = rk4_solve(rhs, y0, 0.0, eta, 1024);
  std::vector<std::vector<double>> Q(s, std::vector<double>(s));
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) Q[i][j] = yT[i * s + j];
  return Q;
}

GrowthA3 check_growth_a3(const PDESystem& sys,
                         const std::vector<std::pair<double, double>>& xbox,
                         std::pair<double, double> jet_range, int samples,
                         SymbolTable& table, uint64_t seed) {
  const JetSpec& spec = sys.spec;
  if ((int)xbox.size() != spec.p())
    throw FactorError("x box dimension mismatch");
  SolvedForm sf = build_solved_form(sys, table);
  std::vector<SymbolId> inputs;
  for (int k = 0; k < spec.N(); ++k) inputs.push_back(spec.coordinate(k).sym);
  CompiledExpr det(sf.det, table, inputs);

  std::mt19937_64 rng(seed);
  GrowthA3 res;
  std::vector<double> logm, logd;
  std::vector<double> pos, neg;  // witnesses of either determinant sign
  for (int n = 0; n < samples; ++n) {
    std::vector<double> z(spec.N());
    for (int i = 0; i < spec.p(); ++i)
      z[i] = uniform(rng, xbox[i].first, xbox[i].second);
    for (int k = spec.p(); k < spec.N(); ++k)
      z[k] = uniform(rng, jet_range.first, jet_range.second);
    double ds = det.eval(z.data());
    if (!std::isfinite(ds)) continue;
    double d = std::fabs(ds);
    if (d <= 1e-12) {
      res.violated = true;
      res.witness = z;
      return res;
    }
    if (ds > 0 && pos.empty()) pos = z;
    if (ds < 0 && neg.empty()) neg = z;
    double m = 0.0;
    for (int k = spec.p(); k < spec.N(); ++k) m += std::log1p(std::fabs(z[k]));
    logm.push_back(m);
    logd.push_back(std::log(d));
  }
  // a sign change certifies a zero of the continuous determinant; locate it
  // by bisection along the connecting segment
  if (!pos.empty() && !neg.empty()) {
    std::vector<double> p = pos, q = neg, mid(spec.N());
    for (int it = 0; it < 80; ++it) {
      for (int k = 0; k < spec.N(); ++k) mid[k] = 0.5 * (p[k] + q[k]);
      double dm = det.eval(mid.data());
      if (dm > 0)
        p = mid;
      else
        q = mid;
    }
    res.violated = true;
    res.witness = mid;
    return res;
  }
  if (logm.size() < 8) throw FactorError("growth sampling failed");

  // lower envelope: minimum log|det| per log-mass bin, then least squares
  double lo = *std::min_element(logm.begin(), logm.end());
  double hi = *std::max_element(logm.begin(), logm.end());
  const int bins = 16;
  std::vector<double> env(bins, std::numeric_limits<double>::infinity());
  std::vector<double> center(bins, 0.0);
  double width = (hi - lo) / bins;
  for (size_t i = 0; i < logm.size(); ++i) {
    int b = std::min(bins - 1, (int)((logm[i] - lo) / std::max(width, 1e-12)));
    if (logd[i] < env[b]) {
      env[b] = logd[i];
      center[b] = logm[i];
    }
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int b = 0; b < bins; ++b) {
    if (!std::isfinite(env[b])) continue;
    sx += center[b];
    sy += env[b];
    sxx += center[b] * center[b];
    sxy += center[b] * env[b];
    ++cnt;
  }
  if (cnt < 2) {
    res.r = 0.0;
  } else {
    double denom = cnt * sxx - sx * sx;
    double slope = denom == 0.0 ? 0.0 : (cnt * sxy - sx * sy) / denom;
    res.r = std::max(0.0, -slope);
    if (res.r < 1e-3) res.r = 0.0;
  }
  double cmin = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < logm.size(); ++i)
    cmin = std::min(cmin, logd[i] + res.r * logm[i]);
  res.C = std::exp(cmin);
  return res;
}

std::vector<Expr> invariance_residual_exprs(const VectorField& v,
                                            const JetSpec& spec,
                                            SymbolTable& table) {
  check_projectable(v, spec, table);
  if (!v.alpha || !v.beta)
    throw FactorError("invariance operator needs the linear decomposition "
                      "(alpha, beta)");
  std::vector<Expr> out;
  for (int a = 0; a < spec.q(); ++a) {
    Expr acc = Expr::integer(0);
    for (int i = 0; i < spec.p(); ++i)
      acc = acc + v.xi[i] * Expr::symbol(spec.jet(a, {i}));
    for (int b = 0; b < spec.q(); ++b)
      acc = acc - (*v.alpha)[a][b] * Expr::symbol(spec.dependent(b));
    acc = acc - (*v.beta)[a];
    out.push_back(normalize(acc));
  }
  return out;
}

double invariance_check_smooth(const VectorField& v,
                               const std::vector<Expr>& u, const JetSpec& spec,
                               SymbolTable& table, int samples, uint64_t seed) {
  auto delta = invariance_residual_exprs(v, spec, table);
  std::vector<std::pair<SymbolId, Expr>> jmap;
  for (const auto& c : spec.coordinates()) {
    if (c.dep < 0) continue;
    Expr e = u.at(c.dep);
    for (int i : c.multi) e = differentiate(e, spec.independent(i), table);
    jmap.push_back({c.sym, e});
  }
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (const Expr& d : delta) {
    Expr r = normalize(substitute(d, jmap));
    if (r.is_zero()) continue;
    int done = 0;
    while (done < samples) {
      Bindings b;
      for (SymbolId s : free_symbols(r)) b.set(s, uniform(rng, -1.0, 1.0));
      try {
        double val = evaluate(r, b, table);
        if (!std::isfinite(val)) throw EvalError("not finite");
        worst = std::max(worst, std::fabs(val));
        ++done;
      } catch (const EvalError&) {
        if (++done > 10 * samples) break;
      }
    }
  }
  return worst;
}

ResidualCurve invariance_check_net(const VectorField& v, const GNet& net,
                                   const Expr& phi,
                                   const std::vector<double>& grid,
                                   const JetSpec& spec, SymbolTable& table) {
  PDESystem aux{spec, invariance_residual_exprs(v, spec, table), {},
                SystemClass::General};
  return weak_residual_curve(aux, net, phi, grid, table);
}

}  // namespace weaksym
