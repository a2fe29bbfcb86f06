#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "weaksym/factor.hpp"
#include "weaksym/mollifier.hpp"
#include "weaksym/parser.hpp"

using namespace weaksym;

namespace {

struct Space {
  SymbolTable table;
  JetSpec spec;
  Space(int order = 1) : spec({"x", "t"}, {"u"}, order, table) {}
};

Expr P(const std::string& s, Space& sp) { return parse(s, sp.table); }

// u_t + f(u) u_x solved in u_t; f given as an expression in u
PDESystem burgers_family(Space& sp, const std::string& f) {
  Expr d = parse("u_t + (" + f + ")*u_x", sp.table);
  int kt = sp.spec.index_of(sp.spec.jet(0, {1}));
  return build_pde_system(sp.spec, {d}, {kt}, sp.table);
}

GroupAction g1(Space& sp, bool exp_flux) {
  GroupAction g;
  g.Xi = {P("x/(1-eta*t)", sp), P("t/(1-eta*t)", sp)};
  g.Phi = {exp_flux ? P("log(eta*x + exp(u)*(1-eta*t))", sp)
                    : P("eta*x + (1-eta*t)*u", sp)};
  g.linear_in_u = !exp_flux;
  return g;
}

GroupAction g2(Space& sp, bool exp_flux) {
  GroupAction g;
  g.Xi = {P("x/(1-eta*x)", sp), P("t/(1-eta*x)", sp)};
  g.Phi = {exp_flux ? P("log(exp(u)/(1-eta*(x-exp(u)*t)))", sp)
                    : P("u/(1-eta*(x-u*t))", sp)};
  return g;
}

VectorField w1(Space& sp, bool exp_flux) {
  VectorField v;
  v.xi = {P("x*t", sp), P("t^2", sp)};
  v.phi = {exp_flux ? P("x*exp(-u) - t", sp) : P("x - t*u", sp)};
  return v;
}

VectorField w2(Space& sp, bool exp_flux) {
  VectorField v;
  v.xi = {P("x^2", sp), P("x*t", sp)};
  v.phi = {exp_flux ? P("x - exp(u)*t", sp) : P("u*(x - u*t)", sp)};
  return v;
}

double closed_form_gap(const PDESystem& sys, const FactorMatrix& Q,
                       const Expr& closed, SymbolTable& table, int samples,
                       double eta_range, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> zdist(-2.0, 2.0);
  std::uniform_real_distribution<double> edist(-eta_range, eta_range);
  double worst = 0.0;
  int done = 0, tries = 0;
  while (done < samples && tries < 50 * samples) {
    ++tries;
    Bindings b;
    b.set(table.eta(), edist(rng));
    for (int k = 0; k < sys.spec.N(); ++k)
      b.set(sys.spec.coordinate(k).sym, zdist(rng));
    try {
      double got = factor_entry_value(Q, 0, 0, b, table);
      double want = evaluate(closed, b, table);
      if (!std::isfinite(got) || !std::isfinite(want)) continue;
      worst = std::max(worst, std::fabs(got - want));
      ++done;
    } catch (const EvalError&) {
    }
  }
  REQUIRE(done == samples);
  return worst;
}

double sample_abs_max(const std::vector<Expr>& exprs, const SymbolTable& table,
                      int samples, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  double worst = 0.0;
  for (const Expr& e : exprs) {
    auto syms = free_symbols(e);
    int done = 0, tries = 0;
    while (done < samples && tries < 50 * samples) {
      ++tries;
      Bindings b;
      for (SymbolId s : syms) b.set(s, dist(rng));
      try {
        double v = evaluate(e, b, table);
        if (!std::isfinite(v)) continue;
        worst = std::max(worst, std::fabs(v));
        ++done;
      } catch (const EvalError&) {
      }
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("computed factor matches the closed forms of both group actions") {
  struct Row {
    bool exp_flux;
    bool second_action;
    const char* closed;
  };
  const Row rows[] = {
      {false, false, "(1-eta*t)^3"},
      {true, false, "(1-eta*t)^3*exp(u)/(eta*x + exp(u)*(1-eta*t))"},
      {false, true, "(1-eta*x)^3/(1-eta*(x-t*u))^3"},
      {true, true, "(1-eta*x)^3/(1-eta*(x-t*exp(u)))^2"},
  };
  int n = 0;
  for (const Row& row : rows) {
    Space sp;
    PDESystem sys = burgers_family(sp, row.exp_flux ? "exp(u)" : "u");
    GroupAction g = row.second_action ? g2(sp, row.exp_flux) : g1(sp, row.exp_flux);
    FactorMatrix Q = compute_factor_Q(sys, g, sp.table);
    CHECK(Q.tau_integrated);
    double gap = closed_form_gap(sys, Q, P(row.closed, sp), sp.table, 200, 0.1,
                                 0x100 + n);
    CHECK(gap <= 1e-8);
    FactorCheck fc = verify_factorization(sys, g, Q, 200, 0.1, sp.table,
                                          0x200 + n);
    CHECK(fc.max_residual <= 1e-8);
    CHECK(fc.functional_residual <= 1e-8);
    ++n;
  }
}

TEST_CASE("identity action factors through the identity matrix") {
  Space sp;
  PDESystem sys = burgers_family(sp, "u");
  GroupAction g;
  g.Xi = {P("x", sp), P("t", sp)};
  g.Phi = {P("u", sp)};
  g.linear_in_u = true;
  FactorMatrix Q = compute_factor_Q(sys, g, sp.table);
  CHECK(normalize(Q.entries[0][0] - Expr::integer(1)).is_zero());
  FactorCheck fc = verify_factorization(sys, g, Q, 50, 0.5, sp.table);
  CHECK(fc.max_residual <= 1e-12);
}

TEST_CASE("negative control: wrong exponent breaks the factorization") {
  Space sp;
  PDESystem sys = burgers_family(sp, "u");
  FactorMatrix wrong;
  wrong.entries = {{P("(1-eta*t)^2", sp)}};
  FactorCheck fc =
      verify_factorization(sys, g1(sp, false), wrong, 100, 0.1, sp.table);
  CHECK(fc.max_residual > 1e-3);
}

TEST_CASE("quasilinear closed form and dependence classes") {
  // scaling action on Burgers: Q = exp(-eta), depending on eta alone
  {
    Space sp;
    PDESystem sys = burgers_family(sp, "u");
    GroupAction g;
    g.Xi = {P("exp(eta)*x", sp), P("exp(eta)*t", sp)};
    g.Phi = {P("u", sp)};
    g.linear_in_u = true;
    FactorMatrix Q = compute_factor_Q(sys, g, sp.table);
    CHECK(Q.dep == DependenceClass::EtaX);
    double gap = closed_form_gap(sys, Q, P("exp(-eta)", sp), sp.table, 100,
                                 0.3, 7);
    CHECK(gap <= 1e-8);
  }
  // Galilean boost: Q identically 1
  {
    Space sp;
    PDESystem sys = burgers_family(sp, "u");
    GroupAction g;
    g.Xi = {P("x + eta*t", sp), P("t", sp)};
    g.Phi = {P("u + eta", sp)};
    FactorMatrix Q = compute_factor_Q(sys, g, sp.table);
    CHECK(normalize(Q.entries[0][0] - Expr::integer(1)).is_zero());
  }
  // nonlinear action: the scan must see the dependent variable
  {
    Space sp;
    PDESystem sys = burgers_family(sp, "u");
    FactorMatrix Q = compute_factor_Q(sys, g2(sp, false), sp.table);
    CHECK(Q.dep != DependenceClass::EtaX);
  }
}

TEST_CASE("two-component transport: constant determinant and scaling factor") {
  SymbolTable table;
  JetSpec spec({"x", "t"}, {"U", "V"}, 1, table);
  Expr d1 = parse("U_t + U*U_x", table);
  Expr d2 = parse("V_t + U*V_x", table);
  int kU = spec.index_of(spec.jet(0, {1}));
  int kV = spec.index_of(spec.jet(1, {1}));
  PDESystem sys = build_pde_system(spec, {d1, d2}, {kU, kV}, table);
  CHECK(sys.cls == SystemClass::Quasilinear);

  SolvedForm sf = build_solved_form(sys, table);
  CHECK(normalize(sf.det - Expr::integer(1)).is_zero());

  GroupAction g;
  g.Xi = {parse("exp(eta)*x", table), parse("exp(eta)*t", table)};
  g.Phi = {parse("U", table), parse("V", table)};
  g.linear_in_u = true;
  FactorMatrix Q = compute_factor_Q(sys, g, table);
  CHECK(Q.dep == DependenceClass::EtaX);
  Bindings b;
  b.set(table.eta(), 0.2);
  for (int k = 0; k < spec.N(); ++k) b.set(spec.coordinate(k).sym, 0.3 + 0.1 * k);
  CHECK(std::fabs(factor_entry_value(Q, 0, 0, b, table) - std::exp(-0.2)) < 1e-10);
  CHECK(std::fabs(factor_entry_value(Q, 1, 1, b, table) - std::exp(-0.2)) < 1e-10);
  CHECK(std::fabs(factor_entry_value(Q, 0, 1, b, table)) < 1e-10);
  FactorCheck fc = verify_factorization(sys, g, Q, 100, 0.3, table);
  CHECK(fc.max_residual <= 1e-8);
}

TEST_CASE("infinitesimal factors: translation and w1") {
  Space sp;
  PDESystem sys = burgers_family(sp, "u");
  {
    VectorField v;
    v.xi = {P("1", sp), P("0", sp)};
    v.phi = {P("0", sp)};
    auto Qt = infinitesimal_factor(sys, v, sp.table);
    CHECK(Qt[0][0].is_zero());
  }
  {
    auto Qt = infinitesimal_factor(sys, w1(sp, false), sp.table);
    // d/deta at 0 of (1 - eta t)^3
    Expr want = P("-3*t", sp);
    CHECK(sample_abs_max({normalize(Qt[0][0] - want)}, sp.table, 50, 11) <= 1e-10);
  }
}

TEST_CASE("lie derivative of a linear operator in commutator form") {
  Space sp(2);
  // Delta = u_t + x u_x - (x + t)
  Expr delta = P("u_t + x*u_x - (x + t)", sp);
  VectorField v;
  v.xi = {P("x*t", sp), P("t", sp)};
  v.alpha = {{P("x + t", sp)}};
  v.beta = {P("x*t", sp)};
  v.phi = {normalize((*v.alpha)[0][0] * P("u", sp) + (*v.beta)[0])};

  auto pv = prolong_vector_field(v, sp.spec, sp.table);
  Expr lhs = Expr::integer(0);
  for (int k = 0; k < sp.spec.N(); ++k)
    lhs = lhs + pv[k] * differentiate(delta, sp.spec.coordinate(k).sym, sp.table);
  lhs = normalize(lhs);

  auto L = [&](const Expr& e) {
    return total_derivative(e, 1, sp.spec, sp.table) +
           P("x", sp) * total_derivative(e, 0, sp.spec, sp.table);
  };
  auto xiD = [&](const Expr& e) {
    return v.xi[0] * total_derivative(e, 0, sp.spec, sp.table) +
           v.xi[1] * total_derivative(e, 1, sp.spec, sp.table);
  };
  Expr u = P("u", sp);
  Expr F = P("x + t", sp);
  Expr rhs = xiD(L(u)) - L(xiD(u)) + L(v.phi[0]) - xiD(F);
  CHECK(sample_abs_max({normalize(lhs - rhs)}, sp.table, 100, 13) <= 1e-10);
}

TEST_CASE("determining equations: symmetries pass, non-symmetries fail") {
  Space sp;
  PDESystem sys = burgers_family(sp, "exp(u)");
  CHECK(sample_abs_max(determining_equations(sys, w1(sp, true), sp.table),
                       sp.table, 100, 17) <= 1e-10);
  CHECK(sample_abs_max(determining_equations(sys, w2(sp, true), sp.table),
                       sp.table, 100, 19) <= 1e-10);
  {
    VectorField v;
    v.xi = {P("1", sp), P("0", sp)};
    v.phi = {P("0", sp)};
    CHECK(determining_equations(sys, v, sp.table).empty());
  }
  {
    VectorField v;
    v.xi = {P("x", sp), P("0", sp)};
    v.phi = {P("0", sp)};
    CHECK(sample_abs_max(determining_equations(sys, v, sp.table), sp.table, 50,
                         23) > 1e-3);
  }
}

TEST_CASE("determining equations match the quasilinear matrix form") {
  Space sp;
  PDESystem sys = burgers_family(sp, "exp(u)");
  // deliberately non-symmetric ansatz
  VectorField v;
  v.xi = {P("x*t", sp), P("t^2", sp)};
  v.phi = {P("x + u", sp)};
  auto conds = determining_equations(sys, v, sp.table);
  REQUIRE(conds.size() == 2);

  Expr A = P("exp(u)", sp);
  Expr psi = v.phi[0], xi = v.xi[0], tau = v.xi[1];
  SymbolId X = sp.table.require("x"), T = sp.table.require("t"),
           U = sp.table.require("u");
  auto d = [&](const Expr& e, SymbolId s) { return differentiate(e, s, sp.table); };
  Expr c0 = normalize(d(psi, T) + A * d(psi, X));
  Expr c1 = normalize(psi * d(A, U) - (d(xi, T) - d(tau, T) * A) -
                      (d(xi, X) - d(tau, X) * A) * A);
  bool seen0 = false, seen1 = false;
  for (const Expr& c : conds) {
    if (sample_abs_max({normalize(c - c0)}, sp.table, 30, 29) <= 1e-10)
      seen0 = true;
    if (sample_abs_max({normalize(c - c1)}, sp.table, 30, 31) <= 1e-10)
      seen1 = true;
  }
  CHECK(seen0);
  CHECK(seen1);
}

TEST_CASE("principal matrix reproduces the closed-form factor") {
  Space sp;
  PDESystem sys = burgers_family(sp, "u");
  auto Qt = infinitesimal_factor(sys, w1(sp, false), sp.table);
  GroupAction g = g1(sp, false);

  Bindings z;
  z.set(sp.table.require("x"), 0.7);
  z.set(sp.table.require("t"), 1.0);
  z.set(sp.table.require("u"), 0.3);
  z.set(sp.spec.jet(0, {0}), -0.4);
  z.set(sp.spec.jet(0, {1}), 0.9);
  auto Q = principal_matrix_from_Qtilde(Qt, g, z, 0.1, sys, sp.table);
  CHECK(std::fabs(Q[0][0] - 0.729) < 1e-6);

  // consistency triangle: closed form, quadrature, ODE
  FactorMatrix Qf = compute_factor_Q(sys, g, sp.table);
  Expr closed = P("(1-eta*t)^3", sp);
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> zd(-2.0, 2.0), ed(-0.1, 0.1);
  for (int n = 0; n < 20; ++n) {
    Bindings b;
    double eta = ed(rng);
    b.set(sp.table.eta(), eta);
    for (int k = 0; k < sp.spec.N(); ++k)
      b.set(sp.spec.coordinate(k).sym, zd(rng));
    double qc = evaluate(closed, b, sp.table);
    double qq = factor_entry_value(Qf, 0, 0, b, sp.table);
    double qo = principal_matrix_from_Qtilde(Qt, g, b, eta, sys, sp.table)[0][0];
    CHECK(std::fabs(qc - qq) < 1e-6);
    CHECK(std::fabs(qc - qo) < 1e-6);
    CHECK(std::fabs(qq - qo) < 1e-6);
  }
}

TEST_CASE("factor cocycle along the group law") {
  Space sp;
  PDESystem sys = burgers_family(sp, "u");
  GroupAction g = g1(sp, false);
  FactorMatrix Q = compute_factor_Q(sys, g, sp.table);
  ProlongedAction pa = prolong_group_action(g, sp.spec, sp.table);

  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> zd(-1.0, 1.0), ed(-0.05, 0.05);
  for (int n = 0; n < 30; ++n) {
    double e1 = ed(rng), e2 = ed(rng);
    Bindings b;
    for (int k = 0; k < sp.spec.N(); ++k)
      b.set(sp.spec.coordinate(k).sym, zd(rng));
    Bindings b1 = b;
    b1.set(sp.table.eta(), e1);
    Bindings bsum = b;
    bsum.set(sp.table.eta(), e1 + e2);
    Bindings bflow;
    bflow.set(sp.table.eta(), e2);
    for (int k = 0; k < sp.spec.N(); ++k)
      bflow.set(sp.spec.coordinate(k).sym, evaluate(pa.zbar[k], b1, sp.table));
    double lhs = factor_entry_value(Q, 0, 0, bsum, sp.table);
    double rhs = factor_entry_value(Q, 0, 0, bflow, sp.table) *
                 factor_entry_value(Q, 0, 0, b1, sp.table);
    CHECK(std::fabs(lhs - rhs) < 1e-8);
  }
}

TEST_CASE("growth condition (a3) over jet boxes") {
  {
    Space sp;
    PDESystem sys = burgers_family(sp, "u");
    auto r = check_growth_a3(sys, {{-1, 1}, {-1, 1}}, {-10.0, 10.0}, 4000,
                             sp.table);
    CHECK_FALSE(r.violated);
    CHECK(r.r == 0.0);
    CHECK(std::fabs(r.C - 1.0) < 1e-9);
  }
  {
    // exp(u) u_t + u_x: determinant exp(u) decays but never vanishes
    Space sp;
    Expr d = P("exp(u)*u_t + u_x", sp);
    int kt = sp.spec.index_of(sp.spec.jet(0, {1}));
    PDESystem sys = build_pde_system(sp.spec, {d}, {kt}, sp.table);
    auto r = check_growth_a3(sys, {{-1, 1}, {-1, 1}}, {-10.0, 10.0}, 8000,
                             sp.table);
    CHECK_FALSE(r.violated);
    CHECK(r.r > 1.0);
    CHECK(r.C > 0.0);
  }
  {
    // rational decay: det = 1/(1+u^2), compare against an envelope fit
    // recomputed here from the closed form on an independent sample stream
    SymbolTable table;
    JetSpec spec({"x"}, {"u"}, 1, table);
    Expr d = parse("u_x/(1 + u^2)", table);
    int kx = spec.index_of(spec.jet(0, {0}));
    PDESystem sys = build_pde_system(spec, {d}, {kx}, table);
    auto r = check_growth_a3(sys, {{-1, 1}}, {-10.0, 10.0}, 20000, table);
    CHECK_FALSE(r.violated);

    std::mt19937_64 rng(0x0e11);
    std::uniform_real_distribution<double> jd(-10.0, 10.0);
    std::vector<double> logm, logd;
    for (int n = 0; n < 20000; ++n) {
      double u = jd(rng), ux = jd(rng);
      logm.push_back(std::log1p(std::fabs(u)) + std::log1p(std::fabs(ux)));
      logd.push_back(-std::log(1.0 + u * u));
    }
    double lo = *std::min_element(logm.begin(), logm.end());
    double hi = *std::max_element(logm.begin(), logm.end());
    const int bins = 16;
    std::vector<double> env(bins, std::numeric_limits<double>::infinity());
    std::vector<double> center(bins, 0.0);
    double width = (hi - lo) / bins;
    for (size_t i = 0; i < logm.size(); ++i) {
      int b = std::min(bins - 1, (int)((logm[i] - lo) / width));
      if (logd[i] < env[b]) {
        env[b] = logd[i];
        center[b] = logm[i];
      }
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int b = 0; b < bins; ++b) {
      sx += center[b];
      sy += env[b];
      sxx += center[b] * center[b];
      sxy += center[b] * env[b];
    }
    double slope = (bins * sxy - sx * sy) / (bins * sxx - sx * sx);
    double r_oracle = std::max(0.0, -slope);
    CHECK(r_oracle > 0.5);
    CHECK(std::fabs(r.r - r_oracle) < 0.25);
  }
  {
    // u u_t + u_x vanishes at u = 0
    Space sp;
    PDESystem sys{sp.spec, {P("u*u_t + u_x", sp)},
                  {sp.spec.index_of(sp.spec.jet(0, {1}))},
                  SystemClass::General};
    auto r = check_growth_a3(sys, {{-1, 1}, {-1, 1}}, {-2.0, 2.0}, 2000,
                             sp.table);
    CHECK(r.violated);
    REQUIRE(!r.witness.empty());
    CHECK(std::fabs(r.witness[2]) < 1e-6);  // the u slot
  }
}

TEST_CASE("invariance operator on smooth profiles and nets") {
  {
    // traveling profile is invariant under c dx + dt
    Space sp;
    Mollifier m = make_bump_mollifier(sp.table, "theta");
    Expr shift = P("x - (1/2)*t", sp);
    Expr prof = Expr::opaque(m.prim_name,
                             {shift / Expr::symbol(sp.table.eps())});
    VectorField v;
    v.xi = {P("1/2", sp), P("1", sp)};
    v.phi = {P("0", sp)};
    v.alpha = {{P("0", sp)}};
    v.beta = {P("0", sp)};
    CHECK(invariance_check_smooth(v, {prof}, sp.spec, sp.table) == 0.0);
  }
  {
    // homogeneity of x^2 under the scaling operator
    SymbolTable table;
    JetSpec spec({"x"}, {"u"}, 1, table);
    VectorField v;
    v.xi = {parse("x", table)};
    v.phi = {parse("2*u", table)};
    v.alpha = {{parse("2", table)}};
    v.beta = {parse("0", table)};
    CHECK(invariance_check_smooth(v, {parse("x^2", table)}, spec, table) == 0.0);
  }
  {
    // shock net is not invariant under pure time translation
    Space sp;
    Mollifier m = make_bump_mollifier(sp.table, "theta");
    Expr shift = P("x - (1/2)*t", sp);
    GNet net = embed_heaviside(m, shift, sp.table);
    net.domain = {{-2.0, 2.0}, {0.2, 1.8}};
    VectorField v;
    v.xi = {P("0", sp), P("1", sp)};
    v.phi = {P("0", sp)};
    v.alpha = {{P("0", sp)}};
    v.beta = {P("0", sp)};
    Expr phi = unit_mass_probe({{-2.0, 2.0}, {0.2, 1.8}}, sp.spec, sp.table);
    auto curve = invariance_check_net(v, net, phi, default_eps_grid(), sp.spec,
                                      sp.table);
    CHECK(curve.verdicts[0] != Verdict::ConvergesToZero);
  }
}

TEST_CASE("first prolongation against numeric eta differentiation") {
  struct Row {
    bool exp_flux;
    bool second_action;
  };
  const Row rows[] = {{true, false}, {true, true}, {false, false}};
  int n = 0;
  for (const Row& row : rows) {
    Space sp;
    GroupAction g = row.second_action ? g2(sp, row.exp_flux) : g1(sp, row.exp_flux);
    VectorField v = row.second_action ? w2(sp, row.exp_flux) : w1(sp, row.exp_flux);
    ProlongedAction pa = prolong_group_action(g, sp.spec, sp.table);
    auto pv = prolong_vector_field(v, sp.spec, sp.table);

    std::mt19937_64 rng(0x51 + n);
    std::uniform_real_distribution<double> zd(-1.0, 1.0);
    const double h = 1e-4;
    int done = 0, tries = 0;
    while (done < 50 && tries < 2000) {
      ++tries;
      Bindings b;
      for (int k = 0; k < sp.spec.N(); ++k)
        b.set(sp.spec.coordinate(k).sym, zd(rng));
      try {
        for (int k = 0; k < sp.spec.N(); ++k) {
          Bindings bp = b, bm = b;
          bp.set(sp.table.eta(), h);
          bm.set(sp.table.eta(), -h);
          double numeric = (evaluate(pa.zbar[k], bp, sp.table) -
                            evaluate(pa.zbar[k], bm, sp.table)) /
                           (2 * h);
          double symbolic = evaluate(pv[k], b, sp.table);
          if (!std::isfinite(numeric) || !std::isfinite(symbolic))
            throw EvalError("not finite");
          CHECK(std::fabs(numeric - symbolic) < 1e-5);
        }
        ++done;
      } catch (const EvalError&) {
      }
    }
    CHECK(done == 50);
    ++n;
  }
}
