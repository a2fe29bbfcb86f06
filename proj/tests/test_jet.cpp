#include <cmath>
#include <random>

#include "doctest.h"
#include "weaksym/group_action.hpp"
#include "weaksym/jet.hpp"
#include "weaksym/parser.hpp"
#include "weaksym/rk4.hpp"

using namespace weaksym;

namespace {

struct Space {
  SymbolTable table;
  JetSpec spec;
  Space(int order) : spec({"x", "t"}, {"u"}, order, table) {}
};

Expr P(const std::string& s, Space& sp) { return parse(s, sp.table); }

// G1 with f = id: x~ = x/(1-eta t), t~ = t/(1-eta t), u~ = eta x + (1-eta t) u
GroupAction g1_identity_flux(Space& sp) {
  GroupAction g;
  g.Xi = {P("x/(1-eta*t)", sp), P("t/(1-eta*t)", sp)};
  g.Phi = {P("eta*x + (1-eta*t)*u", sp)};
  g.linear_in_u = true;
  return g;
}

// w1 with f = id: xi = (x t, t^2), phi = x - t u
VectorField w1_identity_flux(Space& sp) {
  VectorField v;
  v.xi = {P("x*t", sp), P("t^2", sp)};
  v.phi = {P("x - t*u", sp)};
  return v;
}

}  // namespace

TEST_CASE("jet enumeration counts and layout") {
  Space sp(3);
  // p=2, q=1, n=3: 2 + (1 + 2 + 3 + 4)
  CHECK(sp.spec.N() == 12);
  CHECK(JetSpec::order_count(2, 0) == 1);
  CHECK(JetSpec::order_count(2, 1) == 2);
  CHECK(JetSpec::order_count(2, 2) == 3);
  CHECK(JetSpec::order_count(2, 3) == 4);
  CHECK(JetSpec::order_count(3, 2) == 6);

  CHECK(sp.spec.coordinate(0).name == "x");
  CHECK(sp.spec.coordinate(1).name == "t");
  CHECK(sp.spec.coordinate(2).name == "u");
  CHECK(sp.spec.coordinate(3).name == "u_x");
  CHECK(sp.spec.coordinate(4).name == "u_t");
  CHECK(sp.spec.coordinate(5).name == "u_xx");
  CHECK(sp.spec.coordinate(6).name == "u_xt");
  CHECK(sp.spec.coordinate(7).name == "u_tt");

  // mixed jets are a single nondecreasing coordinate
  CHECK(sp.spec.jet(0, {0, 1}) == sp.spec.jet(0, {1, 0}));
  CHECK_THROWS_AS(sp.spec.jet(0, {0, 0, 0, 0}), JetError);
}

TEST_CASE("total derivative: basic rules") {
  Space sp(2);
  SymbolId u_x = sp.spec.jet(0, {0});
  Expr d1 = total_derivative(sp.table.sym("u"), 0, sp.spec, sp.table);
  CHECK(struct_equal(d1, Expr::symbol(u_x)));

  Expr d2 = total_derivative(P("x^2", sp), 0, sp.spec, sp.table);
  CHECK(struct_equal(normalize(d2 - P("2*x", sp)), Expr::integer(0)));

  Expr d3 = total_derivative(P("u*u_x", sp), 1, sp.spec, sp.table);
  Expr expect = P("u_t*u_x + u*u_xt", sp);
  CHECK(struct_equal(normalize(d3 - expect), Expr::integer(0)));
}

TEST_CASE("total derivative: order overflow detected") {
  Space sp(1);
  CHECK_THROWS_AS(total_derivative(P("u_x", sp), 0, sp.spec, sp.table), JetError);
}

TEST_CASE("prolong_function: closed forms and numeric cross-check") {
  Space sp(2);
  auto jets_const = prolong_function({Expr::integer(4)}, sp.spec, sp.table);
  for (int k = sp.spec.p() + 1; k < sp.spec.N(); ++k)
    CHECK(jets_const[k].is_zero());

  auto jets_cubic = prolong_function({P("x^3", sp)}, sp.spec, sp.table);
  CHECK(struct_equal(normalize(jets_cubic[3] - P("3*x^2", sp)), Expr::integer(0)));
  CHECK(struct_equal(normalize(jets_cubic[5] - P("6*x", sp)), Expr::integer(0)));

  // u = sin(x + t^2): u_xt(1,1) = -2 sin 2
  auto jets_sin = prolong_function({P("sin(x + t^2)", sp)}, sp.spec, sp.table);
  Bindings b;
  b.set(sp.spec.independent(0), 1.0);
  b.set(sp.spec.independent(1), 1.0);
  int k_xt = sp.spec.index_of(sp.spec.jet(0, {0, 1}));
  double v = evaluate(jets_sin[k_xt], b, sp.table);
  CHECK(std::fabs(v - (-2.0 * std::sin(2.0))) < 1e-12);

  // finite-difference cross-check of the same jet
  auto f = [](double x, double t) { return std::sin(x + t * t); };
  double h = 1e-4;
  double fd = (f(1 + h, 1 + h) - f(1 + h, 1 - h) - f(1 - h, 1 + h) +
               f(1 - h, 1 - h)) /
              (4 * h * h);
  CHECK(std::fabs(v - fd) < 1e-6);

  // the total derivative chain rule agrees with direct differentiation
  Expr expr = P("u*u_x", sp);
  Expr dt_total = total_derivative(expr, 1, sp.spec, sp.table);
  std::vector<std::pair<SymbolId, Expr>> on_jet;
  for (int k = 0; k < sp.spec.N(); ++k)
    if (sp.spec.coordinate(k).dep >= 0)
      on_jet.push_back({sp.spec.coordinate(k).sym, jets_sin[k]});
  Expr lhs = substitute(dt_total, on_jet);
  Expr rhs = differentiate(substitute(expr, on_jet), sp.spec.independent(1),
                           sp.table);
  std::mt19937_64 rng(3);
  CHECK(is_zero_sampled(lhs - rhs, sp.table, rng));
}

TEST_CASE("prolong_vector_field: translations and scalings") {
  Space sp(2);
  VectorField tr;
  tr.xi = {Expr::integer(1), Expr::integer(0)};
  tr.phi = {Expr::integer(0)};
  auto c = prolong_vector_field(tr, sp.spec, sp.table);
  for (int k = sp.spec.p(); k < sp.spec.N(); ++k) CHECK(c[k].is_zero());

  VectorField sc;
  sc.xi = {P("x", sp), P("t", sp)};
  sc.phi = {Expr::integer(0)};
  auto cs = prolong_vector_field(sc, sp.spec, sp.table);
  int kx = sp.spec.index_of(sp.spec.jet(0, {0}));
  int kt = sp.spec.index_of(sp.spec.jet(0, {1}));
  CHECK(struct_equal(normalize(cs[kx] + P("u_x", sp)), Expr::integer(0)));
  CHECK(struct_equal(normalize(cs[kt] + P("u_t", sp)), Expr::integer(0)));
}

TEST_CASE("non-projectable vector field rejected") {
  Space sp(1);
  VectorField v;
  v.xi = {P("u", sp)};
  v.phi = {Expr::integer(0)};
  CHECK_THROWS_AS(prolong_vector_field(v, sp.spec, sp.table), GroupError);
}

TEST_CASE("prolong_group_action: identity and diagonal scaling") {
  Space sp(2);
  GroupAction id;
  id.Xi = {P("x", sp), P("t", sp)};
  id.Phi = {P("u", sp)};
  id.linear_in_u = true;
  auto pr = prolong_group_action(id, sp.spec, sp.table);
  for (int k = 0; k < sp.spec.N(); ++k)
    CHECK(struct_equal(normalize(pr.zbar[k] - Expr::symbol(sp.spec.coordinate(k).sym)),
                       Expr::integer(0)));
  REQUIRE(pr.b.has_value());
  int m = sp.spec.N() - sp.spec.p();
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l)
      CHECK(struct_equal(pr.b->b[k][l], Expr::integer(k == l ? 1 : 0)));

  GroupAction scale;
  scale.Xi = {P("x", sp), P("t", sp)};
  scale.Phi = {P("exp(eta)*u", sp)};
  scale.linear_in_u = true;
  auto ps = prolong_group_action(scale, sp.spec, sp.table);
  Expr eeta = P("exp(eta)", sp);
  for (int k = 0; k < m; ++k) {
    for (int l = 0; l < m; ++l) {
      Expr want = (k == l) ? eeta : Expr::integer(0);
      CHECK(struct_equal(normalize(ps.b->b[k][l] - want), Expr::integer(0)));
    }
    CHECK(ps.b->b0[k].is_zero());
  }
}

TEST_CASE("identity-at-zero violation rejected") {
  Space sp(1);
  GroupAction bad;
  bad.Xi = {P("x + 1", sp)};
  bad.Phi = {P("u", sp)};
  CHECK_THROWS_AS(validate_group_action(bad, sp.spec, sp.table), GroupError);
}

TEST_CASE("first prolongation of G1 matches an explicitly transformed function") {
  Space sp(1);
  GroupAction g = g1_identity_flux(sp);
  auto pr = prolong_group_action(g, sp.spec, sp.table);

  double eta = 0.05;
  // u(x,t) = x^2; the transformed graph solves for the new function at
  // (x~, t~): x = x~/(1+eta t~), t = t~/(1+eta t~).
  auto ut = [&](double xt, double tt) {
    double t = tt / (1 + eta * tt);
    double x = xt / (1 + eta * tt);
    double u = x * x;
    return eta * x + (1 - eta * t) * u;
  };
  int k_ux = sp.spec.index_of(sp.spec.jet(0, {0}));
  for (int i = 0; i < 10; ++i) {
    double x = -1.0 + 0.25 * i, t = 0.3 + 0.02 * i;
    Bindings b;
    b.set(sp.table.eta(), eta);
    b.set(sp.spec.independent(0), x);
    b.set(sp.spec.independent(1), t);
    b.set(sp.spec.dependent(0), x * x);
    b.set(sp.spec.jet(0, {0}), 2 * x);
    b.set(sp.spec.jet(0, {1}), 0.0);
    double pred = evaluate(pr.zbar[k_ux], b, sp.table);

    double xt = x / (1 - eta * t), tt = t / (1 - eta * t);
    double h = 1e-6;
    double fd = (ut(xt + h, tt) - ut(xt - h, tt)) / (2 * h);
    CHECK(std::fabs(pred - fd) < 1e-7);
  }
}

TEST_CASE("prolongation-flow compatibility at random jets") {
  Space sp(1);
  GroupAction g = g1_identity_flux(sp);
  VectorField v = w1_identity_flux(sp);
  auto pr = prolong_group_action(g, sp.spec, sp.table);
  auto coeffs = prolong_vector_field(v, sp.spec, sp.table);

  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  double h = 1e-5;
  for (int trial = 0; trial < 50; ++trial) {
    Bindings b;
    for (const auto& c : sp.spec.coordinates()) b.set(c.sym, dist(rng));
    for (int k = 0; k < sp.spec.N(); ++k) {
      Bindings bp = b, bm = b;
      bp.set(sp.table.eta(), h);
      bm.set(sp.table.eta(), -h);
      double fd = (evaluate(pr.zbar[k], bp, sp.table) -
                   evaluate(pr.zbar[k], bm, sp.table)) /
                  (2 * h);
      double sym = evaluate(coeffs[k], b, sp.table);
      CHECK(std::fabs(fd - sym) < 1e-5 * (1.0 + std::fabs(sym)));
    }
  }
}

TEST_CASE("flow: translation, closed-form G2, group law, blow-up") {
  Space sp(1);
  VectorField tr;
  tr.xi = {Expr::integer(1), Expr::integer(0)};
  tr.phi = {Expr::integer(0)};
  auto pt = flow(tr, 1.0, {0, 0, 0}, sp.spec, sp.table);
  CHECK(pt[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pt[1] == 0.0);
  CHECK(pt[2] == 0.0);

  // w2 with f = id: xi = (x^2, x t), phi = u (x - u t)
  VectorField w2;
  w2.xi = {P("x^2", sp), P("x*t", sp)};
  w2.phi = {P("u*(x - u*t)", sp)};
  double eta = 0.1, x = 0.5, t = 0.2, u = 0.3;
  auto p2 = flow(w2, eta, {x, t, u}, sp.spec, sp.table);
  double d = 1 - eta * x;
  CHECK(std::fabs(p2[0] - x / d) < 1e-8);
  CHECK(std::fabs(p2[1] - t / d) < 1e-8);
  CHECK(std::fabs(p2[2] - u / (1 - eta * (x - u * t))) < 1e-8);

  VectorField w1 = w1_identity_flux(sp);
  auto a = flow(w1, 0.05, {x, t, u}, sp.spec, sp.table);
  auto ab = flow(w1, 0.05, a, sp.spec, sp.table);
  auto once = flow(w1, 0.1, {x, t, u}, sp.spec, sp.table);
  for (int i = 0; i < 3; ++i) CHECK(std::fabs(ab[i] - once[i]) < 1e-8);

  // G1 escapes when 1 - eta t reaches zero
  VectorField esc = w1_identity_flux(sp);
  CHECK_THROWS_AS(flow(esc, 2.0, {0.0, 1.0, 0.0}, sp.spec, sp.table), OdeBlowup);
}
