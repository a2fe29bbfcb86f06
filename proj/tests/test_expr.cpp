#include <cmath>
#include <random>

#include "doctest.h"
#include "weaksym/expr_ops.hpp"
#include "weaksym/parser.hpp"

using namespace weaksym;

namespace {

SymbolTable make_table() {
  SymbolTable t;
  t.declare("x", SymbolRole::Independent);
  t.declare("t", SymbolRole::Independent);
  t.declare("y", SymbolRole::Independent);
  t.declare("u", SymbolRole::Jet);
  t.declare("u_x", SymbolRole::Jet);
  t.declare("u_t", SymbolRole::Jet);
  return t;
}

void register_exp_family(SymbolTable& t) {
  // f = exp with declared inverse finv = log, derivative fp = exp
  OpaqueFn f;
  f.arity = 1;
  f.evaluator = [](const std::vector<double>& a) { return std::exp(a[0]); };
  f.rules = {[](const std::vector<Expr>& a) { return Expr::opaque("fp", a); }};
  f.inverse = "finv";
  t.register_opaque("f", f);
  OpaqueFn fp = f;
  fp.inverse.clear();
  fp.rules = {[](const std::vector<Expr>& a) { return Expr::opaque("fp", a); }};
  t.register_opaque("fp", fp);
  OpaqueFn finv;
  finv.arity = 1;
  finv.evaluator = [](const std::vector<double>& a) {
    if (a[0] <= 0) throw EvalError("finv domain");
    return std::log(a[0]);
  };
  finv.rules = {[](const std::vector<Expr>& a) {
    return Expr::quotient(Expr::integer(1), Expr::opaque("fp", {Expr::opaque("finv", a)}));
  }};
  t.register_opaque("finv", finv);
}

// independent central-difference oracle
double central_diff(const Expr& e, SymbolId s, Bindings b, const SymbolTable& t,
                    double h = 1e-6) {
  double v = b.get(s);
  b.set(s, v + h);
  double hi = evaluate(e, b, t);
  b.set(s, v - h);
  double lo = evaluate(e, b, t);
  return (hi - lo) / (2 * h);
}

}  // namespace

TEST_CASE("parse basic AST shapes") {
  SymbolTable t = make_table();
  Expr e = parse("u_t + u*u_x", t);
  CHECK(e.kind() == NodeKind::Sum);
  CHECK(e.node().args.size() == 2);
  CHECK(e.node().args[1].kind() == NodeKind::Product);

  Expr g = parse("x/(1-eta*t)", t);
  CHECK(g.kind() == NodeKind::Quotient);

  register_exp_family(t);
  Expr phi = parse("finv(eta*x + f(u) - eta*f(u)*t)", t);
  CHECK(phi.kind() == NodeKind::Opaque);
  CHECK(phi.node().opaque == "finv");
}

TEST_CASE("parse errors carry position and names") {
  SymbolTable t = make_table();
  CHECK_THROWS_AS(parse("u_t + w", t), ParseError);
  CHECK_THROWS_AS(parse("u_t +", t), ParseError);
  CHECK_THROWS_WITH_AS(parse("q123 + 1", t), doctest::Contains("q123"), ParseError);
  // symbolic exponent rejected
  CHECK_THROWS_AS(parse("x^u", t), ParseError);
  // arity mismatch
  register_exp_family(t);
  CHECK_THROWS_AS(parse("f(u, x)", t), ParseError);
}

TEST_CASE("normalize collects and cancels") {
  SymbolTable t = make_table();
  Expr x = t.sym("x");

  CHECK(struct_equal(normalize(parse("x + x", t)), normalize(parse("2*x", t))));
  CHECK(normalize(parse("u*u_x - u_x*u", t)).is_zero());

  register_exp_family(t);
  Expr q = parse("(1-eta*t)^3*fp(u)/fp(u)", t);
  CHECK(struct_equal(normalize(q), normalize(parse("(1-eta*t)^3", t))));

  // idempotence on a batch of random-ish expressions
  for (const char* s :
       {"x + x", "(1-eta*t)^3*fp(u)/fp(u)", "u*u_x - u_x*u", "x*t/(t*x)",
        "2*x/4", "x^2*x^(-1)", "(x*t)^2/x", "1/(1/x)", "exp(u)*exp(u)",
        "x - x + t*t*t/t^2", "sqrt(x)*sqrt(x)"}) {
    Expr e = normalize(parse(s, t));
    CHECK(struct_equal(normalize(e), e));
  }
  CHECK(struct_equal(normalize(parse("sqrt(x)*sqrt(x)", t)), x));
}

TEST_CASE("substitute is simultaneous and supports on-shell reduction") {
  SymbolTable t = make_table();
  SymbolId ux = t.require("u_x"), ut = t.require("u_t");
  SymbolId x = t.require("x"), y = t.require("y");
  Expr e = parse("u_t + u*u_x", t);
  Expr onshell = substitute(e, ut, normalize(parse("-u*u_x", t)));
  CHECK(normalize(onshell).is_zero());

  Expr swapped = substitute(Expr::symbol(x), {{x, Expr::symbol(y)}, {y, Expr::symbol(x)}});
  CHECK(struct_equal(swapped, Expr::symbol(y)));
  (void)ux;
}

TEST_CASE("differentiate: basic rules and registry") {
  SymbolTable t = make_table();
  register_exp_family(t);
  SymbolId x = t.require("x"), u = t.require("u");

  CHECK(struct_equal(differentiate(parse("x^2", t), x, t), normalize(parse("2*x", t))));
  Expr dfu = differentiate(parse("f(u)", t), u, t);
  CHECK(struct_equal(dfu, normalize(parse("fp(u)", t))));
  CHECK(differentiate(parse("t^3", t), x, t).is_zero());
}

TEST_CASE("differentiate d/deta of x/(1-eta*t) matches finite differences") {
  SymbolTable t = make_table();
  SymbolId eta = t.eta();
  Expr e = parse("x/(1-eta*t)", t);
  Expr de = differentiate(e, eta, t);
  // closed form x*t*(1-eta*t)^-2
  Expr closed = normalize(parse("x*t/(1-eta*t)^2", t));
  Bindings b;
  b.set(t.require("x"), 0.3);
  b.set(t.require("t"), 0.7);
  b.set(eta, 0.05);
  double fd = central_diff(e, eta, b, t);
  CHECK(std::fabs(evaluate(de, b, t) - fd) < 1e-8);
  CHECK(std::fabs(evaluate(closed, b, t) - fd) < 1e-8);
}

TEST_CASE("evaluate exactness and errors") {
  SymbolTable t = make_table();
  register_exp_family(t);
  Bindings b;
  b.set(t.require("x"), 3.0);
  CHECK(evaluate(parse("2*x", t), b, t) == doctest::Approx(6.0));

  Bindings b2;
  b2.set(t.eta(), 0.1);
  b2.set(t.require("t"), 1.0);
  CHECK(evaluate(parse("(1-eta*t)^3", t), b2, t) == doctest::Approx(0.729).epsilon(1e-12));

  Bindings b3;
  b3.set(t.require("u"), 0.4);
  CHECK(std::fabs(evaluate(parse("finv(f(u))", t), b3, t) - 0.4) < 1e-12);

  CHECK_THROWS_AS(evaluate(parse("log(0-1)", t), Bindings{}, t), EvalError);
  Bindings b4;
  b4.set(t.require("x"), 0.0);
  CHECK_THROWS_AS(evaluate(parse("1/x", t), b4, t), EvalError);
}

TEST_CASE("inverse round trip within 1e-10 on declared domain") {
  SymbolTable t = make_table();
  register_exp_family(t);
  CHECK(t.inverse_roundtrip_defect("f", -2.0, 2.0) <= 1e-10);
}

TEST_CASE("property: differentiation linearity") {
  SymbolTable t = make_table();
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> coeff(-5, 5);
  SymbolId x = t.require("x");
  const char* pool[] = {"x^3 + t*x", "sin(x)*t", "x/(1+t^2)", "exp(x)", "x*u + u_x"};
  for (int trial = 0; trial < 20; ++trial) {
    Expr e1 = parse(pool[trial % 5], t);
    Expr e2 = parse(pool[(trial + 2) % 5], t);
    Expr a = Expr::integer(coeff(rng));
    Expr b = Expr::integer(coeff(rng));
    Expr lhs = differentiate(normalize(a * e1 + b * e2), x, t);
    Expr rhs = normalize(a * differentiate(e1, x, t) + b * differentiate(e2, x, t));
    CHECK(is_zero_sampled(lhs - rhs, t, rng));
  }
}

TEST_CASE("property: derivative consistent with central differences") {
  SymbolTable t = make_table();
  register_exp_family(t);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.5, 1.5);
  const char* pool[] = {"x^3 + t*x",     "sin(x + t^2)", "exp(x)*cos(t)",
                        "x/(2+sin(t))",  "f(u) + x*u_x", "sqrt(4+x^2)",
                        "log(4 + x^2)",  "u*u_x + x*t",  "(1+x^2)^(1/2)",
                        "fp(u)*x"};
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Expr e = parse(pool[trial % 10], t);
    auto syms = free_symbols(e);
    Bindings b;
    for (SymbolId s : syms) b.set(s, dist(rng));
    for (SymbolId s : syms) {
      Expr de = differentiate(e, s, t);
      double sym, fd;
      try {
        sym = evaluate(de, b, t);
        fd = central_diff(e, s, b, t);
      } catch (const EvalError&) {
        continue;
      }
      CHECK(std::fabs(sym - fd) <= 1e-5 * (1.0 + std::fabs(sym)));
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("property: normalize preserves numeric value") {
  SymbolTable t = make_table();
  register_exp_family(t);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> dist(0.1, 1.9);
  const char* pool[] = {"(x+t)*(x-t)/(x+t)", "x*x*x/x^2",      "u*u_x - 2*u_x*u",
                        "f(u)/f(u)*x",       "(2*x)^3/(4*x)",  "1/(x/t)",
                        "x^(1/2)*x^(1/2)",   "exp(x)+0*t",     "(1-eta*t)^3*fp(u)/fp(u)"};
  for (const char* s : pool) {
    Expr e = parse(s, t);
    Expr en = normalize(e);
    for (int k = 0; k < 10; ++k) {
      Bindings b;
      for (SymbolId sym : free_symbols(e)) b.set(sym, dist(rng));
      double v0, v1;
      try {
        v0 = evaluate(e, b, t);
        v1 = evaluate(en, b, t);
      } catch (const EvalError&) {
        continue;
      }
      CHECK(std::fabs(v0 - v1) <= 1e-12 * (1.0 + std::fabs(v0)));
    }
  }
}

TEST_CASE("compiled expression matches tree evaluation") {
  SymbolTable t = make_table();
  register_exp_family(t);
  Expr e = normalize(parse("u_t + f(u)*u_x + x/(1+t^2)", t));
  std::vector<SymbolId> inputs = {t.require("x"), t.require("t"), t.require("u"),
                                  t.require("u_x"), t.require("u_t")};
  CompiledExpr ce(e, t, inputs);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> v(5);
    Bindings b;
    for (size_t i = 0; i < v.size(); ++i) {
      v[i] = dist(rng);
      b.set(inputs[i], v[i]);
    }
    CHECK(ce.eval(v) == doctest::Approx(evaluate(e, b, t)).epsilon(1e-13));
  }
}
