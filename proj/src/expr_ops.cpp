#include "weaksym/expr_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace weaksym {

// ---------------------------------------------------------------------------
// normalize
// ---------------------------------------------------------------------------

namespace {

struct Coeff {
  bool is_float = false;
  Rational r{1};
  double f = 1.0;

  double value() const { return is_float ? f : r.to_double(); }
  bool is_zero() const { return is_float ? f == 0.0 : r.is_zero(); }
  bool is_one() const { return !is_float && r.is_one(); }
  void promote() {
    if (!is_float) { f = r.to_double(); is_float = true; }
  }
  void mul_rat(const Rational& x) {
    if (is_float) f *= x.to_double();
    else r = r * x;
  }
  void mul_float(double x) { promote(); f *= x; }
  void add(const Coeff& o) {
    if (is_float || o.is_float) { promote(); f += o.value(); }
    else r = r + o.r;
  }
  Expr to_expr() const { return is_float ? Expr::number(f) : Expr::rational(r); }
};

struct Factor {
  Expr base;
  Rational exp;
};

Expr normalize_impl(const Expr& e);

// Emit the canonical product  coeff * f1^e1 * ... , negative exponents and a
// non-unit rational denominator go into a Quotient node.
Expr emit_product(Coeff coeff, std::vector<Factor> factors) {
  if (coeff.is_zero()) return Expr::integer(0);
  factors.erase(std::remove_if(factors.begin(), factors.end(),
                               [](const Factor& f) { return f.exp.is_zero(); }),
                factors.end());
  if (factors.empty()) return coeff.to_expr();
  std::sort(factors.begin(), factors.end(), [](const Factor& a, const Factor& b) {
    if (int c = Expr::compare(a.base, b.base)) return c < 0;
    return a.exp < b.exp;
  });

  std::vector<Expr> num, den;
  Rational num_coeff_rat(1);
  bool coeff_in_num = true;
  if (coeff.is_float) {
    num.push_back(Expr::number(coeff.f));
  } else {
    // keep rational numerator as a leading factor, denominator joins den
    num_coeff_rat = Rational(coeff.r.num);
    if (coeff.r.den != 1) den.push_back(Expr::rational(Rational(coeff.r.den)));
    coeff_in_num = !num_coeff_rat.is_one();
    if (coeff_in_num) num.push_back(Expr::rational(num_coeff_rat));
  }
  for (const auto& f : factors) {
    if (f.exp.num > 0) {
      num.push_back(f.exp.is_one() ? f.base : Expr::power(f.base, f.exp));
    } else {
      Rational pe = -f.exp;
      den.push_back(pe.is_one() ? f.base : Expr::power(f.base, pe));
    }
  }
  auto assemble = [](std::vector<Expr>& v) -> Expr {
    if (v.empty()) return Expr::integer(1);
    if (v.size() == 1) return v[0];
    return Expr::product(v);
  };
  Expr n = assemble(num), d = assemble(den);
  if (d.is_one()) return n;
  return Expr::quotient(n, d);
}

void collect_factor(const Expr& e, const Rational& mult, Coeff& coeff,
                    std::vector<Factor>& factors);
Expr normalize_sum(const std::vector<Expr>& in_terms);

/// Distribute numerator sum-factors with small positive integer exponents so
/// that cancellations across sums are found; other factors stay collected.
Expr emit_expanded(Coeff coeff, std::vector<Factor> factors) {
  std::vector<Expr> sums;
  std::vector<Factor> keep;
  for (auto& f : factors) {
    if (f.base.kind() == NodeKind::Sum && f.exp.is_integer() && f.exp.num > 0 &&
        f.exp.num <= 10) {
      for (long long c = 0; c < f.exp.num; ++c) sums.push_back(f.base);
    } else {
      keep.push_back(f);
    }
  }
  if (sums.empty()) return emit_product(std::move(coeff), std::move(factors));
  std::vector<Expr> terms{emit_product(std::move(coeff), std::move(keep))};
  for (const Expr& s : sums) {
    std::vector<Expr> next;
    next.reserve(terms.size() * s.node().args.size());
    for (const Expr& t : terms)
      for (const Expr& sub : s.node().args) next.push_back(Expr::product({t, sub}));
    terms = std::move(next);
  }
  for (Expr& t : terms) {
    Coeff c;
    std::vector<Factor> fs;
    collect_factor(t, Rational(1), c, fs);
    t = emit_expanded(std::move(c), std::move(fs));
  }
  return normalize_sum(terms);
}

// Decompose an already-normalized expression as coefficient * factors.
void collect_product_of(const Expr& e, Coeff& coeff, std::vector<Factor>& factors) {
  collect_factor(e, Rational(1), coeff, factors);
}

void add_factor(std::vector<Factor>& factors, const Expr& base, const Rational& exp) {
  for (auto& f : factors) {
    if (struct_equal(f.base, base)) {
      f.exp = f.exp + exp;
      return;
    }
  }
  factors.push_back({base, exp});
}

void collect_factor(const Expr& e, const Rational& mult, Coeff& coeff,
                    std::vector<Factor>& factors) {
  const ExprNode& n = e.node();
  switch (n.kind) {
    case NodeKind::RationalConst:
      if (mult.is_integer()) coeff.mul_rat(n.rat.pow_int(mult.num));
      else if (!n.rat.is_one()) add_factor(factors, e, mult);
      return;
    case NodeKind::FloatConst:
      coeff.mul_float(eval_power(n.fval, mult));
      return;
    case NodeKind::Product:
      for (const auto& a : n.args) collect_factor(a, mult, coeff, factors);
      return;
    case NodeKind::Quotient:
      collect_factor(n.args[0], mult, coeff, factors);
      collect_factor(n.args[1], -mult, coeff, factors);
      return;
    case NodeKind::Power:
      if (mult.is_integer()) {
        collect_factor(n.args[0], n.rat * mult, coeff, factors);
        return;
      }
      add_factor(factors, e, mult);
      return;
    default:
      add_factor(factors, e, mult);
      return;
  }
}

struct Term {
  Coeff coeff;
  Expr rest;  // canonical product with coefficient 1
};

void split_term(const Expr& t, Coeff& coeff, Expr& rest) {
  Coeff c;
  std::vector<Factor> factors;
  collect_product_of(t, c, factors);
  coeff = c;
  Coeff one;
  rest = emit_product(one, std::move(factors));
}

Expr normalize_sum(const std::vector<Expr>& in_terms) {
  std::vector<Expr> flat;
  std::vector<Expr> work = in_terms;
  for (size_t i = 0; i < work.size(); ++i) {
    if (work[i].kind() == NodeKind::Sum) {
      for (const auto& a : work[i].node().args) work.push_back(a);
    } else {
      flat.push_back(work[i]);
    }
  }

  // Combine over a common denominator when any term carries negative factor
  // exponents or a non-unit rational denominator, so that sums of quotients
  // cancel exactly.
  {
    std::vector<Factor> denom;
    long long L = 1;
    bool have_den = false;
    std::vector<std::pair<Coeff, std::vector<Factor>>> split;
    for (const auto& t : flat) {
      Coeff c;
      std::vector<Factor> fs;
      collect_product_of(t, c, fs);
      if (c.is_zero()) continue;
      if (!c.is_float && c.r.den != 1) {
        L = std::lcm(L, c.r.den);
        have_den = true;
      }
      for (const auto& f : fs) {
        if (f.exp.num < 0) {
          have_den = true;
          Rational need = -f.exp;
          bool found = false;
          for (auto& d : denom) {
            if (struct_equal(d.base, f.base)) {
              if (d.exp < need) d.exp = need;
              found = true;
              break;
            }
          }
          if (!found) denom.push_back({f.base, need});
        }
      }
      split.push_back({c, std::move(fs)});
    }
    if (have_den) {
      std::vector<Expr> numterms;
      numterms.reserve(split.size());
      for (auto& [c, fs] : split) {
        c.mul_rat(Rational(L));
        for (const auto& d : denom) add_factor(fs, d.base, d.exp);
        numterms.push_back(emit_expanded(c, std::move(fs)));
      }
      Expr N = normalize_sum(numterms);
      if (N.is_zero()) return N;
      Coeff c2;
      std::vector<Factor> f2;
      collect_factor(N, Rational(1), c2, f2);
      c2.mul_rat(Rational(1, L));
      for (const auto& d : denom) add_factor(f2, d.base, -d.exp);
      return emit_product(c2, std::move(f2));
    }
  }

  std::vector<Term> terms;
  for (const auto& t : flat) {
    Coeff c;
    Expr rest;
    split_term(t, c, rest);
    if (c.is_zero()) continue;
    bool merged = false;
    for (auto& existing : terms) {
      if (struct_equal(existing.rest, rest)) {
        existing.coeff.add(c);
        merged = true;
        break;
      }
    }
    if (!merged) terms.push_back({c, rest});
  }
  std::vector<Expr> out;
  for (auto& t : terms) {
    if (t.coeff.is_zero()) continue;
    Coeff c = t.coeff;
    std::vector<Factor> factors;
    Coeff dummy;
    collect_product_of(t.rest, dummy, factors);
    // dummy is 1 by construction of rest
    out.push_back(emit_product(c, std::move(factors)));
  }
  std::sort(out.begin(), out.end(),
            [](const Expr& a, const Expr& b) { return Expr::compare(a, b) < 0; });
  if (out.empty()) return Expr::integer(0);
  if (out.size() == 1) return out[0];
  return Expr::sum(out);
}

Expr normalize_impl(const Expr& e) {
  const ExprNode& n = e.node();
  switch (n.kind) {
    case NodeKind::RationalConst:
    case NodeKind::FloatConst:
    case NodeKind::Symbol:
      return e;
    case NodeKind::Call: {
      Expr arg = normalize_impl(n.args[0]);
      if (n.fn == Builtin::Sqrt) return normalize_impl(Expr::power(arg, Rational(1, 2)));
      if (arg.is_rational()) {
        const Rational& r = arg.node().rat;
        switch (n.fn) {
          case Builtin::Exp: if (r.is_zero()) return Expr::integer(1); break;
          case Builtin::Log: if (r.is_one()) return Expr::integer(0); break;
          case Builtin::Sin: if (r.is_zero()) return Expr::integer(0); break;
          case Builtin::Cos: if (r.is_zero()) return Expr::integer(1); break;
          case Builtin::Abs: return Expr::rational(r.num < 0 ? -r : r);
          default: break;
        }
      }
      return Expr::call(n.fn, arg);
    }
    case NodeKind::Opaque: {
      std::vector<Expr> args;
      args.reserve(n.args.size());
      for (const auto& a : n.args) args.push_back(normalize_impl(a));
      return Expr::opaque(n.opaque, std::move(args));
    }
    case NodeKind::Power: {
      Expr base = normalize_impl(n.args[0]);
      const Rational& ex = n.rat;
      if (ex.is_zero()) return Expr::integer(1);
      if (ex.is_one()) return base;
      Coeff coeff;
      std::vector<Factor> factors;
      collect_factor(base, ex, coeff, factors);
      return emit_expanded(coeff, std::move(factors));
    }
    case NodeKind::Product:
    case NodeKind::Quotient: {
      std::vector<Expr> args;
      for (const auto& a : n.args) args.push_back(normalize_impl(a));
      Expr tmp = (n.kind == NodeKind::Product) ? Expr::product(args)
                                               : Expr::quotient(args[0], args[1]);
      Coeff coeff;
      std::vector<Factor> factors;
      collect_product_of(tmp, coeff, factors);
      return emit_expanded(coeff, std::move(factors));
    }
    case NodeKind::Sum: {
      std::vector<Expr> args;
      for (const auto& a : n.args) args.push_back(normalize_impl(a));
      return normalize_sum(args);
    }
  }
  return e;
}

}  // namespace

Expr normalize(const Expr& e) { return normalize_impl(e); }

// ---------------------------------------------------------------------------
// differentiate
// ---------------------------------------------------------------------------

Expr differentiate(const Expr& e, SymbolId s, SymbolTable& table) {
  const ExprNode& n = e.node();
  switch (n.kind) {
    case NodeKind::RationalConst:
    case NodeKind::FloatConst:
      return Expr::integer(0);
    case NodeKind::Symbol:
      return Expr::integer(n.sym == s ? 1 : 0);
    case NodeKind::Sum: {
      std::vector<Expr> terms;
      for (const auto& a : n.args) terms.push_back(differentiate(a, s, table));
      return normalize(Expr::sum(terms));
    }
    case NodeKind::Product: {
      std::vector<Expr> terms;
      for (size_t i = 0; i < n.args.size(); ++i) {
        Expr d = differentiate(n.args[i], s, table);
        if (d.is_zero()) continue;
        std::vector<Expr> factors;
        for (size_t j = 0; j < n.args.size(); ++j)
          factors.push_back(j == i ? d : n.args[j]);
        terms.push_back(Expr::product(factors));
      }
      return normalize(Expr::sum(terms));
    }
    case NodeKind::Quotient: {
      const Expr& a = n.args[0];
      const Expr& b = n.args[1];
      Expr da = differentiate(a, s, table);
      Expr db = differentiate(b, s, table);
      return normalize(
          Expr::quotient(da * b - a * db, Expr::power(b, Rational(2))));
    }
    case NodeKind::Power: {
      const Expr& b = n.args[0];
      Expr db = differentiate(b, s, table);
      if (db.is_zero()) return Expr::integer(0);
      Expr res = Expr::rational(n.rat) * Expr::power(b, n.rat - Rational(1)) * db;
      return normalize(res);
    }
    case NodeKind::Call: {
      const Expr& a = n.args[0];
      Expr da = differentiate(a, s, table);
      if (da.is_zero()) return Expr::integer(0);
      Expr outer;
      switch (n.fn) {
        case Builtin::Exp: outer = Expr::call(Builtin::Exp, a); break;
        case Builtin::Log: outer = Expr::quotient(Expr::integer(1), a); break;
        case Builtin::Sin: outer = Expr::call(Builtin::Cos, a); break;
        case Builtin::Cos: outer = -Expr::call(Builtin::Sin, a); break;
        case Builtin::Sqrt:
          outer = Expr::quotient(Expr::rational(Rational(1, 2)),
                                 Expr::power(a, Rational(1, 2)));
          break;
        case Builtin::Abs:
          outer = Expr::quotient(a, Expr::call(Builtin::Abs, a));
          break;
      }
      return normalize(outer * da);
    }
    case NodeKind::Opaque: {
      std::vector<Expr> terms;
      for (size_t slot = 0; slot < n.args.size(); ++slot) {
        Expr da = differentiate(n.args[slot], s, table);
        if (da.is_zero()) continue;
        Expr rule = table.opaque_derivative(n.opaque, (int)slot, n.args);
        terms.push_back(rule * da);
      }
      return normalize(Expr::sum(terms));
    }
  }
  return Expr::integer(0);
}

// ---------------------------------------------------------------------------
// substitute
// ---------------------------------------------------------------------------

Expr substitute(const Expr& e, const std::vector<std::pair<SymbolId, Expr>>& map) {
  const ExprNode& n = e.node();
  if (n.kind == NodeKind::Symbol) {
    for (const auto& [id, repl] : map)
      if (id == n.sym) return repl;
    return e;
  }
  if (n.args.empty()) return e;
  std::vector<Expr> args;
  args.reserve(n.args.size());
  bool changed = false;
  for (const auto& a : n.args) {
    Expr r = substitute(a, map);
    changed = changed || !struct_equal(r, a);
    args.push_back(std::move(r));
  }
  if (!changed) return e;
  switch (n.kind) {
    case NodeKind::Sum: return Expr::sum(std::move(args));
    case NodeKind::Product: return Expr::product(std::move(args));
    case NodeKind::Power: return Expr::power(args[0], n.rat);
    case NodeKind::Quotient: return Expr::quotient(args[0], args[1]);
    case NodeKind::Call: return Expr::call(n.fn, args[0]);
    case NodeKind::Opaque: return Expr::opaque(n.opaque, std::move(args));
    default: return e;
  }
}

Expr substitute(const Expr& e, SymbolId s, const Expr& repl) {
  return substitute(e, std::vector<std::pair<SymbolId, Expr>>{{s, repl}});
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

double eval_power(double base, const Rational& exp) {
  if (exp.is_integer()) {
    long long e = exp.num;
    if (base == 0.0 && e < 0) throw EvalError("zero to negative power");
    double b = base;
    if (e < 0) { b = 1.0 / b; e = -e; }
    double acc = 1.0;
    while (e > 0) {
      if (e & 1) acc *= b;
      b *= b;
      e >>= 1;
    }
    return acc;
  }
  if (base < 0.0) throw EvalError("negative base with fractional exponent");
  if (base == 0.0 && exp.num < 0) throw EvalError("zero to negative power");
  return std::pow(base, exp.to_double());
}

double eval_builtin(Builtin fn, double x) {
  switch (fn) {
    case Builtin::Exp: return std::exp(x);
    case Builtin::Log:
      if (x <= 0.0) throw EvalError("log of non-positive value");
      return std::log(x);
    case Builtin::Sin: return std::sin(x);
    case Builtin::Cos: return std::cos(x);
    case Builtin::Sqrt:
      if (x < 0.0) throw EvalError("sqrt of negative value");
      return std::sqrt(x);
    case Builtin::Abs: return std::fabs(x);
  }
  throw EvalError("unknown builtin");
}

double evaluate(const Expr& e, const Bindings& b, const SymbolTable& table) {
  const ExprNode& n = e.node();
  switch (n.kind) {
    case NodeKind::RationalConst: return n.rat.to_double();
    case NodeKind::FloatConst: return n.fval;
    case NodeKind::Symbol: return b.get(n.sym);
    case NodeKind::Sum: {
      double acc = 0.0;
      for (const auto& a : n.args) acc += evaluate(a, b, table);
      return acc;
    }
    case NodeKind::Product: {
      double acc = 1.0;
      for (const auto& a : n.args) acc *= evaluate(a, b, table);
      return acc;
    }
    case NodeKind::Quotient: {
      double num = evaluate(n.args[0], b, table);
      double den = evaluate(n.args[1], b, table);
      if (den == 0.0) throw EvalError("division by zero");
      return num / den;
    }
    case NodeKind::Power:
      return eval_power(evaluate(n.args[0], b, table), n.rat);
    case NodeKind::Call:
      return eval_builtin(n.fn, evaluate(n.args[0], b, table));
    case NodeKind::Opaque: {
      const OpaqueFn& fn = table.opaque_info(n.opaque);
      if (!fn.evaluator)
        throw EvalError("opaque function has no numeric evaluator: " + n.opaque);
      std::vector<double> args;
      args.reserve(n.args.size());
      for (const auto& a : n.args) args.push_back(evaluate(a, b, table));
      return fn.evaluator(args);
    }
  }
  throw EvalError("unreachable");
}

// ---------------------------------------------------------------------------
// free symbols / zero test
// ---------------------------------------------------------------------------

void collect_free_symbols(const Expr& e, std::set<SymbolId>& out) {
  const ExprNode& n = e.node();
  if (n.kind == NodeKind::Symbol) {
    out.insert(n.sym);
    return;
  }
  for (const auto& a : n.args) collect_free_symbols(a, out);
}

std::set<SymbolId> free_symbols(const Expr& e) {
  std::set<SymbolId> out;
  collect_free_symbols(e, out);
  return out;
}

bool depends_on(const Expr& e, SymbolId s) {
  const ExprNode& n = e.node();
  if (n.kind == NodeKind::Symbol) return n.sym == s;
  for (const auto& a : n.args)
    if (depends_on(a, s)) return true;
  return false;
}

bool is_zero_sampled(const Expr& e, const SymbolTable& table, std::mt19937_64& rng,
                     int points, double tol) {
  Expr en = normalize(e);
  if (en.is_zero()) return true;
  auto syms = free_symbols(en);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  int done = 0, tries = 0;
  while (done < points && tries < points * 20) {
    ++tries;
    Bindings b;
    for (SymbolId s : syms) b.set(s, dist(rng));
    try {
      double v = evaluate(en, b, table);
      if (!std::isfinite(v) || std::fabs(v) > tol) return false;
      ++done;
    } catch (const EvalError&) {
      continue;  // resample outside domain
    }
  }
  return done > 0;
}

// ---------------------------------------------------------------------------
// printing
// ---------------------------------------------------------------------------

namespace {

// precedence levels: sum 1, product 2, unary 3, power 4, atom 5
void print_expr(std::ostream& os, const Expr& e, const SymbolTable& table, int parent) {
  const ExprNode& n = e.node();
  auto paren = [&](int mine, auto&& body) {
    if (mine < parent) {
      os << "(";
      body();
      os << ")";
    } else {
      body();
    }
  };
  switch (n.kind) {
    case NodeKind::RationalConst:
      if (n.rat.num < 0 || !n.rat.is_integer())
        paren(n.rat.num < 0 ? 3 : 2, [&] { os << n.rat.str(); });
      else
        os << n.rat.str();
      return;
    case NodeKind::FloatConst: {
      std::ostringstream tmp;
      tmp.precision(17);
      tmp << n.fval;
      std::string s = tmp.str();
      if (n.fval < 0)
        paren(3, [&] { os << s; });
      else
        os << s;
      return;
    }
    case NodeKind::Symbol:
      os << table.name(n.sym);
      return;
    case NodeKind::Sum:
      paren(1, [&] {
        for (size_t i = 0; i < n.args.size(); ++i) {
          if (i) os << " + ";
          print_expr(os, n.args[i], table, 1);
        }
      });
      return;
    case NodeKind::Product:
      paren(2, [&] {
        for (size_t i = 0; i < n.args.size(); ++i) {
          if (i) os << "*";
          print_expr(os, n.args[i], table, 3);
        }
      });
      return;
    case NodeKind::Quotient:
      paren(2, [&] {
        print_expr(os, n.args[0], table, 3);
        os << "/";
        print_expr(os, n.args[1], table, 4);
      });
      return;
    case NodeKind::Power:
      paren(4, [&] {
        print_expr(os, n.args[0], table, 5);
        os << "^";
        if (n.rat.is_integer() && n.rat.num >= 0)
          os << n.rat.str();
        else
          os << "(" << n.rat.str() << ")";
      });
      return;
    case NodeKind::Call:
      os << builtin_name(n.fn) << "(";
      print_expr(os, n.args[0], table, 0);
      os << ")";
      return;
    case NodeKind::Opaque:
      os << n.opaque << "(";
      for (size_t i = 0; i < n.args.size(); ++i) {
        if (i) os << ", ";
        print_expr(os, n.args[i], table, 0);
      }
      os << ")";
      return;
  }
}

}  // namespace

std::string to_string(const Expr& e, const SymbolTable& table) {
  std::ostringstream os;
  print_expr(os, e, table, 0);
  return os.str();
}

// ---------------------------------------------------------------------------
// compiled tape
// ---------------------------------------------------------------------------

CompiledExpr::CompiledExpr(const Expr& e, const SymbolTable& table,
                           const std::vector<SymbolId>& inputs) {
  compile(e, table, inputs);
  // stack depth bound: one slot per instruction is safe
  max_stack_ = (int)tape_.size() + 1;
}

void CompiledExpr::compile(const Expr& e, const SymbolTable& table,
                           const std::vector<SymbolId>& inputs) {
  const ExprNode& n = e.node();
  switch (n.kind) {
    case NodeKind::RationalConst: {
      Instr i;
      i.op = Op::Const;
      i.cval = n.rat.to_double();
      tape_.push_back(std::move(i));
      return;
    }
    case NodeKind::FloatConst: {
      Instr i;
      i.op = Op::Const;
      i.cval = n.fval;
      tape_.push_back(std::move(i));
      return;
    }
    case NodeKind::Symbol: {
      auto it = std::find(inputs.begin(), inputs.end(), n.sym);
      if (it == inputs.end())
        throw EvalError("symbol not in compiled input list: " + table.name(n.sym));
      Instr i;
      i.op = Op::Input;
      i.n = (int)(it - inputs.begin());
      tape_.push_back(std::move(i));
      return;
    }
    case NodeKind::Sum:
    case NodeKind::Product: {
      for (const auto& a : n.args) compile(a, table, inputs);
      Instr i;
      i.op = n.kind == NodeKind::Sum ? Op::Add : Op::Mul;
      i.n = (int)n.args.size();
      tape_.push_back(std::move(i));
      return;
    }
    case NodeKind::Quotient: {
      compile(n.args[0], table, inputs);
      compile(n.args[1], table, inputs);
      Instr i;
      i.op = Op::Div;
      tape_.push_back(std::move(i));
      return;
    }
    case NodeKind::Power: {
      compile(n.args[0], table, inputs);
      Instr i;
      i.op = Op::PowRat;
      i.exp = n.rat;
      tape_.push_back(std::move(i));
      return;
    }
    case NodeKind::Call: {
      compile(n.args[0], table, inputs);
      Instr i;
      i.op = Op::CallB;
      i.fn = n.fn;
      tape_.push_back(std::move(i));
      return;
    }
    case NodeKind::Opaque: {
      for (const auto& a : n.args) compile(a, table, inputs);
      Instr i;
      i.op = Op::CallOp;
      i.n = (int)n.args.size();
      i.opaque = &table.opaque_info(n.opaque);
      i.opname = n.opaque;
      if (!i.opaque->evaluator)
        throw EvalError("opaque function has no numeric evaluator: " + n.opaque);
      tape_.push_back(std::move(i));
      return;
    }
  }
}

double CompiledExpr::eval(const double* args) const {
  thread_local std::vector<double> stack;
  stack.clear();
  stack.reserve(max_stack_);
  for (const auto& i : tape_) {
    switch (i.op) {
      case Op::Const:
        stack.push_back(i.cval);
        break;
      case Op::Input:
        stack.push_back(args[i.n]);
        break;
      case Op::Add: {
        double acc = 0.0;
        for (int k = 0; k < i.n; ++k) { acc += stack.back(); stack.pop_back(); }
        stack.push_back(acc);
        break;
      }
      case Op::Mul: {
        double acc = 1.0;
        for (int k = 0; k < i.n; ++k) { acc *= stack.back(); stack.pop_back(); }
        stack.push_back(acc);
        break;
      }
      case Op::Div: {
        double d = stack.back(); stack.pop_back();
        if (d == 0.0) throw EvalError("division by zero");
        stack.back() /= d;
        break;
      }
      case Op::Neg:
        stack.back() = -stack.back();
        break;
      case Op::PowRat:
        stack.back() = eval_power(stack.back(), i.exp);
        break;
      case Op::CallB:
        stack.back() = eval_builtin(i.fn, stack.back());
        break;
      case Op::CallOp: {
        std::vector<double> a(i.n);
        for (int k = i.n - 1; k >= 0; --k) { a[k] = stack.back(); stack.pop_back(); }
        stack.push_back(i.opaque->evaluator(a));
        break;
      }
    }
  }
  return stack.back();
}

}  // namespace weaksym
