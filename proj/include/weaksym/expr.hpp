#pragma once

#include <memory>
#include <string>
#include <vector>

#include "weaksym/rational.hpp"

namespace weaksym {

using SymbolId = int;

enum class NodeKind {
  RationalConst,
  FloatConst,
  Symbol,
  Sum,
  Product,
  Power,     // base ^ rational exponent
  Quotient,  // args[0] / args[1]
  Call,      // elementary function
  Opaque,    // registered function symbol
};

enum class Builtin { Exp, Log, Sin, Cos, Sqrt, Abs };

const char* builtin_name(Builtin b);

class Expr;

struct ExprNode {
  NodeKind kind;
  Rational rat;        // RationalConst value, Power exponent
  double fval = 0.0;   // FloatConst
  SymbolId sym = -1;   // Symbol
  Builtin fn = Builtin::Exp;
  std::string opaque;  // Opaque function name
  std::vector<Expr> args;
};

/// Immutable expression tree with structural sharing.
class Expr {
 public:
  Expr();  // the constant 0

  static Expr rational(Rational r);
  static Expr integer(long long n) { return rational(Rational(n)); }
  static Expr number(double v);
  static Expr symbol(SymbolId id);
  static Expr sum(std::vector<Expr> terms);
  static Expr product(std::vector<Expr> factors);
  static Expr power(Expr base, Rational exponent);
  static Expr quotient(Expr num, Expr den);
  static Expr call(Builtin fn, Expr arg);
  static Expr opaque(std::string name, std::vector<Expr> args);

  const ExprNode& node() const { return *node_; }
  NodeKind kind() const { return node_->kind; }

  bool is_rational() const { return node_->kind == NodeKind::RationalConst; }
  bool is_zero() const { return is_rational() && node_->rat.is_zero(); }
  bool is_one() const { return is_rational() && node_->rat.is_one(); }
  bool is_constant() const {
    return node_->kind == NodeKind::RationalConst || node_->kind == NodeKind::FloatConst;
  }
  double constant_value() const {
    return is_rational() ? node_->rat.to_double() : node_->fval;
  }

  friend Expr operator+(const Expr& a, const Expr& b) { return sum({a, b}); }
  friend Expr operator-(const Expr& a, const Expr& b) {
    return sum({a, product({integer(-1), b})});
  }
  friend Expr operator*(const Expr& a, const Expr& b) { return product({a, b}); }
  friend Expr operator/(const Expr& a, const Expr& b) { return quotient(a, b); }
  Expr operator-() const { return product({integer(-1), *this}); }

  /// Structural total order: -1, 0, +1. Zero means structural equality.
  static int compare(const Expr& a, const Expr& b);
  friend bool struct_equal(const Expr& a, const Expr& b) { return compare(a, b) == 0; }

 private:
  explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const ExprNode> node_;
};

}  // namespace weaksym
