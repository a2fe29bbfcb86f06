#pragma once

#include <random>
#include <set>
#include <unordered_map>

#include "weaksym/expr.hpp"
#include "weaksym/symbol_table.hpp"

namespace weaksym {

/// Symbol -> value map used for numeric evaluation.
class Bindings {
 public:
  void set(SymbolId id, double v) { values_[id] = v; }
  bool has(SymbolId id) const { return values_.count(id) > 0; }
  double get(SymbolId id) const {
    auto it = values_.find(id);
    if (it == values_.end()) throw SymbolError("unbound symbol in evaluation");
    return it->second;
  }

 private:
  std::unordered_map<SymbolId, double> values_;
};

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Canonical form: flattened sorted sums/products, collected rational
/// coefficients, merged power exponents, cancelled common factors in
/// quotients. Idempotent.
Expr normalize(const Expr& e);

/// Exact partial derivative with respect to symbol s.
Expr differentiate(const Expr& e, SymbolId s, SymbolTable& table);

/// Simultaneous substitution of symbols by expressions.
Expr substitute(const Expr& e, const std::vector<std::pair<SymbolId, Expr>>& map);
Expr substitute(const Expr& e, SymbolId s, const Expr& repl);

double evaluate(const Expr& e, const Bindings& b, const SymbolTable& table);

void collect_free_symbols(const Expr& e, std::set<SymbolId>& out);
std::set<SymbolId> free_symbols(const Expr& e);
bool depends_on(const Expr& e, SymbolId s);

/// Probabilistic semantic-zero test: 20 random sample points, tolerance 1e-9.
/// Free symbols are drawn uniformly from [-2,2]; evaluation failures are
/// resampled.
bool is_zero_sampled(const Expr& e, const SymbolTable& table, std::mt19937_64& rng,
                     int points = 20, double tol = 1e-9);

std::string to_string(const Expr& e, const SymbolTable& table);

/// Flat evaluation tape for fast repeated numeric evaluation.
/// Symbols are resolved to input-slot indices at compile time.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const Expr& e, const SymbolTable& table,
               const std::vector<SymbolId>& inputs);
  double eval(const double* args) const;
  double eval(const std::vector<double>& args) const { return eval(args.data()); }

 private:
  enum class Op : uint8_t { Const, Input, Add, Mul, PowRat, Div, Neg, CallB, CallOp };
  struct Instr {
    Op op;
    int n = 0;          // operand count for Add/Mul, input slot for Input
    double cval = 0.0;  // Const
    Rational exp;       // PowRat
    Builtin fn = Builtin::Exp;
    const OpaqueFn* opaque = nullptr;
    std::string opname;
  };
  void compile(const Expr& e, const SymbolTable& table,
               const std::vector<SymbolId>& inputs);
  std::vector<Instr> tape_;
  int max_stack_ = 0;
};

double eval_power(double base, const Rational& exp);
double eval_builtin(Builtin fn, double x);

}  // namespace weaksym
