#pragma once

#include <map>
#include <string>
#include <vector>

#include "weaksym/expr_ops.hpp"

namespace weaksym {

class JetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One coordinate z_k of the jet space. Independent variables carry dep = -1
/// and an empty multi-index; u^a_J carries the dependent index and the
/// nondecreasing multi-index J over independent variables.
struct JetCoordinate {
  int dep = -1;
  std::vector<int> multi;
  SymbolId sym = -1;
  std::string name;
};

/// Coordinate bookkeeping for the jet space J^n(R^p, R^q).
///
/// Enumeration is z_1..z_p = x, z_{p+1}..z_{p+q} = u, then derivative
/// coordinates graded-lexicographically: by order, then dependent variable,
/// then multi-index. Multi-indices are stored nondecreasing, so u_xt and u_tx
/// are the same coordinate (named after the declaration order of x and t).
class JetSpec {
 public:
  JetSpec(const std::vector<std::string>& independent,
          const std::vector<std::string>& dependent, int order,
          SymbolTable& table);

  int p() const { return p_; }
  int q() const { return q_; }
  int order() const { return order_; }
  int N() const { return (int)coords_.size(); }

  const std::vector<JetCoordinate>& coordinates() const { return coords_; }
  const JetCoordinate& coordinate(int k) const { return coords_.at(k); }

  SymbolId independent(int i) const { return coords_.at(i).sym; }
  SymbolId dependent(int a) const { return coords_.at(p_ + a).sym; }

  /// Jet coordinate u^dep_J; the multi-index is sorted internally.
  /// Throws JetError when |J| exceeds the order of the space.
  SymbolId jet(int dep, std::vector<int> multi) const;

  /// Index into coordinates() for a symbol, or -1 when the symbol is not a
  /// coordinate of this space.
  int index_of(SymbolId s) const;

  bool is_jet_symbol(SymbolId s) const {
    int k = index_of(s);
    return k >= p_;
  }

  /// Number of order-k derivative coordinates per dependent variable,
  /// C(p+k-1, k).
  static long long order_count(int p, int k);

 private:
  int p_, q_, order_;
  std::vector<JetCoordinate> coords_;
  std::map<SymbolId, int> index_;
  // (dep, multi) -> coordinate index
  std::map<std::pair<int, std::vector<int>>, int> by_multi_;
};

/// Total derivative D_i e = de/dx_i + sum u^a_{J,i} de/du^a_J.
/// Throws JetError when e depends on a top-order jet, since the result would
/// then need coordinates above the order of the space.
Expr total_derivative(const Expr& e, int i, const JetSpec& spec,
                      SymbolTable& table);

/// All jet coordinates of the given functions u^a(x) as expressions in x,
/// obtained by repeated symbolic differentiation. Returned in coordinate
/// enumeration order: the first p entries are the x's themselves.
std::vector<Expr> prolong_function(const std::vector<Expr>& u,
                                   const JetSpec& spec, SymbolTable& table);

}  // namespace weaksym
