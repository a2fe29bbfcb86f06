#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "weaksym/expr.hpp"

namespace weaksym {

enum class SymbolRole {
  Independent,
  Jet,
  GroupParam,   // eta
  Quadrature,   // tau
  RegParam,     // eps
  Constant,
};

/// Derivative rule of an opaque function with respect to one argument slot:
/// given the argument list, returns the partial derivative expression.
using DerivRule = std::function<Expr(const std::vector<Expr>&)>;
using NumericFn = std::function<double(const std::vector<double>&)>;

struct OpaqueFn {
  int arity = 1;
  std::vector<DerivRule> rules;  // empty slot -> auto derivative or error
  NumericFn evaluator;           // may be null (symbolic-only)
  std::string inverse;           // name of declared inverse, or empty
  bool auto_derivatives = false;
};

class SymbolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Declared symbols with roles plus the opaque function registry.
/// eta, tau, eps are reserved and predeclared.
class SymbolTable {
 public:
  SymbolTable() {
    eta_ = declare("eta", SymbolRole::GroupParam);
    tau_ = declare("tau", SymbolRole::Quadrature);
    eps_ = declare("eps", SymbolRole::RegParam);
  }

  SymbolId declare(const std::string& name, SymbolRole role) {
    if (by_name_.count(name))
      throw SymbolError("symbol already declared: " + name);
    SymbolId id = (SymbolId)names_.size();
    names_.push_back(name);
    roles_.push_back(role);
    by_name_[name] = id;
    return id;
  }

  std::optional<SymbolId> lookup(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }
  SymbolId require(const std::string& name) const {
    auto id = lookup(name);
    if (!id) throw SymbolError("unknown symbol: " + name);
    return *id;
  }

  const std::string& name(SymbolId id) const { return names_.at(id); }
  SymbolRole role(SymbolId id) const { return roles_.at(id); }
  int size() const { return (int)names_.size(); }

  SymbolId eta() const { return eta_; }
  SymbolId tau() const { return tau_; }
  SymbolId eps() const { return eps_; }

  Expr sym(const std::string& name) const { return Expr::symbol(require(name)); }

  void register_opaque(const std::string& name, OpaqueFn fn) {
    std::lock_guard<std::mutex> lock(*mutex_);
    if ((int)fn.rules.size() > fn.arity)
      throw SymbolError("more derivative rules than arguments: " + name);
    opaques_[name] = std::move(fn);
  }

  bool has_opaque(const std::string& name) const {
    std::lock_guard<std::mutex> lock(*mutex_);
    return opaques_.count(name) > 0;
  }

  const OpaqueFn& opaque_info(const std::string& name) const {
    std::lock_guard<std::mutex> lock(*mutex_);
    auto it = opaques_.find(name);
    if (it == opaques_.end()) throw SymbolError("unknown opaque function: " + name);
    return it->second;
  }

  /// Derivative of opaque call with respect to argument slot. Falls back to an
  /// auto-generated derivative symbol D<slot>[name] when the function was
  /// registered with auto_derivatives.
  Expr opaque_derivative(const std::string& name, int slot,
                         const std::vector<Expr>& args);

  /// Numeric round trip |finv(f(u)) - u| over the sample interval.
  double inverse_roundtrip_defect(const std::string& name, double lo, double hi,
                                  int samples = 33) const;

 private:
  std::vector<std::string> names_;
  std::vector<SymbolRole> roles_;
  std::map<std::string, SymbolId> by_name_;
  std::map<std::string, OpaqueFn> opaques_;
  mutable std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
  SymbolId eta_, tau_, eps_;
};

}  // namespace weaksym
