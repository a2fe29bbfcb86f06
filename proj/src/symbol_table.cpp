#include "weaksym/symbol_table.hpp"

#include <cmath>

#include "weaksym/expr_ops.hpp"

namespace weaksym {

Expr SymbolTable::opaque_derivative(const std::string& name, int slot,
                                    const std::vector<Expr>& args) {
  OpaqueFn info;
  {
    std::lock_guard<std::mutex> lock(*mutex_);
    auto it = opaques_.find(name);
    if (it == opaques_.end()) throw SymbolError("unknown opaque function: " + name);
    info = it->second;
  }
  if (slot < (int)info.rules.size() && info.rules[slot]) return info.rules[slot](args);
  if (!info.auto_derivatives)
    throw SymbolError("no derivative rule for slot " + std::to_string(slot) +
                      " of opaque function " + name);
  std::string dname = "D" + std::to_string(slot + 1) + "[" + name + "]";
  {
    std::lock_guard<std::mutex> lock(*mutex_);
    if (!opaques_.count(dname)) {
      OpaqueFn d;
      d.arity = info.arity;
      d.auto_derivatives = true;
      opaques_[dname] = std::move(d);
    }
  }
  return Expr::opaque(dname, args);
}

double SymbolTable::inverse_roundtrip_defect(const std::string& name, double lo,
                                             double hi, int samples) const {
  const OpaqueFn& f = opaque_info(name);
  if (f.inverse.empty()) throw SymbolError("no inverse declared for " + name);
  const OpaqueFn& g = opaque_info(f.inverse);
  if (!f.evaluator || !g.evaluator)
    throw SymbolError("inverse round trip needs numeric evaluators: " + name);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    double u = lo + (hi - lo) * i / (samples - 1);
    double r = g.evaluator({f.evaluator({u})});
    worst = std::max(worst, std::fabs(r - u));
  }
  return worst;
}

}  // namespace weaksym
