#include "weaksym/jet.hpp"

#include <algorithm>
#include <functional>

namespace weaksym {

namespace {

// All nondecreasing multi-indices of length k over {0..p-1}, lexicographic.
void enumerate_multis(int p, int k, std::vector<std::vector<int>>& out) {
  std::vector<int> cur(k, 0);
  std::function<void(int, int)> rec = [&](int pos, int lo) {
    if (pos == k) {
      out.push_back(cur);
      return;
    }
    for (int i = lo; i < p; ++i) {
      cur[pos] = i;
      rec(pos + 1, i);
    }
  };
  if (k == 0)
    out.push_back({});
  else
    rec(0, 0);
}

}  // namespace

long long JetSpec::order_count(int p, int k) {
  // C(p+k-1, k)
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (p + i - 1) / i;
  return r;
}

JetSpec::JetSpec(const std::vector<std::string>& independent,
                 const std::vector<std::string>& dependent, int order,
                 SymbolTable& table)
    : p_((int)independent.size()), q_((int)dependent.size()), order_(order) {
  if (p_ < 1 || q_ < 1 || order_ < 0)
    throw JetError("jet space needs p >= 1, q >= 1, order >= 0");
  auto get_or_declare = [&](const std::string& name, SymbolRole role) {
    if (auto id = table.lookup(name)) return *id;
    return table.declare(name, role);
  };
  for (const auto& name : independent) {
    JetCoordinate c;
    c.sym = get_or_declare(name, SymbolRole::Independent);
    c.name = name;
    coords_.push_back(std::move(c));
  }
  for (int k = 0; k <= order_; ++k) {
    std::vector<std::vector<int>> multis;
    enumerate_multis(p_, k, multis);
    for (int a = 0; a < q_; ++a) {
      for (const auto& J : multis) {
        JetCoordinate c;
        c.dep = a;
        c.multi = J;
        c.name = dependent[a];
        if (!J.empty()) {
          c.name += "_";
          for (int i : J) c.name += independent[i];
        }
        c.sym = get_or_declare(c.name, SymbolRole::Jet);
        coords_.push_back(std::move(c));
      }
    }
  }
  // graded order requires re-sorting: the loop above goes (order, dep, multi)
  // but emits all deps of order 0 first, then order 1, ... which is already
  // graded-lexicographic.
  for (int k = 0; k < (int)coords_.size(); ++k) {
    index_[coords_[k].sym] = k;
    if (coords_[k].dep >= 0) by_multi_[{coords_[k].dep, coords_[k].multi}] = k;
  }
}

SymbolId JetSpec::jet(int dep, std::vector<int> multi) const {
  if (dep < 0 || dep >= q_) throw JetError("dependent index out of range");
  if ((int)multi.size() > order_)
    throw JetError("jet order " + std::to_string(multi.size()) +
                   " exceeds space order " + std::to_string(order_));
  std::sort(multi.begin(), multi.end());
  for (int i : multi)
    if (i < 0 || i >= p_) throw JetError("independent index out of range");
  auto it = by_multi_.find({dep, multi});
  if (it == by_multi_.end()) throw JetError("jet coordinate not enumerated");
  return coords_[it->second].sym;
}

int JetSpec::index_of(SymbolId s) const {
  auto it = index_.find(s);
  return it == index_.end() ? -1 : it->second;
}

Expr total_derivative(const Expr& e, int i, const JetSpec& spec,
                      SymbolTable& table) {
  if (i < 0 || i >= spec.p()) throw JetError("independent index out of range");
  std::vector<Expr> terms;
  Expr dx = differentiate(e, spec.independent(i), table);
  if (!normalize(dx).is_zero()) terms.push_back(dx);
  for (const auto& c : spec.coordinates()) {
    if (c.dep < 0) continue;
    if (!depends_on(e, c.sym)) continue;
    Expr de = normalize(differentiate(e, c.sym, table));
    if (de.is_zero()) continue;
    if ((int)c.multi.size() >= spec.order())
      throw JetError("total derivative overflows jet order: needs order " +
                     std::to_string(c.multi.size() + 1));
    std::vector<int> J = c.multi;
    J.push_back(i);
    terms.push_back(de * Expr::symbol(spec.jet(c.dep, std::move(J))));
  }
  if (terms.empty()) return Expr::integer(0);
  return normalize(Expr::sum(std::move(terms)));
}

std::vector<Expr> prolong_function(const std::vector<Expr>& u,
                                   const JetSpec& spec, SymbolTable& table) {
  if ((int)u.size() != spec.q())
    throw JetError("prolong_function: wrong number of components");
  std::vector<Expr> out;
  out.reserve(spec.N());
  for (const auto& c : spec.coordinates()) {
    if (c.dep < 0) {
      out.push_back(Expr::symbol(c.sym));
      continue;
    }
    Expr e = u[c.dep];
    for (int i : c.multi) e = differentiate(e, spec.independent(i), table);
    out.push_back(normalize(e));
  }
  return out;
}

}  // namespace weaksym
