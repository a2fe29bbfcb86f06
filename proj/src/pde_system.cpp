#include "weaksym/pde_system.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "weaksym/group_action.hpp"

namespace weaksym {

namespace {

bool zero_sampled(const Expr& e, const SymbolTable& table) {
  Expr n = normalize(e);
  if (n.is_zero()) return true;
  std::mt19937_64 rng(0x5eedf00d);
  return is_zero_sampled(n, table, rng, 20, 1e-9);
}

bool depends_only_on_roles(const Expr& e, const SymbolTable& table,
                           const JetSpec& spec, bool allow_u) {
  for (SymbolId s : free_symbols(e)) {
    SymbolRole r = table.role(s);
    if (r == SymbolRole::Constant) continue;
    if (r == SymbolRole::Independent) continue;
    int k = spec.index_of(s);
    if (allow_u && k >= 0 && spec.coordinate(k).dep >= 0 &&
        spec.coordinate(k).multi.empty())
      continue;
    return false;
  }
  return true;
}

// Affine in the given symbols with coefficients independent of them:
// fills coeffs and remainder, returns false when not affine.
bool affine_decompose(const Expr& e, const std::vector<SymbolId>& syms,
                      SymbolTable& table, std::vector<Expr>& coeffs,
                      Expr& remainder) {
  coeffs.clear();
  Expr rest = e;
  for (SymbolId s : syms) {
    Expr c = normalize(differentiate(e, s, table));
    for (SymbolId t : syms)
      if (depends_on(c, t)) return false;
    coeffs.push_back(c);
    rest = rest - c * Expr::symbol(s);
  }
  remainder = normalize(rest);
  for (SymbolId t : syms)
    if (depends_on(remainder, t)) return false;
  return true;
}

SystemClass classify(const JetSpec& spec, const std::vector<Expr>& delta,
                     SymbolTable& table) {
  std::vector<SymbolId> all_jets, deriv_jets, u_syms;
  for (const auto& c : spec.coordinates()) {
    if (c.dep < 0) continue;
    all_jets.push_back(c.sym);
    if (c.multi.empty())
      u_syms.push_back(c.sym);
    else
      deriv_jets.push_back(c.sym);
  }

  bool linear = true;
  for (const auto& d : delta) {
    std::vector<Expr> coeffs;
    Expr rem;
    if (!affine_decompose(d, all_jets, table, coeffs, rem)) {
      linear = false;
      break;
    }
    for (const auto& c : coeffs)
      if (!depends_only_on_roles(c, table, spec, false)) linear = false;
    if (!depends_only_on_roles(rem, table, spec, false)) linear = false;
    if (!linear) break;
  }
  if (linear) return SystemClass::Linear;

  bool semilinear = true;
  for (const auto& d : delta) {
    std::vector<Expr> coeffs;
    Expr rem;
    if (!affine_decompose(d, deriv_jets, table, coeffs, rem)) {
      semilinear = false;
      break;
    }
    for (const auto& c : coeffs)
      if (!depends_only_on_roles(c, table, spec, false)) semilinear = false;
    if (!depends_only_on_roles(rem, table, spec, true)) semilinear = false;
    if (!semilinear) break;
  }
  if (semilinear) return SystemClass::Semilinear;

  if (spec.p() == 2 && (int)delta.size() == spec.q() && spec.order() >= 1) {
    bool quasi = true;
    for (int i = 0; i < (int)delta.size() && quasi; ++i) {
      Expr d = delta[i];
      for (int j = 0; j < spec.q() && quasi; ++j) {
        SymbolId ujt = spec.jet(j, {1});
        Expr ct = normalize(differentiate(d, ujt, table));
        if (!zero_sampled(ct - Expr::integer(j == i ? 1 : 0), table))
          quasi = false;
        SymbolId ujx = spec.jet(j, {0});
        Expr a = normalize(differentiate(d, ujx, table));
        // A may depend on u only
        for (SymbolId s : free_symbols(a)) {
          int k = spec.index_of(s);
          bool is_u = k >= 0 && spec.coordinate(k).dep >= 0 &&
                      spec.coordinate(k).multi.empty();
          if (!is_u && table.role(s) != SymbolRole::Constant) quasi = false;
        }
        d = d - a * Expr::symbol(ujx);
      }
      if (quasi) {
        d = d - Expr::symbol(spec.jet(i, {1}));
        if (!zero_sampled(d, table)) quasi = false;
      }
    }
    if (quasi) return SystemClass::Quasilinear;
  }
  return SystemClass::General;
}

}  // namespace

const char* system_class_name(SystemClass c) {
  switch (c) {
    case SystemClass::Linear: return "linear";
    case SystemClass::Semilinear: return "semilinear";
    case SystemClass::Quasilinear: return "quasilinear";
    case SystemClass::General: return "general";
  }
  return "general";
}

PDESystem build_pde_system(const JetSpec& spec, std::vector<Expr> delta,
                           std::vector<int> solved, SymbolTable& table) {
  PDESystem sys{spec, std::move(delta), std::move(solved)};
  if (sys.delta.empty()) throw SystemError("empty system");
  if (sys.solved.size() != sys.delta.size())
    throw SystemError("need one solved coordinate per equation");
  std::sort(sys.solved.begin(), sys.solved.end());
  for (size_t i = 1; i < sys.solved.size(); ++i)
    if (sys.solved[i] == sys.solved[i - 1])
      throw SystemError("duplicate solved coordinate");
  for (int k : sys.solved) {
    if (k < spec.p() || k >= spec.N())
      throw SystemError("solved index must name a jet coordinate");
  }
  for (auto& d : sys.delta) d = normalize(d);
  sys.cls = classify(sys.spec, sys.delta, table);
  return sys;
}

SolvedForm build_solved_form(const PDESystem& sys, SymbolTable& table) {
  int s = sys.s();
  if (s > 3) throw SystemError("symbolic solved form supports s <= 3");
  SolvedForm sf;
  sf.solved = sys.solved;
  sf.A.assign(s, std::vector<Expr>(s, Expr()));
  std::vector<SymbolId> zsym(s);
  for (int j = 0; j < s; ++j) zsym[j] = sys.spec.coordinate(sys.solved[j]).sym;
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j)
      sf.A[i][j] = normalize(differentiate(sys.delta[i], zsym[j], table));

  sf.affine_in_solved = true;
  for (const auto& row : sf.A)
    for (const auto& a : row)
      for (SymbolId z : zsym)
        if (depends_on(a, z)) sf.affine_in_solved = false;

  if (s == 1) {
    sf.det = sf.A[0][0];
  } else if (s == 2) {
    sf.det = normalize(sf.A[0][0] * sf.A[1][1] - sf.A[0][1] * sf.A[1][0]);
  } else {
    sf.det = normalize(
        sf.A[0][0] * (sf.A[1][1] * sf.A[2][2] - sf.A[1][2] * sf.A[2][1]) -
        sf.A[0][1] * (sf.A[1][0] * sf.A[2][2] - sf.A[1][2] * sf.A[2][0]) +
        sf.A[0][2] * (sf.A[1][0] * sf.A[2][1] - sf.A[1][1] * sf.A[2][0]));
  }
  if (sf.det.is_zero())
    throw SystemError("solved-block Jacobian determinant is identically zero");

  std::vector<std::pair<SymbolId, Expr>> zero_map;
  for (SymbolId z : zsym) zero_map.push_back({z, Expr::integer(0)});
  for (int i = 0; i < s; ++i)
    sf.rhs0.push_back(normalize(substitute(sys.delta[i], zero_map)));

  for (int i = 0; i < s; ++i) {
    std::string wn = "y_" + sys.spec.coordinate(sys.solved[i]).name;
    if (auto id = table.lookup(wn))
      sf.w.push_back(*id);
    else
      sf.w.push_back(table.declare(wn, SymbolRole::Constant));
  }

  if (sf.affine_in_solved) {
    auto inv = adjugate_inverse(sf.A);
    sf.Ainv = inv;
    for (int i = 0; i < s; ++i) {
      Expr acc = Expr::integer(0);
      for (int j = 0; j < s; ++j)
        acc = acc + inv[i][j] * (Expr::symbol(sf.w[j]) - sf.rhs0[j]);
      sf.inverse.push_back(normalize(acc));
    }
  }
  return sf;
}

std::vector<double> SolvedForm::invert(Bindings b,
                                       const std::vector<double>& ypp,
                                       const PDESystem& sys,
                                       const SymbolTable& table) const {
  int s = (int)solved.size();
  std::vector<SymbolId> zsym(s);
  for (int j = 0; j < s; ++j) zsym[j] = sys.spec.coordinate(solved[j]).sym;

  auto solve_affine = [&](Bindings bb) {
    Eigen::MatrixXd M(s, s);
    Eigen::VectorXd r(s);
    for (int j = 0; j < s; ++j) bb.set(zsym[j], 0.0);
    for (int i = 0; i < s; ++i) {
      for (int j = 0; j < s; ++j) M(i, j) = evaluate(A[i][j], bb, table);
      r(i) = ypp[i] - evaluate(rhs0[i], bb, table);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible())
      throw SystemError("singular solved-block Jacobian at sample");
    Eigen::VectorXd x = lu.solve(r);
    return std::vector<double>(x.data(), x.data() + s);
  };

  std::vector<double> z = solve_affine(b);
  if (affine_in_solved) return z;

  for (int iter = 0; iter < 20; ++iter) {
    Bindings bb = b;
    for (int j = 0; j < s; ++j) bb.set(zsym[j], z[j]);
    Eigen::VectorXd f(s);
    Eigen::MatrixXd J(s, s);
    double maxres = 0.0;
    for (int i = 0; i < s; ++i) {
      f(i) = evaluate(sys.delta[i], bb, table) - ypp[i];
      maxres = std::max(maxres, std::fabs(f(i)));
      for (int j = 0; j < s; ++j) J(i, j) = evaluate(A[i][j], bb, table);
    }
    if (maxres <= 1e-12) return z;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
    if (!lu.isInvertible())
      throw SystemError("singular Jacobian during Newton inversion");
    Eigen::VectorXd dz = lu.solve(f);
    for (int j = 0; j < s; ++j) z[j] -= dz(j);
  }
  Bindings bb = b;
  for (int j = 0; j < s; ++j) bb.set(zsym[j], z[j]);
  for (int i = 0; i < s; ++i) {
    if (std::fabs(evaluate(sys.delta[i], bb, table) - ypp[i]) > 1e-9)
      throw SystemError("Newton inversion did not converge");
  }
  return z;
}

double solved_form_roundtrip(const SolvedForm& sf, const PDESystem& sys,
                             const SymbolTable& table, std::mt19937_64& rng,
                             int samples) {
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  int s = sys.s();
  double worst = 0.0;
  int done = 0, attempts = 0;
  while (done < samples && attempts < samples * 20) {
    ++attempts;
    Bindings b;
    std::vector<double> zs(s);
    for (const auto& c : sys.spec.coordinates()) b.set(c.sym, dist(rng));
    try {
      std::vector<double> ypp(s);
      for (int i = 0; i < s; ++i) ypp[i] = evaluate(sys.delta[i], b, table);
      for (int j = 0; j < s; ++j)
        zs[j] = b.get(sys.spec.coordinate(sf.solved[j]).sym);
      auto back = sf.invert(b, ypp, sys, table);
      for (int j = 0; j < s; ++j)
        worst = std::max(worst, std::fabs(back[j] - zs[j]));
      ++done;
    } catch (const EvalError&) {
      continue;
    }
  }
  if (done < samples) throw SystemError("round trip sampling failed");
  return worst;
}

}  // namespace weaksym
