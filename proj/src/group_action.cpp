#include "weaksym/group_action.hpp"

#include <random>

#include "weaksym/rk4.hpp"

namespace weaksym {

namespace {

bool role_allowed(SymbolRole r, std::initializer_list<SymbolRole> allowed) {
  for (SymbolRole a : allowed)
    if (r == a) return true;
  return false;
}

void check_symbol_roles(const Expr& e, const SymbolTable& table,
                        std::initializer_list<SymbolRole> allowed,
                        const std::string& what) {
  for (SymbolId s : free_symbols(e)) {
    if (!role_allowed(table.role(s), allowed))
      throw GroupError(what + " may not depend on symbol " + table.name(s));
  }
}

bool is_order_zero_jet(SymbolId s, const JetSpec& spec) {
  int k = spec.index_of(s);
  return k >= 0 && spec.coordinate(k).dep >= 0 &&
         spec.coordinate(k).multi.empty();
}

void check_point_expr(const Expr& e, const JetSpec& spec,
                      const SymbolTable& table, bool allow_u, bool allow_eta,
                      const std::string& what) {
  for (SymbolId s : free_symbols(e)) {
    SymbolRole r = table.role(s);
    if (r == SymbolRole::Constant) continue;
    if (allow_eta && r == SymbolRole::GroupParam) continue;
    if (r == SymbolRole::Independent && spec.index_of(s) >= 0) continue;
    if (allow_u && is_order_zero_jet(s, spec)) continue;
    throw GroupError(what + " may not depend on symbol " + table.name(s));
  }
}

bool zero_within(const Expr& e, const SymbolTable& table, double tol) {
  Expr n = normalize(e);
  if (n.is_zero()) return true;
  std::mt19937_64 rng(0x5eed);
  return is_zero_sampled(n, table, rng, 20, tol);
}

}  // namespace

void check_projectable(const VectorField& v, const JetSpec& spec,
                       const SymbolTable& table) {
  if ((int)v.xi.size() != spec.p() || (int)v.phi.size() != spec.q())
    throw GroupError("vector field has wrong component counts");
  for (const auto& e : v.xi)
    check_point_expr(e, spec, table, false, false, "xi");
  for (const auto& e : v.phi)
    check_point_expr(e, spec, table, true, false, "phi");
  if (v.alpha || v.beta) {
    if (!v.alpha || !v.beta)
      throw GroupError("linear decomposition needs both alpha and beta");
    for (const auto& row : *v.alpha)
      for (const auto& e : row)
        check_point_expr(e, spec, table, false, false, "alpha");
    for (const auto& e : *v.beta)
      check_point_expr(e, spec, table, false, false, "beta");
    for (int a = 0; a < spec.q(); ++a) {
      Expr rec = (*v.beta)[a];
      for (int l = 0; l < spec.q(); ++l)
        rec = rec + (*v.alpha)[a][l] * Expr::symbol(spec.dependent(l));
      if (!zero_within(v.phi[a] - rec, table, 1e-10))
        throw GroupError("linear decomposition does not reproduce phi");
    }
  }
}

void validate_group_action(const GroupAction& g, const JetSpec& spec,
                           SymbolTable& table) {
  if ((int)g.Xi.size() != spec.p() || (int)g.Phi.size() != spec.q())
    throw GroupError("group action has wrong component counts");
  for (const auto& e : g.Xi)
    check_point_expr(e, spec, table, false, true, "Xi");
  for (const auto& e : g.Phi)
    check_point_expr(e, spec, table, true, true, "Phi");

  for (int i = 0; i < spec.p(); ++i) {
    Expr at0 = substitute(g.Xi[i], table.eta(), Expr::integer(0));
    if (!zero_within(at0 - Expr::symbol(spec.independent(i)), table, 1e-10))
      throw GroupError("Xi is not the identity at eta = 0");
  }
  for (int a = 0; a < spec.q(); ++a) {
    Expr at0 = substitute(g.Phi[a], table.eta(), Expr::integer(0));
    if (!zero_within(at0 - Expr::symbol(spec.dependent(a)), table, 1e-10))
      throw GroupError("Phi is not the identity at eta = 0");
  }
  if (g.linear_in_u) {
    for (int a = 0; a < spec.q(); ++a) {
      for (int l = 0; l < spec.q(); ++l) {
        Expr c = differentiate(g.Phi[a], spec.dependent(l), table);
        for (int m = 0; m < spec.q(); ++m) {
          if (!zero_within(differentiate(c, spec.dependent(m), table), table, 1e-10))
            throw GroupError("linear_in_u set but Phi is not affine in u");
        }
      }
    }
  }
}

std::vector<Expr> prolong_vector_field(const VectorField& v, const JetSpec& spec,
                                       SymbolTable& table) {
  check_projectable(v, spec, table);
  std::vector<Expr> out(spec.N(), Expr::integer(0));
  // d xi_l / dx_i, precomputed (xi depends on x only, so D_i = d/dx_i)
  std::vector<std::vector<Expr>> dxi(spec.p(),
                                     std::vector<Expr>(spec.p(), Expr()));
  for (int l = 0; l < spec.p(); ++l)
    for (int i = 0; i < spec.p(); ++i)
      dxi[l][i] = normalize(differentiate(v.xi[l], spec.independent(i), table));

  for (int k = 0; k < spec.N(); ++k) {
    const JetCoordinate& c = spec.coordinate(k);
    if (c.dep < 0) {
      out[k] = normalize(v.xi[k]);
      continue;
    }
    if (c.multi.empty()) {
      out[k] = normalize(v.phi[c.dep]);
      continue;
    }
    int i = c.multi.back();
    std::vector<int> parent(c.multi.begin(), c.multi.end() - 1);
    int pk = spec.index_of(spec.jet(c.dep, parent));
    Expr acc = total_derivative(out[pk], i, spec, table);
    for (int l = 0; l < spec.p(); ++l) {
      if (dxi[l][i].is_zero()) continue;
      std::vector<int> J = parent;
      J.push_back(l);
      acc = acc - dxi[l][i] * Expr::symbol(spec.jet(c.dep, std::move(J)));
    }
    out[k] = normalize(acc);
  }
  return out;
}

std::vector<std::vector<Expr>> adjugate_inverse(
    const std::vector<std::vector<Expr>>& m) {
  int p = (int)m.size();
  if (p < 1 || p > 3) throw GroupError("symbolic inverse supports p <= 3 only");
  Expr det;
  if (p == 1) {
    det = m[0][0];
  } else if (p == 2) {
    det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  } else {
    det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
          m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
          m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  }
  det = normalize(det);
  if (det.is_zero()) throw GroupError("Jacobian is singular");

  std::vector<std::vector<Expr>> inv(p, std::vector<Expr>(p, Expr()));
  if (p == 1) {
    inv[0][0] = normalize(Expr::integer(1) / det);
    return inv;
  }
  if (p == 2) {
    inv[0][0] = normalize(m[1][1] / det);
    inv[0][1] = normalize(-m[0][1] / det);
    inv[1][0] = normalize(-m[1][0] / det);
    inv[1][1] = normalize(m[0][0] / det);
    return inv;
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      int r0 = (j + 1) % 3, r1 = (j + 2) % 3;
      int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      // cofactor expansion written so that inv = adj(m)/det directly
      Expr cof = m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
      inv[i][j] = normalize(cof / det);
    }
  }
  return inv;
}

ProlongedAction prolong_group_action(const GroupAction& g, const JetSpec& spec,
                                     SymbolTable& table) {
  validate_group_action(g, spec, table);
  if (spec.order() > 1 && !g.linear_in_u)
    throw GroupError(
        "prolongation above first order requires a linear-in-u action");

  ProlongedAction out;
  out.zbar.assign(spec.N(), Expr::integer(0));

  std::vector<std::vector<Expr>> jac(spec.p(),
                                     std::vector<Expr>(spec.p(), Expr()));
  for (int i = 0; i < spec.p(); ++i)
    for (int j = 0; j < spec.p(); ++j)
      jac[i][j] = normalize(differentiate(g.Xi[i], spec.independent(j), table));
  auto K = adjugate_inverse(jac);  // K[j][i] = (J Xi)^{-1}_{ji}

  for (int k = 0; k < spec.N(); ++k) {
    const JetCoordinate& c = spec.coordinate(k);
    if (c.dep < 0) {
      out.zbar[k] = normalize(g.Xi[k]);
      continue;
    }
    if (c.multi.empty()) {
      out.zbar[k] = normalize(g.Phi[c.dep]);
      continue;
    }
    int i = c.multi.back();
    std::vector<int> parent(c.multi.begin(), c.multi.end() - 1);
    int pk = spec.index_of(spec.jet(c.dep, parent));
    Expr acc = Expr::integer(0);
    for (int j = 0; j < spec.p(); ++j) {
      Expr dj = total_derivative(out.zbar[pk], j, spec, table);
      if (dj.is_zero()) continue;
      acc = acc + dj * K[j][i];
    }
    out.zbar[k] = normalize(acc);
  }

  if (g.linear_in_u) {
    int m = spec.N() - spec.p();
    BTable bt;
    bt.b.assign(m, std::vector<Expr>(m, Expr::integer(0)));
    bt.b0.assign(m, Expr::integer(0));
    for (int k = 0; k < m; ++k) {
      Expr rest = out.zbar[spec.p() + k];
      for (int l = 0; l < m; ++l) {
        SymbolId zl = spec.coordinate(spec.p() + l).sym;
        Expr coeff = normalize(differentiate(rest, zl, table));
        for (SymbolId s : free_symbols(coeff)) {
          if (spec.is_jet_symbol(s))
            throw GroupError("prolonged action is not affine in jets");
        }
        bt.b[k][l] = coeff;
      }
      for (int l = 0; l < m; ++l)
        rest = rest - bt.b[k][l] * Expr::symbol(spec.coordinate(spec.p() + l).sym);
      bt.b0[k] = normalize(rest);
      for (SymbolId s : free_symbols(bt.b0[k])) {
        if (spec.is_jet_symbol(s))
          throw GroupError("prolonged action is not affine in jets");
      }
    }
    out.b = std::move(bt);
  }
  return out;
}

std::vector<double> flow(const VectorField& v, double eta,
                         const std::vector<double>& start, const JetSpec& spec,
                         const SymbolTable& table) {
  check_projectable(v, spec, table);
  int dim = spec.p() + spec.q();
  if ((int)start.size() != dim) throw GroupError("flow: wrong point dimension");
  std::vector<SymbolId> vars(dim);
  for (int i = 0; i < spec.p(); ++i) vars[i] = spec.independent(i);
  for (int a = 0; a < spec.q(); ++a) vars[spec.p() + a] = spec.dependent(a);

  auto rhs = [&](double, const std::vector<double>& y) {
    Bindings b;
    for (int i = 0; i < dim; ++i) b.set(vars[i], y[i]);
    std::vector<double> dy(dim);
    for (int i = 0; i < spec.p(); ++i) dy[i] = evaluate(v.xi[i], b, table);
    for (int a = 0; a < spec.q(); ++a)
      dy[spec.p() + a] = evaluate(v.phi[a], b, table);
    return dy;
  };
  if (eta == 0.0) return start;
  return rk4_solve(rhs, start, 0.0, eta, 1024);
}

}  // namespace weaksym
