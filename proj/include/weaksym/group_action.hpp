#pragma once

#include <optional>

#include "weaksym/jet.hpp"

namespace weaksym {

class GroupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Infinitesimal generator xi_i d/dx_i + phi_a d/du_a. Projectable: xi may
/// depend on x only.
struct VectorField {
  std::vector<Expr> xi;   // p components in x
  std::vector<Expr> phi;  // q components in (x, u)
  // Optional decomposition phi = alpha*u + beta with alpha, beta in x.
  std::optional<std::vector<std::vector<Expr>>> alpha;  // q x q
  std::optional<std::vector<Expr>> beta;                // q
};

/// One-parameter group of point transformations
///   x~ = Xi(eta, x),  u~ = Phi(eta, x, u)
/// restricted to projectable actions.
struct GroupAction {
  std::vector<Expr> Xi;   // p components in (eta, x)
  std::vector<Expr> Phi;  // q components in (eta, x, u)
  double eta_max = 1.0;   // valid parameter range (-eta_max, eta_max)
  bool linear_in_u = false;
  bool slowly_increasing = false;
  std::vector<std::pair<double, double>> domain;  // optional box in x
};

/// Coefficient table of a prolonged linear action,
///   zbar_k = sum_l b[k][l] z_l + b0[k]
/// indexed over derivative coordinates only (coordinate index k+p in the
/// enumeration); entries are expressions in (eta, x).
struct BTable {
  std::vector<std::vector<Expr>> b;
  std::vector<Expr> b0;
};

/// Prolonged group action: one expression per coordinate of the jet space,
/// aligned with JetSpec::coordinates(). For linear-in-u actions the affine
/// coefficient table is extracted as well.
struct ProlongedAction {
  std::vector<Expr> zbar;
  std::optional<BTable> b;
};

/// Check xi depends only on x and constants; throws GroupError otherwise.
void check_projectable(const VectorField& v, const JetSpec& spec,
                       const SymbolTable& table);

/// Identity at eta = 0 and projectability; numeric fallback at tol 1e-10 when
/// the symbolic check after eta -> 0 does not normalize to the identity.
void validate_group_action(const GroupAction& g, const JetSpec& spec,
                           SymbolTable& table);

/// Prolonged coefficients of v for every coordinate of the space, via the
/// recursion  Phi^{J,i} = D_i Phi^J - sum_l (d xi_l / dx_i) u^a_{J,l}.
/// The first p entries are the xi_i themselves.
std::vector<Expr> prolong_vector_field(const VectorField& v, const JetSpec& spec,
                                       SymbolTable& table);

/// Prolong a group action. First order is available for any projectable
/// action through the Jacobian-inverse chain rule; orders above one require
/// the linear_in_u flag. Symbolic Jacobian inversion supports p <= 3.
ProlongedAction prolong_group_action(const GroupAction& g, const JetSpec& spec,
                                     SymbolTable& table);

/// Numeric flow of v: exponentiate the generator from the given (x, u) point
/// with fixed-step RK4, step eta/1024. Throws OdeBlowup on escape.
std::vector<double> flow(const VectorField& v, double eta,
                         const std::vector<double>& start, const JetSpec& spec,
                         const SymbolTable& table);

/// Symbolic p x p matrix inverse by the adjugate formula, p <= 3.
/// Throws GroupError when the determinant normalizes to zero.
std::vector<std::vector<Expr>> adjugate_inverse(
    const std::vector<std::vector<Expr>>& m);

}  // namespace weaksym
