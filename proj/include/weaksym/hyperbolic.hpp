#pragma once

#include <array>
#include <optional>

#include "weaksym/expr_ops.hpp"

namespace weaksym {

class HyperbolicError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Plain symbols of the 2x2 first-order system u_t + A(u,v) u_x = 0; the
/// coefficient matrix lives on (u, v) and the candidates on (x, t, u, v).
struct HypVars {
  SymbolId x, t, u, v;
};

/// lambda_1 < lambda_2 with right/left eigenvectors, normalized l_i.r_i = 1.
struct CharacteristicFields {
  std::vector<Expr> lambda;             // 2 entries
  std::vector<std::vector<Expr>> r, l;  // r[i], l[i]: 2-vectors
  double gap = 0.0;                     // min sampled lambda_2 - lambda_1
  double defect = 0.0;                  // max sampled eigen-equation residual
};

/// Closed-form 2x2 eigenpairs via the characteristic polynomial; strict
/// hyperbolicity (positive discriminant and gap) is checked on samples from
/// the (u, v) box. Throws HyperbolicError when the discriminant is not
/// positive at a sample.
CharacteristicFields characteristic_fields(
    const std::vector<std::vector<Expr>>& A, HypVars vars,
    const std::vector<std::pair<double, double>>& uv_box, SymbolTable& table,
    int samples = 100, uint64_t seed = 0xeefull);

/// Symmetry candidate xi(x,t) dx + tau(x,t) dt + phi dU + psi dV, optionally
/// with the characteristic decomposition data alpha_i (scalars, phi/psi =
/// sum alpha_i r_i) and beta_i (2-vectors, M = sum beta_i l_i^T).
struct HyperbolicCandidate {
  Expr xi, tau, phi, psi;
  std::optional<std::array<Expr, 2>> alpha;
  std::optional<std::array<std::array<Expr, 2>, 2>> beta;  // beta[i] = (b1,b2)
};

struct HyperbolicReport {
  double res_first = 0.0;   // (phi_t,psi_t) + A (phi_x,psi_x)
  double res_second = 0.0;  // [A,B] + phi A_u + psi A_v - (xi I - tau A)_t
                            //   - (xi I - tau A)_x A
  double res_M = 0.0;       // M_t + M_x A with M = B + xi_x I - tau_x A
  std::optional<std::array<double, 4>> res_relations;
};

/// Max sampled residual of each determining equation over the given box in
/// (x, t, u, v); the four left/right-eigenvector relations are evaluated only
/// when alpha and beta are supplied.
HyperbolicReport verify_hyperbolic_reduction(
    const std::vector<std::vector<Expr>>& A, const HyperbolicCandidate& cand,
    HypVars vars, const std::vector<std::pair<double, double>>& box,
    SymbolTable& table, int samples = 100, uint64_t seed = 0xbeefull);

}  // namespace weaksym
