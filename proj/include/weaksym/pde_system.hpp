#pragma once

#include "weaksym/jet.hpp"

namespace weaksym {

class SystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SystemClass { Linear, Semilinear, Quasilinear, General };

const char* system_class_name(SystemClass c);

/// System of s differential expressions Delta_i over a jet space, with the
/// solved coordinate indices k_1 < ... < k_s (0-based positions in the
/// coordinate enumeration, all past the independent variables).
struct PDESystem {
  JetSpec spec;
  std::vector<Expr> delta;
  std::vector<int> solved;
  SystemClass cls = SystemClass::General;

  int s() const { return (int)delta.size(); }
};

/// Classify structurally and validate the solved indices.
/// Linear:      Delta_i = sum a^i_k(x) z_k + a0^i(x) over all jet coordinates.
/// Semilinear:  affine in derivative coordinates with x-coefficients, zero
///              order part may depend on (x, u). Sign convention: the zero
///              order part is Lu - F.
/// Quasilinear: Delta_i = u^i_t + sum_j A_ij(u) u^j_x on two independent
///              variables (x, t) declared in that order.
PDESystem build_pde_system(const JetSpec& spec, std::vector<Expr> delta,
                           std::vector<int> solved, SymbolTable& table);

/// Solved form: Delta~(z) = (z', Delta(z)) with z' the non-solved
/// coordinates. When Delta is affine in the solved block the inverse is
/// closed-form through the adjugate of A'' = d Delta / d z_solved; otherwise
/// inversion is per-point Newton.
struct SolvedForm {
  std::vector<int> solved;
  bool affine_in_solved = false;
  Expr det;                            // det A''
  std::vector<std::vector<Expr>> A;    // A''_ij = dDelta_i/dz_{k_j}
  std::vector<std::vector<Expr>> Ainv; // symbolic inverse (affine case, s<=3)
  std::vector<Expr> rhs0;              // Delta with solved coordinates at 0
  std::vector<SymbolId> w;             // symbols for the last s slots of y
  std::vector<Expr> inverse;           // z_{k_i} as Expr in (z', w), affine case

  /// Numeric inversion: given values for all non-solved coordinates in b and
  /// target values y'' for Delta, returns the solved coordinate values.
  /// Affine case solves directly; otherwise Newton (20 iterations, 1e-12)
  /// seeded from the affine approximation. Throws SystemError on failure.
  std::vector<double> invert(Bindings b, const std::vector<double>& ypp,
                             const PDESystem& sys,
                             const SymbolTable& table) const;
};

SolvedForm build_solved_form(const PDESystem& sys, SymbolTable& table);

/// Round-trip |inverse(Delta~(z)) - z_solved| at random sample jets.
double solved_form_roundtrip(const SolvedForm& sf, const PDESystem& sys,
                             const SymbolTable& table, std::mt19937_64& rng,
                             int samples = 50);

}  // namespace weaksym
