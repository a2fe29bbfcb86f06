#pragma once

#include "weaksym/expr_ops.hpp"

namespace weaksym {

class MollifierError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Nonnegative bump with unit mass and compact support [-radius, radius],
/// registered as opaque functions:
///   theta_name    the mollifier itself, with exact symbolic derivatives
///   prim_name     its primitive, normalized so prim(-radius) = 0; the
///                 derivative rule of prim is theta.
/// The primitive is evaluated from a 512-node Chebyshev interpolant.
struct Mollifier {
  std::string theta_name;
  std::string prim_name;
  double radius = 1.0;

  Expr theta(const Expr& arg) const { return Expr::opaque(theta_name, {arg}); }
  Expr primitive(const Expr& arg) const { return Expr::opaque(prim_name, {arg}); }
};

/// Build a mollifier from the standard bump exp(-1/(1-y^2)) raised to the
/// given power (power >= 1), normalized to unit mass. Distinct powers give
/// distinct admissible mollifiers. Names are derived from `name`.
Mollifier make_bump_mollifier(SymbolTable& table, const std::string& name,
                              int power = 1);

/// Certificate checks: unit mass, nonnegativity on samples, primitive
/// endpoint values. Throws MollifierError on violation.
void check_mollifier(const Mollifier& m, const SymbolTable& table);

/// sup |theta| over the support, on a fine grid.
double mollifier_sup(const Mollifier& m, const SymbolTable& table);

}  // namespace weaksym
