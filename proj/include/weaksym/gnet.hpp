#pragma once

#include "weaksym/group_action.hpp"
#include "weaksym/mollifier.hpp"

namespace weaksym {

class NetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// eps-parametrized representative net: q expressions in the independent
/// variables and eps. Derivatives are always taken symbolically.
struct GNet {
  std::vector<Expr> u;
  std::vector<std::pair<double, double>> domain;  // box in x
  bool claims_bounded = false;
  // Optional internal-layer location: expression in x whose zero set marks
  // the steep region (width ~ eps), used as a quadrature hint.
  std::optional<Expr> layer;
};

/// Smoothed step: prim((shift)/eps) where prim is the mollifier primitive.
GNet embed_heaviside(const Mollifier& m, const Expr& shift,
                     const SymbolTable& table);

/// Mollified delta: (1/eps) theta(shift/eps).
GNet embed_delta(const Mollifier& m, const Expr& shift,
                 const SymbolTable& table);

/// Transform a net by a projectable group action at parameter value eta:
///   x -> Phi_eta(Xi_eta^{-1}(x), u(Xi_eta^{-1}(x))).
/// The inverse of Xi_eta is Xi_{-eta} by the one-parameter group law; this is
/// validated numerically on the domain box before use.
GNet apply_group(const GNet& net, const GroupAction& g, double eta,
                 const JetSpec& spec, SymbolTable& table);

enum class GrowthVerdict { Bounded, Moderate, NegligibleCandidate };

struct GrowthFit {
  double p = 0.0;        // sup |d^a u_eps| = O(eps^-p)
  double intercept = 0.0;
  GrowthVerdict verdict = GrowthVerdict::Moderate;
  std::vector<double> sups;
};

/// Fit the growth exponent of sup_K |d^alpha u_eps| against the eps grid.
/// alpha is a multi-index over the independent variables; component selects
/// the net component. The sup is taken over a 200-point-per-dimension lattice
/// with one refinement pass around the maximizing cell.
GrowthFit growth_exponent(const GNet& net, int component,
                          const std::vector<int>& alpha, const JetSpec& spec,
                          const std::vector<double>& grid, SymbolTable& table);

/// Default eps grid 2^-j, j = 3..12 (decreasing).
std::vector<double> default_eps_grid();

}  // namespace weaksym
