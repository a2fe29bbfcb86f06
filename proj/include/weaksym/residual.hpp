#pragma once

#include "weaksym/gnet.hpp"
#include "weaksym/pde_system.hpp"

namespace weaksym {

/// Bounded family of test functions s^k psi0((x-a)/s) built from the base
/// bump psi0(x) = exp(-1/(1-|x|^2)) (multidimensional, via |x|^2). The s^k
/// prefactor keeps all derivatives up to order k uniformly bounded.
struct ProbeFamily {
  int k = 1;
  std::vector<Expr> members;
};

/// Register the scalar bump w -> exp(-1/(1-w)) (zero for w >= 1) under the
/// name "bump2" if not yet present, and return psi0-type probes.
/// centers_per_axis x dilations {1, 1/2, 1/4} scaled into the box.
ProbeFamily make_probe_family(const std::vector<std::pair<double, double>>& box,
                              int k, const JetSpec& spec, SymbolTable& table,
                              int centers = 5);

/// Single normalized bump in the independent variables with unit mass over
/// the box (for probes that must have integral one).
Expr unit_mass_probe(const std::vector<std::pair<double, double>>& box,
                     const JetSpec& spec, SymbolTable& table);

enum class Verdict {
  ConvergesToZero,
  ConvergesToNonzero,
  Diverges,
  Inconclusive,
};

const char* verdict_name(Verdict v);

struct ResidualCurve {
  std::vector<double> epsilons;                 // strictly decreasing
  std::vector<std::vector<double>> residuals;   // [equation][grid index]
  std::vector<double> slopes;                   // fitted on the last half
  std::vector<Verdict> verdicts;
  std::vector<double> limit_estimates;          // NaN unless nonzero verdict
  bool quadrature_trouble = false;
};

/// r_i(eps) = integral of Delta_i(x, pr u_eps(x)) * phi(x) over the net's
/// domain box, with layer-aware adaptive quadrature; verdict per equation
/// from the fitted log-log slope and Richardson extrapolation.
ResidualCurve weak_residual_curve(const PDESystem& sys, const GNet& net,
                                  const Expr& phi,
                                  const std::vector<double>& grid,
                                  SymbolTable& table);

/// Sup over the probe family of |r_i(eps)| per equation. A finite family is a
/// necessary-condition probe for k-strong association, not a proof.
ResidualCurve strong_association_check(const PDESystem& sys, const GNet& net,
                                       const ProbeFamily& family,
                                       const std::vector<double>& grid,
                                       SymbolTable& table);

/// Verdict logic shared by the curve builders (exposed for testing):
/// slope fit on the last half; converges-to-zero iff slope >= 0.5 and
/// |r(eps_min)| <= 10 eps_min^0.5 max|r|; diverges iff slope <= -0.5;
/// otherwise Richardson limit, inconclusive when the two half-grid estimates
/// disagree by more than 20%.
void classify_curve(const std::vector<double>& eps,
                    const std::vector<double>& r, double& slope,
                    Verdict& verdict, double& limit);

}  // namespace weaksym
