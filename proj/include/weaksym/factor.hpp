#pragma once

#include "weaksym/group_action.hpp"
#include "weaksym/pde_system.hpp"
#include "weaksym/residual.hpp"

namespace weaksym {

class FactorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DependenceClass { EtaX, EtaXU, FullJet };

const char* dependence_class_name(DependenceClass d);

/// s x s factor matrix Q with Delta(pr g_eta(z)) = Q(eta, z) Delta(z).
/// Entries are expressions in (eta, z); when the tau-integrand was not
/// polynomial they still contain tau and must be integrated numerically
/// through factor_entry_value.
struct FactorMatrix {
  std::vector<std::vector<Expr>> entries;
  bool tau_integrated = true;
  DependenceClass dep = DependenceClass::FullJet;
  double eta_max = 1.0;
};

/// Free-symbol scan of the entries against the jet space, ignoring eta/tau
/// and non-coordinate constants.
DependenceClass classify_dependence(const std::vector<std::vector<Expr>>& m,
                                    const JetSpec& spec,
                                    const SymbolTable& table);

/// Q(eta,z) = int_0^1 J_solved(f_eta o Delta~^{-1})(z', tau Delta(z)) dtau
/// with f_eta = Delta o pr g_eta. Requires the system affine in its solved
/// coordinates. Polynomial tau-dependence (detected structurally, degree
/// <= 8) is integrated termwise exactly; otherwise tau is kept and
/// factor_entry_value integrates with Gauss-Legendre order 32.
/// Q(0, z) = identity is checked numerically at samples (tol 1e-10).
FactorMatrix compute_factor_Q(const PDESystem& sys, const GroupAction& g,
                              SymbolTable& table);

/// Entry value at a point; b must bind eta and every coordinate the entry
/// uses. Integrates over tau when needed.
double factor_entry_value(const FactorMatrix& Q, int i, int j,
                          const Bindings& b, const SymbolTable& table);

struct FactorCheck {
  double max_residual = 0.0;        // pointwise |Delta(pr g z) - Q Delta(z)|
  double functional_residual = 0.0; // same along a random polynomial section
  int rejected = 0;                 // samples outside the action domain
};

/// Random jets from [-2,2]^N and eta in [-eta_range, eta_range];
/// non-finite evaluations are resampled and counted.
FactorCheck verify_factorization(const PDESystem& sys, const GroupAction& g,
                                 const FactorMatrix& Q, int samples,
                                 double eta_range, SymbolTable& table,
                                 uint64_t seed = 0xfac70ull);

/// Solve pr v(Delta) = Qtilde Delta for Qtilde by collecting the solved
/// coordinates; throws FactorError (with the sampled witness magnitude) when
/// the remainder does not vanish identically, i.e. v is not a factorizable
/// symmetry candidate.
std::vector<std::vector<Expr>> infinitesimal_factor(const PDESystem& sys,
                                                    const VectorField& v,
                                                    SymbolTable& table);

/// Coefficients of pr v(Delta) - Qtilde Delta collected by monomials in the
/// non-solved derivative coordinates; their vanishing is the determining
/// system for v. Entries come back normalized with semantically zero ones
/// dropped.
std::vector<Expr> determining_equations(const PDESystem& sys,
                                        const VectorField& v,
                                        SymbolTable& table);

/// RK4 integration of dQ/deta = Qtilde(pr g_eta(z)) Q, Q(0) = I, along the
/// prolonged action evaluated at the fixed jet z; step eta/1024.
std::vector<std::vector<double>> principal_matrix_from_Qtilde(
    const std::vector<std::vector<Expr>>& Qtilde, const GroupAction& g,
    const Bindings& z, double eta, const PDESystem& sys, SymbolTable& table);

struct GrowthA3 {
  double C = 0.0;
  double r = 0.0;
  bool violated = false;
  std::vector<double> witness;  // coordinate values where det vanished
};

/// Samples |det J_solved(Delta)| over x in xbox and derivative coordinates in
/// jet_range, fits the lower envelope against prod(1+|z_k|) on log-log axes
/// and reports (C, r); a vanishing determinant sample is returned as a
/// violation witness instead.
GrowthA3 check_growth_a3(const PDESystem& sys,
                         const std::vector<std::pair<double, double>>& xbox,
                         std::pair<double, double> jet_range, int samples,
                         SymbolTable& table, uint64_t seed = 0xa3ull);

/// Ku - beta with K = xi.D - alpha as expressions over first-order jets.
/// Requires the linear decomposition (alpha, beta) on v.
std::vector<Expr> invariance_residual_exprs(const VectorField& v,
                                            const JetSpec& spec,
                                            SymbolTable& table);

/// Max sampled |Ku - beta| for explicit smooth u(x); 0 without sampling when
/// every component normalizes to zero symbolically.
double invariance_check_smooth(const VectorField& v,
                               const std::vector<Expr>& u, const JetSpec& spec,
                               SymbolTable& table, int samples = 50,
                               uint64_t seed = 0x1417ull);

/// Weak residual curve of the auxiliary system Delta = Ku - beta on a net.
ResidualCurve invariance_check_net(const VectorField& v, const GNet& net,
                                   const Expr& phi,
                                   const std::vector<double>& grid,
                                   const JetSpec& spec, SymbolTable& table);

}  // namespace weaksym
