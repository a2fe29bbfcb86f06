#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace weaksym {

class OdeBlowup : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Classical fixed-step RK4 over a state vector. rhs(t, y) -> dy/dt.
/// Throws OdeBlowup when any component exceeds 1e12 in magnitude.
std::vector<double> rk4_solve(
    const std::function<std::vector<double>(double, const std::vector<double>&)>& rhs,
    std::vector<double> y0, double t0, double t1, int steps);

struct PowerLawFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_norm = 0.0;
  double span = 0.0;   // log-range of x data
  bool valid = false;  // false when any datum is non-positive
};

/// Least-squares fit of log(y) = slope*log(x) + intercept.
PowerLawFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace weaksym
