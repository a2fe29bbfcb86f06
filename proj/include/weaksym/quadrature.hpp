#pragma once

#include <functional>
#include <vector>

namespace weaksym {

struct QuadratureSpec {
  int panel_order = 16;
  double tolerance = 1e-10;
  int max_panels = 1 << 14;
  std::vector<double> layer_points;  // abscissae forcing initial splits
  double layer_width = 0.0;          // half width of the forced fine panels
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = false;
  int panels_used = 0;
};

/// Gauss-Legendre nodes/weights on [-1,1], computed once per order.
const std::vector<double>& gauss_nodes(int order);
const std::vector<double>& gauss_weights(int order);

/// Adaptive Gauss-Legendre panel integration on [a,b].
QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, const QuadratureSpec& spec = {});

/// Iterated 2D integration over [ax,bx] x [ay,by]. The optional layer hint is
/// a curve x = curve(y) near which the inner integral is split at scale
/// layer_width.
QuadratureResult integrate2d(const std::function<double(double, double)>& f,
                             double ax, double bx, double ay, double by,
                             const QuadratureSpec& spec = {},
                             const std::function<double(double)>& layer_curve = nullptr);

}  // namespace weaksym
