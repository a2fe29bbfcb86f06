#include "weaksym/mollifier.hpp"

#include <cmath>

#include "weaksym/quadrature.hpp"

namespace weaksym {

namespace {

double bump(double y) {
  if (std::fabs(y) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - y * y));
}

// d/dy log bump = -2y/(1-y^2)^2
double bump_d(double y) {
  if (std::fabs(y) >= 1.0) return 0.0;
  double s = 1.0 - y * y;
  return bump(y) * (-2.0 * y / (s * s));
}

double bump_dd(double y) {
  if (std::fabs(y) >= 1.0) return 0.0;
  double s = 1.0 - y * y;
  double g1 = -2.0 * y / (s * s);
  double g2 = -2.0 / (s * s) - 8.0 * y * y / (s * s * s);
  return bump(y) * (g1 * g1 + g2);
}

/// Chebyshev interpolant of the primitive of f on [-r, r] with f(-r)=0 start.
class ChebPrimitive {
 public:
  ChebPrimitive(const std::function<double(double)>& f, double r, int n = 512)
      : r_(r), coef_(n, 0.0) {
    // Chebyshev coefficients of f on [-r, r] from Gauss-Chebyshev sampling
    std::vector<double> fv(n);
    for (int j = 0; j < n; ++j) {
      double th = M_PI * (j + 0.5) / n;
      fv[j] = f(r_ * std::cos(th));
    }
    std::vector<double> a(n, 0.0);
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j)
        acc += fv[j] * std::cos(M_PI * k * (j + 0.5) / n);
      a[k] = 2.0 / n * acc;
    }
    a[0] *= 0.5;
    // termwise antiderivative; the T_0 contribution enters b_1 in full
    std::vector<double> b(n + 1, 0.0);
    b[1] = a[0] - (n > 2 ? a[2] * 0.5 : 0.0);
    for (int k = 2; k + 1 < n; ++k) b[k] = (a[k - 1] - a[k + 1]) / (2.0 * k);
    b[n - 1] = a[n - 2] / (2.0 * (n - 1));
    b[n] = a[n - 1] / (2.0 * n);
    coef_.assign(b.begin(), b.end());
    for (auto& c : coef_) c *= r_;  // chain rule for x = r * s
    shift_ = -eval_raw(-r_);
  }

  double operator()(double x) const {
    if (x <= -r_) return 0.0;
    if (x >= r_) return eval_raw(r_) + shift_;
    return eval_raw(x) + shift_;
  }

 private:
  double eval_raw(double x) const {
    double s = x / r_;
    // Clenshaw
    double b1 = 0.0, b2 = 0.0;
    for (int k = (int)coef_.size() - 1; k >= 1; --k) {
      double t = 2.0 * s * b1 - b2 + coef_[k];
      b2 = b1;
      b1 = t;
    }
    return s * b1 - b2 + coef_[0];
  }
  double r_;
  double shift_ = 0.0;
  std::vector<double> coef_;
};

}  // namespace

Mollifier make_bump_mollifier(SymbolTable& table, const std::string& name,
                              int power) {
  if (power < 1) throw MollifierError("mollifier power must be >= 1");
  Mollifier m;
  m.theta_name = name;
  m.prim_name = name + "_prim";
  m.radius = 1.0;

  auto raw = [power](double y) { return std::pow(bump(y), power); };
  double norm;
  {
    auto q = integrate(raw, -1.0, 1.0);
    if (!q.converged) throw MollifierError("mollifier normalization failed");
    norm = q.value;
  }

  auto theta_eval = [raw, norm](const std::vector<double>& a) {
    return raw(a[0]) / norm;
  };
  auto theta_d_eval = [power, norm](const std::vector<double>& a) {
    double y = a[0];
    return power * std::pow(bump(y), power - 1) * bump_d(y) / norm;
  };
  auto theta_dd_eval = [power, norm](const std::vector<double>& a) {
    double y = a[0];
    double p1 = (power > 1)
                    ? power * (power - 1) * std::pow(bump(y), power - 2) *
                          bump_d(y) * bump_d(y)
                    : 0.0;
    return (p1 + power * std::pow(bump(y), power - 1) * bump_dd(y)) / norm;
  };

  std::string dname = name + "_d";
  std::string ddname = name + "_dd";
  {
    OpaqueFn f;
    f.arity = 1;
    f.evaluator = theta_dd_eval;
    table.register_opaque(ddname, f);
  }
  {
    OpaqueFn f;
    f.arity = 1;
    f.evaluator = theta_d_eval;
    f.rules = {[ddname](const std::vector<Expr>& a) {
      return Expr::opaque(ddname, a);
    }};
    table.register_opaque(dname, f);
  }
  {
    OpaqueFn f;
    f.arity = 1;
    f.evaluator = theta_eval;
    f.rules = {[dname](const std::vector<Expr>& a) {
      return Expr::opaque(dname, a);
    }};
    table.register_opaque(name, f);
  }
  {
    auto prim = std::make_shared<ChebPrimitive>(
        [theta_eval](double y) { return theta_eval({y}); }, m.radius);
    // pin the saturation value to 1 exactly (the interpolant is off by ~1e-12)
    double scale = 1.0 / (*prim)(m.radius);
    OpaqueFn f;
    f.arity = 1;
    f.evaluator = [prim, scale](const std::vector<double>& a) {
      return scale * (*prim)(a[0]);
    };
    std::string tname = name;
    f.rules = {[tname](const std::vector<Expr>& a) {
      return Expr::opaque(tname, a);
    }};
    table.register_opaque(m.prim_name, f);
  }
  return m;
}

void check_mollifier(const Mollifier& m, const SymbolTable& table) {
  const auto& th = table.opaque_info(m.theta_name);
  const auto& pr = table.opaque_info(m.prim_name);
  auto q = integrate([&](double y) { return th.evaluator({y}); }, -m.radius,
                     m.radius);
  if (!q.converged || std::fabs(q.value - 1.0) > 1e-10)
    throw MollifierError("mollifier mass deviates from 1");
  for (int i = 0; i <= 200; ++i) {
    double y = -m.radius + 2.0 * m.radius * i / 200;
    if (th.evaluator({y}) < 0.0)
      throw MollifierError("mollifier negative at a sample");
  }
  if (std::fabs(pr.evaluator({-m.radius})) > 1e-10 ||
      std::fabs(pr.evaluator({m.radius}) - 1.0) > 1e-10)
    throw MollifierError("primitive endpoints deviate from {0, 1}");
}

double mollifier_sup(const Mollifier& m, const SymbolTable& table) {
  const auto& th = table.opaque_info(m.theta_name);
  double sup = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    double y = -m.radius + 2.0 * m.radius * i / 4000;
    sup = std::max(sup, std::fabs(th.evaluator({y})));
  }
  return sup;
}

}  // namespace weaksym
