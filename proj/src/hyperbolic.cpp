#include "weaksym/hyperbolic.hpp"

#include <cmath>
#include <limits>

namespace weaksym {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng);
}

bool nonzero_somewhere(const Expr& e, const SymbolTable& table,
                       std::mt19937_64& rng) {
  Expr n = normalize(e);
  if (n.is_zero()) return false;
  return !is_zero_sampled(n, table, rng);
}

double sample_max(const std::vector<Expr>& exprs,
                  const std::vector<SymbolId>& syms,
                  const std::vector<std::pair<double, double>>& box,
                  const SymbolTable& table, int samples, std::mt19937_64& rng) {
  double worst = 0.0;
  int done = 0, tries = 0;
  while (done < samples && tries < 20 * samples) {
    ++tries;
    Bindings b;
    for (size_t i = 0; i < syms.size(); ++i)
      b.set(syms[i], uniform(rng, box[i].first, box[i].second));
    try {
      double local = 0.0;
      for (const Expr& e : exprs) {
        double v = evaluate(e, b, table);
        if (!std::isfinite(v)) throw EvalError("not finite");
        local = std::max(local, std::fabs(v));
      }
      worst = std::max(worst, local);
      ++done;
    } catch (const EvalError&) {
    }
  }
  if (done == 0) throw HyperbolicError("sampling failed everywhere");
  return worst;
}

}  // namespace

CharacteristicFields characteristic_fields(
    const std::vector<std::vector<Expr>>& A, HypVars vars,
    const std::vector<std::pair<double, double>>& uv_box, SymbolTable& table,
    int samples, uint64_t seed) {
  if (A.size() != 2 || A[0].size() != 2 || A[1].size() != 2)
    throw HyperbolicError("characteristic fields need a 2x2 matrix");
  const Expr &a = A[0][0], &b = A[0][1], &c = A[1][0], &d = A[1][1];
  std::mt19937_64 rng(seed);

  Expr disc = normalize((a - d) * (a - d) + Expr::integer(4) * b * c);
  Expr sq = Expr::call(Builtin::Sqrt, disc);
  CharacteristicFields cf;
  Expr half = Expr::rational(Rational(1, 2));
  cf.lambda = {normalize(half * (a + d - sq)), normalize(half * (a + d + sq))};

  bool b_nonzero = nonzero_somewhere(b, table, rng);
  bool c_nonzero = nonzero_somewhere(c, table, rng);
  if (b_nonzero) {
    for (int i = 0; i < 2; ++i) {
      cf.r.push_back({b, normalize(cf.lambda[i] - a)});
      cf.l.push_back({normalize(cf.lambda[i] - d), b});
    }
  } else if (c_nonzero) {
    for (int i = 0; i < 2; ++i) {
      cf.r.push_back({normalize(cf.lambda[i] - d), c});
      cf.l.push_back({c, normalize(cf.lambda[i] - a)});
    }
  } else {
    // diagonal matrix: order the trivial eigenpairs by a sampled comparison
    Bindings mid;
    mid.set(vars.u, 0.5 * (uv_box[0].first + uv_box[0].second));
    mid.set(vars.v, 0.5 * (uv_box[1].first + uv_box[1].second));
    bool a_first = evaluate(a, mid, table) <= evaluate(d, mid, table);
    Expr one = Expr::integer(1), zero = Expr::integer(0);
    std::vector<Expr> e1{one, zero}, e2{zero, one};
    cf.r = a_first ? std::vector<std::vector<Expr>>{e1, e2}
                   : std::vector<std::vector<Expr>>{e2, e1};
    cf.l = cf.r;
  }

  for (int i = 0; i < 2; ++i) {
    Expr dot = normalize(cf.l[i][0] * cf.r[i][0] + cf.l[i][1] * cf.r[i][1]);
    if (dot.is_zero())
      throw HyperbolicError("degenerate eigenvector normalization");
    cf.l[i] = {normalize(cf.l[i][0] / dot), normalize(cf.l[i][1] / dot)};
  }

  std::vector<SymbolId> syms{vars.u, vars.v};
  cf.gap = std::numeric_limits<double>::infinity();
  int done = 0, tries = 0;
  while (done < samples && tries < 20 * samples) {
    ++tries;
    Bindings bd;
    bd.set(vars.u, uniform(rng, uv_box[0].first, uv_box[0].second));
    bd.set(vars.v, uniform(rng, uv_box[1].first, uv_box[1].second));
    try {
      double dv = evaluate(disc, bd, table);
      if (!std::isfinite(dv)) throw EvalError("not finite");
      if (dv <= 0.0)
        throw HyperbolicError("discriminant not positive at a sample");
      double Av[2][2], lam[2], rv[2][2], lv[2][2];
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) Av[i][j] = evaluate(A[i][j], bd, table);
      for (int i = 0; i < 2; ++i) {
        lam[i] = evaluate(cf.lambda[i], bd, table);
        for (int j = 0; j < 2; ++j) {
          rv[i][j] = evaluate(cf.r[i][j], bd, table);
          lv[i][j] = evaluate(cf.l[i][j], bd, table);
        }
      }
      cf.gap = std::min(cf.gap, lam[1] - lam[0]);
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          double er =
              Av[j][0] * rv[i][0] + Av[j][1] * rv[i][1] - lam[i] * rv[i][j];
          double el =
              lv[i][0] * Av[0][j] + lv[i][1] * Av[1][j] - lam[i] * lv[i][j];
          cf.defect = std::max({cf.defect, std::fabs(er), std::fabs(el)});
        }
        double dot = lv[i][0] * rv[i][0] + lv[i][1] * rv[i][1];
        cf.defect = std::max(cf.defect, std::fabs(dot - 1.0));
      }
      ++done;
    } catch (const EvalError&) {
    }
  }
  if (done == 0) throw HyperbolicError("eigen sampling failed everywhere");
  if (cf.gap <= 0.0)
    throw HyperbolicError("eigenvalue gap not positive on the region");
  return cf;
}

HyperbolicReport verify_hyperbolic_reduction(
    const std::vector<std::vector<Expr>>& A, const HyperbolicCandidate& cand,
    HypVars vars, const std::vector<std::pair<double, double>>& box,
    SymbolTable& table, int samples, uint64_t seed) {
  if (A.size() != 2 || box.size() != 4)
    throw HyperbolicError("need a 2x2 matrix and a box in (x, t, u, v)");
  std::mt19937_64 rng(seed);
  auto dx = [&](const Expr& e) { return differentiate(e, vars.x, table); };
  auto dt = [&](const Expr& e) { return differentiate(e, vars.t, table); };
  auto du = [&](const Expr& e) { return differentiate(e, vars.u, table); };
  auto dv = [&](const Expr& e) { return differentiate(e, vars.v, table); };

  std::vector<Expr> w{cand.phi, cand.psi};
  std::vector<std::vector<Expr>> B{{du(cand.phi), dv(cand.phi)},
                                   {du(cand.psi), dv(cand.psi)}};

  std::vector<Expr> first;
  for (int i = 0; i < 2; ++i) {
    Expr e = dt(w[i]);
    for (int j = 0; j < 2; ++j) e = e + A[i][j] * dx(w[j]);
    first.push_back(normalize(e));
  }

  auto kron = [](int i, int j) { return Expr::integer(i == j ? 1 : 0); };
  std::vector<std::vector<Expr>> second(2, std::vector<Expr>(2, Expr()));
  std::vector<std::vector<Expr>> M(2, std::vector<Expr>(2, Expr()));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Expr ab = Expr::integer(0), ba = Expr::integer(0), xa = Expr::integer(0);
      for (int k = 0; k < 2; ++k) {
        ab = ab + A[i][k] * B[k][j];
        ba = ba + B[i][k] * A[k][j];
        xa = xa + (dx(cand.xi) * kron(i, k) - dx(cand.tau) * A[i][k]) * A[k][j];
      }
      Expr e = ab - ba + cand.phi * du(A[i][j]) + cand.psi * dv(A[i][j]) -
               (dt(cand.xi) * kron(i, j) - dt(cand.tau) * A[i][j]) - xa;
      second[i][j] = normalize(e);
      M[i][j] = normalize(B[i][j] + dx(cand.xi) * kron(i, j) -
                          dx(cand.tau) * A[i][j]);
    }

  std::vector<Expr> meq;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Expr e = dt(M[i][j]);
      for (int k = 0; k < 2; ++k) e = e + dx(M[i][k]) * A[k][j];
      meq.push_back(normalize(e));
    }

  std::vector<Expr> secflat;
  for (const auto& row : second)
    for (const Expr& e : row) secflat.push_back(e);

  std::vector<SymbolId> syms{vars.x, vars.t, vars.u, vars.v};
  HyperbolicReport rep;
  rep.res_first = sample_max(first, syms, box, table, samples, rng);
  rep.res_second = sample_max(secflat, syms, box, table, samples, rng);
  rep.res_M = sample_max(meq, syms, box, table, samples, rng);

  if (cand.alpha && cand.beta) {
    auto cf = characteristic_fields(A, vars, {box[2], box[3]}, table, samples,
                                    seed ^ 0x5555ull);
    auto rel = [&](int comp, bool wrt_u) {
      Expr lhs = Expr::integer(0), rhs = Expr::integer(0);
      for (int i = 0; i < 2; ++i) {
        lhs = lhs + (*cand.beta)[i][comp] * cf.l[i][wrt_u ? 0 : 1];
        Expr prod = (*cand.alpha)[i] * cf.r[i][comp];
        rhs = rhs + (wrt_u ? du(prod) : dv(prod));
      }
      int acol = wrt_u ? 0 : 1;
      rhs = rhs - dx(cand.tau) * A[comp][acol];
      if (comp == acol) rhs = rhs + dx(cand.xi);
      return normalize(lhs - rhs);
    };
    std::array<double, 4> rr;
    rr[0] = sample_max({rel(0, true)}, syms, box, table, samples, rng);
    rr[1] = sample_max({rel(0, false)}, syms, box, table, samples, rng);
    rr[2] = sample_max({rel(1, true)}, syms, box, table, samples, rng);
    rr[3] = sample_max({rel(1, false)}, syms, box, table, samples, rng);
    rep.res_relations = rr;
  }
  return rep;
}

}  // namespace weaksym
