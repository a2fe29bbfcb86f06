#include "weaksym/expr.hpp"

namespace weaksym {

const char* builtin_name(Builtin b) {
  switch (b) {
    case Builtin::Exp: return "exp";
    case Builtin::Log: return "log";
    case Builtin::Sin: return "sin";
    case Builtin::Cos: return "cos";
    case Builtin::Sqrt: return "sqrt";
    case Builtin::Abs: return "abs";
  }
  return "?";
}

namespace {
std::shared_ptr<const ExprNode> make_node(ExprNode n) {
  return std::make_shared<const ExprNode>(std::move(n));
}
}  // namespace

Expr::Expr() : Expr(rational(Rational(0))) {}

Expr Expr::rational(Rational r) {
  ExprNode n;
  n.kind = NodeKind::RationalConst;
  n.rat = r;
  return Expr(make_node(std::move(n)));
}

Expr Expr::number(double v) {
  ExprNode n;
  n.kind = NodeKind::FloatConst;
  n.fval = v;
  return Expr(make_node(std::move(n)));
}

Expr Expr::symbol(SymbolId id) {
  ExprNode n;
  n.kind = NodeKind::Symbol;
  n.sym = id;
  return Expr(make_node(std::move(n)));
}

Expr Expr::sum(std::vector<Expr> terms) {
  ExprNode n;
  n.kind = NodeKind::Sum;
  n.args = std::move(terms);
  return Expr(make_node(std::move(n)));
}

Expr Expr::product(std::vector<Expr> factors) {
  ExprNode n;
  n.kind = NodeKind::Product;
  n.args = std::move(factors);
  return Expr(make_node(std::move(n)));
}

Expr Expr::power(Expr base, Rational exponent) {
  ExprNode n;
  n.kind = NodeKind::Power;
  n.rat = exponent;
  n.args = {std::move(base)};
  return Expr(make_node(std::move(n)));
}

Expr Expr::quotient(Expr num, Expr den) {
  ExprNode n;
  n.kind = NodeKind::Quotient;
  n.args = {std::move(num), std::move(den)};
  return Expr(make_node(std::move(n)));
}

Expr Expr::call(Builtin fn, Expr arg) {
  ExprNode n;
  n.kind = NodeKind::Call;
  n.fn = fn;
  n.args = {std::move(arg)};
  return Expr(make_node(std::move(n)));
}

Expr Expr::opaque(std::string name, std::vector<Expr> args) {
  ExprNode n;
  n.kind = NodeKind::Opaque;
  n.opaque = std::move(name);
  n.args = std::move(args);
  return Expr(make_node(std::move(n)));
}

namespace {
int kind_rank(NodeKind k) {
  switch (k) {
    case NodeKind::RationalConst: return 0;
    case NodeKind::FloatConst: return 1;
    case NodeKind::Symbol: return 2;
    case NodeKind::Call: return 3;
    case NodeKind::Opaque: return 4;
    case NodeKind::Power: return 5;
    case NodeKind::Product: return 6;
    case NodeKind::Quotient: return 7;
    case NodeKind::Sum: return 8;
  }
  return 9;
}
template <typename T>
int cmp3(const T& a, const T& b) {
  if (a < b) return -1;
  if (b < a) return 1;
  return 0;
}
}  // namespace

int Expr::compare(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return 0;
  const ExprNode& x = a.node();
  const ExprNode& y = b.node();
  if (int c = cmp3(kind_rank(x.kind), kind_rank(y.kind))) return c;
  switch (x.kind) {
    case NodeKind::RationalConst:
      return cmp3(x.rat, y.rat);
    case NodeKind::FloatConst:
      return cmp3(x.fval, y.fval);
    case NodeKind::Symbol:
      return cmp3(x.sym, y.sym);
    case NodeKind::Call:
      if (int c = cmp3((int)x.fn, (int)y.fn)) return c;
      break;
    case NodeKind::Opaque:
      if (int c = cmp3(x.opaque, y.opaque)) return c;
      break;
    case NodeKind::Power:
      if (int c = cmp3(x.rat, y.rat)) return c;
      break;
    default:
      break;
  }
  if (int c = cmp3(x.args.size(), y.args.size())) return c;
  for (size_t i = 0; i < x.args.size(); ++i)
    if (int c = compare(x.args[i], y.args[i])) return c;
  return 0;
}

}  // namespace weaksym
