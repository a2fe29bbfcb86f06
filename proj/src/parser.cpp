#include "weaksym/parser.hpp"

#include <cctype>
#include <cstdlib>

#include "weaksym/expr_ops.hpp"

namespace weaksym {

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
  Tok kind;
  std::string text;
  size_t pos;
};

class Lexer {
 public:
  explicit Lexer(const std::string& s) : s_(s) { advance(); }
  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (i_ < s_.size() && std::isspace((unsigned char)s_[i_])) ++i_;
    size_t start = i_;
    if (i_ >= s_.size()) {
      tok_ = {Tok::End, "", start};
      return;
    }
    char c = s_[i_];
    if (std::isdigit((unsigned char)c) || (c == '.' && i_ + 1 < s_.size() &&
                                           std::isdigit((unsigned char)s_[i_ + 1]))) {
      size_t j = i_;
      bool has_dot = false, has_exp = false;
      while (j < s_.size()) {
        char d = s_[j];
        if (std::isdigit((unsigned char)d)) { ++j; continue; }
        if (d == '.' && !has_dot && !has_exp) { has_dot = true; ++j; continue; }
        if ((d == 'e' || d == 'E') && !has_exp && j + 1 < s_.size() &&
            (std::isdigit((unsigned char)s_[j + 1]) || s_[j + 1] == '+' || s_[j + 1] == '-')) {
          has_exp = true;
          ++j;
          if (s_[j] == '+' || s_[j] == '-') ++j;
          continue;
        }
        break;
      }
      tok_ = {Tok::Number, s_.substr(i_, j - i_), start};
      i_ = j;
      return;
    }
    if (std::isalpha((unsigned char)c) || c == '_') {
      size_t j = i_;
      while (j < s_.size() && (std::isalnum((unsigned char)s_[j]) || s_[j] == '_')) ++j;
      tok_ = {Tok::Ident, s_.substr(i_, j - i_), start};
      i_ = j;
      return;
    }
    ++i_;
    switch (c) {
      case '+': tok_ = {Tok::Plus, "+", start}; return;
      case '-': tok_ = {Tok::Minus, "-", start}; return;
      case '*': tok_ = {Tok::Star, "*", start}; return;
      case '/': tok_ = {Tok::Slash, "/", start}; return;
      case '^': tok_ = {Tok::Caret, "^", start}; return;
      case '(': tok_ = {Tok::LParen, "(", start}; return;
      case ')': tok_ = {Tok::RParen, ")", start}; return;
      case ',': tok_ = {Tok::Comma, ",", start}; return;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", start);
    }
  }

  const std::string& s_;
  size_t i_ = 0;
  Token tok_;
};

bool builtin_by_name(const std::string& name, Builtin& out) {
  for (Builtin b : {Builtin::Exp, Builtin::Log, Builtin::Sin, Builtin::Cos,
                    Builtin::Sqrt, Builtin::Abs}) {
    if (name == builtin_name(b)) { out = b; return true; }
  }
  return false;
}

class Parser {
 public:
  Parser(const std::string& text, const SymbolTable& table)
      : lex_(text), table_(table) {}

  Expr parse_full() {
    Expr e = parse_expr(0);
    if (lex_.peek().kind != Tok::End)
      throw ParseError("unexpected trailing input", lex_.peek().pos);
    return e;
  }

 private:
  // binding powers: + - :10, * / :20, unary minus:25, ^:30 (right assoc)
  Expr parse_expr(int min_bp) {
    Expr lhs = parse_prefix();
    for (;;) {
      Tok k = lex_.peek().kind;
      int bp;
      switch (k) {
        case Tok::Plus:
        case Tok::Minus: bp = 10; break;
        case Tok::Star:
        case Tok::Slash: bp = 20; break;
        case Tok::Caret: bp = 30; break;
        default: return lhs;
      }
      if (bp < min_bp) return lhs;
      Token op = lex_.take();
      if (k == Tok::Caret) {
        Expr rhs = parse_expr(30);  // right associative
        Expr rn = normalize(rhs);
        if (!rn.is_rational())
          throw ParseError("exponent must be a rational constant", op.pos);
        lhs = Expr::power(lhs, rn.node().rat);
        continue;
      }
      Expr rhs = parse_expr(bp + 1);
      switch (k) {
        case Tok::Plus: lhs = lhs + rhs; break;
        case Tok::Minus: lhs = lhs - rhs; break;
        case Tok::Star: lhs = lhs * rhs; break;
        case Tok::Slash: lhs = lhs / rhs; break;
        default: break;
      }
    }
  }

  Expr parse_prefix() {
    Token t = lex_.take();
    switch (t.kind) {
      case Tok::Minus:
        return -parse_expr(25);
      case Tok::Plus:
        return parse_expr(25);
      case Tok::LParen: {
        Expr e = parse_expr(0);
        expect(Tok::RParen, ")");
        return e;
      }
      case Tok::Number: {
        if (t.text.find('.') != std::string::npos ||
            t.text.find('e') != std::string::npos ||
            t.text.find('E') != std::string::npos)
          return Expr::number(std::strtod(t.text.c_str(), nullptr));
        errno = 0;
        long long v = std::strtoll(t.text.c_str(), nullptr, 10);
        if (errno) throw ParseError("integer literal out of range", t.pos);
        return Expr::integer(v);
      }
      case Tok::Ident: {
        if (lex_.peek().kind == Tok::LParen) return parse_call(t);
        auto id = table_.lookup(t.text);
        if (!id) throw ParseError("unknown symbol '" + t.text + "'", t.pos);
        return Expr::symbol(*id);
      }
      default:
        throw ParseError("expected expression", t.pos);
    }
  }

  Expr parse_call(const Token& name) {
    lex_.take();  // (
    std::vector<Expr> args;
    if (lex_.peek().kind != Tok::RParen) {
      args.push_back(parse_expr(0));
      while (lex_.peek().kind == Tok::Comma) {
        lex_.take();
        args.push_back(parse_expr(0));
      }
    }
    expect(Tok::RParen, ")");
    Builtin b;
    if (builtin_by_name(name.text, b)) {
      if (args.size() != 1)
        throw ParseError("builtin '" + name.text + "' takes one argument", name.pos);
      if (b == Builtin::Sqrt) return Expr::power(args[0], Rational(1, 2));
      return Expr::call(b, args[0]);
    }
    if (table_.has_opaque(name.text)) {
      const OpaqueFn& fn = table_.opaque_info(name.text);
      if ((int)args.size() != fn.arity)
        throw ParseError("function '" + name.text + "' expects " +
                             std::to_string(fn.arity) + " argument(s), got " +
                             std::to_string(args.size()),
                         name.pos);
      return Expr::opaque(name.text, std::move(args));
    }
    throw ParseError("unknown function '" + name.text + "'", name.pos);
  }

  void expect(Tok k, const char* what) {
    if (lex_.peek().kind != k)
      throw ParseError(std::string("expected '") + what + "'", lex_.peek().pos);
    lex_.take();
  }

  Lexer lex_;
  const SymbolTable& table_;
};

}  // namespace

Expr parse(const std::string& text, const SymbolTable& table) {
  Parser p(text, table);
  return p.parse_full();
}

}  // namespace weaksym
