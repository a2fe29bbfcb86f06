#pragma once

#include <stdexcept>
#include <string>

#include "weaksym/expr.hpp"
#include "weaksym/symbol_table.hpp"

namespace weaksym {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, size_t pos)
      : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"),
        position(pos) {}
  size_t position;
};

/// Parse an infix expression (+, -, *, /, ^ with standard precedence, unary
/// minus, function application). Symbols resolve against the table; exponents
/// must be rational constants.
Expr parse(const std::string& text, const SymbolTable& table);

}  // namespace weaksym
