#pragma once

#include <stdexcept>
#include <string>

#include "feh/surface.hpp"

namespace feh {

struct ParseError : std::runtime_error {
  ParseError(std::string msg, Span sp)
      : std::runtime_error(sp.to_string() + ": " + msg), span(sp) {}
  Span span;
};

// Parses the text of a `.feh` file. Throws ParseError with line:column on
// lexical and syntactic faults.
surface::Module parse_module(const std::string& text);

// Parses a single expression (for tests and tools).
surface::ExprPtr parse_expr_text(const std::string& text);

// Parses a single type expression.
surface::TypeExprPtr parse_type_text(const std::string& text);

}  // namespace feh
