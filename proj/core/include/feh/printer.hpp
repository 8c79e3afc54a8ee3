#pragma once

#include <string>

#include "feh/ast.hpp"

namespace feh {

// Emits concrete syntax that reparses to an alpha-equivalent term. Binders
// whose source text would collide with an enclosing binder (or a free
// variable) are printed with primes appended.
std::string print_comp(const CompPtr& c);
std::string print_value(const ValuePtr& v);

// Whole program: signature blocks followed by `main =`.
std::string print_program(const Program& p);

bool is_keyword(const std::string& word);

}  // namespace feh
