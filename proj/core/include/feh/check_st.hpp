#pragma once

#include <map>
#include <string>

#include "feh/ast.hpp"
#include "feh/result.hpp"

namespace feh {

struct StError {
  std::string rule;  // the typing rule that failed, e.g. "St-Hdlr"
  Span span;
  std::string message;

  std::string describe() const { return "[" + rule + "] " + span.to_string() + ": " + message; }
};

// Environment keyed by binder tag.
using StEnv = std::map<uint32_t, SimpleTypePtr>;

// Single bottom-up synthesis pass over the syntax-directed rules. Lambda and
// rec binders must carry a simple annotation or an erasable ATM annotation.
Result<SimpleTypePtr, StError> check_st(const Signature& sig, const StEnv& env,
                                        const CompPtr& c);
Result<SimpleTypePtr, StError> check_st_value(const Signature& sig, const StEnv& env,
                                              const ValuePtr& v);

inline Result<SimpleTypePtr, StError> check_st(const Program& p) {
  return check_st(*p.sig, {}, p.main);
}

}  // namespace feh
