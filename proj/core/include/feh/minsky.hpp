#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "feh/ast.hpp"

namespace feh {

// 2-register Minsky machines. States are q0..qn with q0 initial; the
// transition map is total.
struct MinskyInstr {
  enum class Kind { Inc, DecOrZero, Halt };
  Kind kind = Kind::Halt;
  int reg = 0;        // 0 or 1
  int next = 0;       // Inc: goto
  int zero_next = 0;  // DecOrZero: goto when the register is 0
  int dec_next = 0;   // DecOrZero: goto after decrementing
};

struct MinskyMachine {
  std::vector<MinskyInstr> states;  // index j = state qj
};

// Text format, one line per state:
//   qJ: inc rI goto qK
//   qJ: ifz rI goto qK else dec goto qL
//   qJ: halt
// '#' starts a comment. Every state 0..n must be defined exactly once.
MinskyMachine parse_machine(const std::string& text);
std::string print_machine(const MinskyMachine& m);

struct SimResult {
  bool halted = false;
  uint64_t steps = 0;  // instructions executed before Halt was reached
};

// Exact simulation from (q0, 0, 0).
SimResult simulate(const MinskyMachine& m, uint64_t fuel);

// Compiles into the effect-handler program family: state qj becomes the
// recursive function fj, registers become unary closures over `succ`, and the
// main sequence ends in `return true` so that reachability mirrors halting.
std::string compile_mm(const MinskyMachine& m);

// Counts the nesting depth of `fun y -> do succ <...>` wrappers in a register
// value (the unary encoding of the register's count).
int succ_wrapper_depth(const ValuePtr& v);

}  // namespace feh
