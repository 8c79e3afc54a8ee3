#pragma once

#include <string>

#include "feh/ast.hpp"
#include "feh/eval.hpp"
#include "feh/result.hpp"

namespace feh {

enum class Route { Auto, Direct, ViaCps };

struct ReachVerdict {
  enum class Kind { Yes, No, Unknown };
  enum class NoReason { Stuck, CycleDetected, ReturnedOtherValue };

  Kind kind = Kind::Unknown;
  NoReason no_reason = NoReason::Stuck;  // meaningful when kind == No
  Route route_used = Route::Direct;      // Direct or ViaCps
  uint64_t steps = 0;
  EvalStats stats;

  std::string describe() const;
};

struct ReachError {
  enum class Kind { AtmUntypable, RouteDisagreement, Internal };
  Kind kind;
  std::string message;
};

struct ReachOptions {
  Route route = Route::Auto;
  uint64_t budget = 1'000'000;
  bool detect_cycles = true;
};

// Decides whether the program evaluates to `return true`. The via-cps route
// checks under the ATM system, CPS-transforms the derivation, and evaluates
// the handler-free target; the direct route evaluates the source. Route Auto
// runs both concurrently when the program is ATM-typable and raises a
// RouteDisagreement error if completed verdicts differ.
Result<ReachVerdict, ReachError> decide_reachability(const Program& p,
                                                     const ReachOptions& opts = {});

struct TypabilityMatrix {
  bool st_ok = false;
  std::string st_detail;  // synthesized type or error
  bool atm_ok = false;
  std::string atm_detail;
};

TypabilityMatrix typability_matrix(const Program& p);

const char* to_string(Route r);

}  // namespace feh
