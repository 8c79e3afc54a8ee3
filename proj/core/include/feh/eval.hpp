#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "feh/ast.hpp"

namespace feh {

struct EvalOptions {
  uint64_t budget = 1'000'000;
  bool detect_cycles = true;
  // Configurations larger than this many nodes are not recorded for cycle
  // detection; past the entry cap, detection degrades to budget-only.
  uint32_t cycle_size_limit = 4096;
  size_t cycle_max_entries = 1u << 20;
  // Used to stamp type annotations onto captured-continuation binders so that
  // intermediate configurations stay checkable.
  SignaturePtr sig;
};

struct EvalStats {
  uint64_t steps = 0;
  // Maximum, over all steps, of the number of with-handle frames enclosing
  // the redex when the rule fired.
  uint32_t max_active_handlers = 0;
};

struct Outcome {
  enum class Kind { Returned, Stuck, CycleDetected, BudgetExhausted, DynamicTypeError };
  Kind kind = Kind::BudgetExhausted;

  ValuePtr value;  // Returned

  std::string op;  // Stuck
  ValuePtr op_arg;
  uint32_t handler_depth = 0;

  uint64_t first_seen = 0, period = 0;  // CycleDetected

  uint64_t steps_used = 0;  // BudgetExhausted

  std::string message;  // DynamicTypeError

  bool returned(bool want) const;  // Returned with the given boolean
  std::string describe() const;
};

enum class StepStatus { Stepped, Normal, Stuck, TypeError };

struct StepResult {
  StepStatus status;
  CompPtr next;         // Stepped
  std::string message;  // TypeError
};

// One step of the operational semantics on a closed computation. Normal for a
// top-level `return v`; Stuck for an op invocation no rule can fire on.
StepResult step(const CompPtr& c);

std::pair<Outcome, EvalStats> eval(const CompPtr& c, const EvalOptions& opts = {});

// Prefix of the configuration sequence starting at `c`, at most `budget`
// entries long (the initial configuration included).
std::vector<CompPtr> trace(const CompPtr& c, uint64_t budget);

uint32_t max_name_id(const CompPtr& c);

}  // namespace feh
