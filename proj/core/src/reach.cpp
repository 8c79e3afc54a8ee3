#include "feh/reach.hpp"

#include <future>

#include "feh/check_atm.hpp"
#include "feh/check_st.hpp"
#include "feh/cps.hpp"
#include "feh/printer.hpp"

namespace feh {

const char* to_string(Route r) {
  switch (r) {
    case Route::Auto: return "auto";
    case Route::Direct: return "direct";
    case Route::ViaCps: return "via-cps";
  }
  return "?";
}

std::string ReachVerdict::describe() const {
  std::string out;
  switch (kind) {
    case Kind::Yes:
      out = "yes (return true reached in " + std::to_string(steps) + " steps)";
      break;
    case Kind::No:
      out = "no (";
      switch (no_reason) {
        case NoReason::Stuck: out += "stuck on an unhandled operation"; break;
        case NoReason::CycleDetected: out += "cycle detected"; break;
        case NoReason::ReturnedOtherValue: out += "returned a different value"; break;
      }
      out += ")";
      break;
    case Kind::Unknown:
      out = "unknown (budget exhausted)";
      break;
  }
  out += " via ";
  out += to_string(route_used);
  return out;
}

namespace {

using R = Result<ReachVerdict, ReachError>;

R verdict_of(const Outcome& o, const EvalStats& stats, Route route) {
  ReachVerdict v;
  v.route_used = route;
  v.steps = stats.steps;
  v.stats = stats;
  switch (o.kind) {
    case Outcome::Kind::Returned: {
      const auto* b = o.value->as<BoolLit>();
      if (b && b->value) {
        v.kind = ReachVerdict::Kind::Yes;
      } else {
        v.kind = ReachVerdict::Kind::No;
        v.no_reason = ReachVerdict::NoReason::ReturnedOtherValue;
      }
      return v;
    }
    case Outcome::Kind::Stuck:
      v.kind = ReachVerdict::Kind::No;
      v.no_reason = ReachVerdict::NoReason::Stuck;
      return v;
    case Outcome::Kind::CycleDetected:
      v.kind = ReachVerdict::Kind::No;
      v.no_reason = ReachVerdict::NoReason::CycleDetected;
      return v;
    case Outcome::Kind::BudgetExhausted:
      v.kind = ReachVerdict::Kind::Unknown;
      return v;
    case Outcome::Kind::DynamicTypeError:
      return R::failure(ReachError{ReachError::Kind::Internal,
                                   "dynamic type error during evaluation: " + o.message});
  }
  return R::failure(ReachError{ReachError::Kind::Internal, "unknown outcome"});
}

R run_direct(const Program& p, const ReachOptions& opts) {
  EvalOptions eo;
  eo.budget = opts.budget;
  eo.detect_cycles = opts.detect_cycles;
  eo.sig = p.sig;
  auto [outcome, stats] = eval(p.main, eo);
  return verdict_of(outcome, stats, Route::Direct);
}

R run_via_cps(const Program& p, const ReachOptions& opts) {
  auto deriv = check_atm_program(p);
  if (!deriv.ok()) {
    return R::failure(ReachError{ReachError::Kind::AtmUntypable,
                                 "program is not ATM-typable: " + deriv.error().describe()});
  }
  NameSupply supply(p.name_counter);
  auto target = cps_term(deriv.value(), *p.sig, supply);
  EvalOptions eo;
  eo.budget = opts.budget;
  eo.detect_cycles = opts.detect_cycles;
  auto [outcome, stats] = eval(target, eo);
  return verdict_of(outcome, stats, Route::ViaCps);
}

}  // namespace

Result<ReachVerdict, ReachError> decide_reachability(const Program& p,
                                                     const ReachOptions& opts) {
  switch (opts.route) {
    case Route::Direct:
      return run_direct(p, opts);
    case Route::ViaCps:
      return run_via_cps(p, opts);
    case Route::Auto:
      break;
  }
  if (!check_atm_program(p).ok()) return run_direct(p, opts);

  auto direct_future =
      std::async(std::launch::async, [&] { return run_direct(p, opts); });
  auto via = run_via_cps(p, opts);
  auto direct = direct_future.get();
  if (!via.ok()) return via;
  if (!direct.ok()) return direct;

  const auto& a = via.value();
  const auto& b = direct.value();
  if (a.kind != ReachVerdict::Kind::Unknown && b.kind != ReachVerdict::Kind::Unknown &&
      a.kind != b.kind) {
    return R::failure(ReachError{
        ReachError::Kind::RouteDisagreement,
        "routes disagree: via-cps says " + a.describe() + ", direct says " + b.describe()});
  }
  if (a.kind != ReachVerdict::Kind::Unknown) return via;
  return direct;
}

TypabilityMatrix typability_matrix(const Program& p) {
  TypabilityMatrix m;
  auto st = check_st(p);
  m.st_ok = st.ok();
  m.st_detail = st.ok() ? to_string(st.value()) : st.error().describe();
  auto atm = check_atm_program(p);
  m.atm_ok = atm.ok();
  m.atm_detail = atm.ok() ? to_string(atm.value()->ctype) : atm.error().describe();
  return m;
}

}  // namespace feh
