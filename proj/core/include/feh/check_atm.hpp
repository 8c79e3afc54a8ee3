#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "feh/ast.hpp"
#include "feh/result.hpp"

namespace feh {

// ---------------------------------------------------------------------------
// Derivations as data: one node kind per rule. These trees are the input
// language of the CPS transform and revalidate independently of the checker.
// ---------------------------------------------------------------------------

enum class SRule { Base, Arr, Pure, Ipure, Embed };

struct SubDeriv;
using SubDerivPtr = std::shared_ptr<const SubDeriv>;

struct SubDeriv {
  SRule rule;
  // endpoints: value form (lv <= rv) or computation form (lc <= rc)
  AtmValPtr lv, rv;
  AtmCompPtr lc, rc;
  std::vector<SubDerivPtr> premises;
  bool value_form() const { return lv != nullptr; }
};

enum class TRule {
  Unit, Bool, Var, Lam, Rec, If, App, LetP, LetIp, Ret, Op, Hdlr, Han, VSub, CSub
};

const char* to_string(TRule r);
const char* to_string(SRule r);

using AtmEnv = std::map<uint32_t, AtmValPtr>;  // binder tag -> value type

struct TypeDeriv;
using TypeDerivPtr = std::shared_ptr<const TypeDeriv>;

struct TypeDeriv {
  TRule rule;
  AtmEnv env;
  // exactly one of the subjects is set, matching the judgment form
  ValuePtr vsubject;
  CompPtr csubject;
  HandlerPtr hsubject;  // T-Hdlr (no assigned type)
  AtmValPtr vtype;
  AtmCompPtr ctype;
  std::vector<TypeDerivPtr> premises;
  SubDerivPtr sub;   // T-VSub / T-CSub
  SignaturePtr sig;  // stored on T-Op / T-Hdlr for independent revalidation
};

// ---------------------------------------------------------------------------
// Subtyping: deterministic structural recursion, syntax-directed on the
// shapes of both sides. Absence of a derivation is the negative answer.
// ---------------------------------------------------------------------------

SubDerivPtr subtype(const AtmValPtr& a, const AtmValPtr& b);
SubDerivPtr subtype(const AtmCompPtr& a, const AtmCompPtr& b);

// ---------------------------------------------------------------------------
// Annotation-assisted algorithmic checker
// ---------------------------------------------------------------------------

struct AtmError {
  std::string rule;  // "needs-annotation", "rule-mismatch", "answer-type-mismatch", ...
  Span span;
  std::string message;

  std::string describe() const { return "[" + rule + "] " + span.to_string() + ": " + message; }
};

// Bidirectional checking; when `expected` is null the type is synthesized.
Result<TypeDerivPtr, AtmError> check_atm(const SignaturePtr& sig, const AtmEnv& env,
                                         const CompPtr& c, AtmCompPtr expected = nullptr);
Result<TypeDerivPtr, AtmError> check_atm_value(const SignaturePtr& sig, const AtmEnv& env,
                                               const ValuePtr& v, AtmValPtr expected = nullptr);

// A program is ATM-typable when its main computation derives a pure type.
Result<TypeDerivPtr, AtmError> check_atm_program(const Program& p);

// ---------------------------------------------------------------------------
// Independent revalidation: true iff every node instantiates its rule with
// exactly matching types, environments, and subjects.
// ---------------------------------------------------------------------------

bool validate_derivation(const SubDerivPtr& d, std::string* why = nullptr);
bool validate_derivation(const TypeDerivPtr& d, std::string* why = nullptr);

}  // namespace feh
