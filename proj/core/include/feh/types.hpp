#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace feh {

// ---------------------------------------------------------------------------
// Simple types: Unit | Bool | sigma -> sigma | {l : sigma, ...}
// ---------------------------------------------------------------------------

struct SimpleType;
using SimpleTypePtr = std::shared_ptr<const SimpleType>;

struct SimpleType {
  enum class Kind { Unit, Bool, Arrow, Record };
  Kind kind = Kind::Unit;
  SimpleTypePtr dom, cod;                                    // Arrow
  std::vector<std::pair<std::string, SimpleTypePtr>> fields; // Record, sorted by label
};

SimpleTypePtr st_unit();
SimpleTypePtr st_bool();
SimpleTypePtr st_arrow(SimpleTypePtr dom, SimpleTypePtr cod);
// Sorts fields by label; labels must be pairwise distinct.
SimpleTypePtr st_record(std::vector<std::pair<std::string, SimpleTypePtr>> fields);

bool st_equal(const SimpleTypePtr& a, const SimpleTypePtr& b);
std::string to_string(const SimpleTypePtr& t);

// ---------------------------------------------------------------------------
// ATM types: value types tau ::= b | tau -> rho
//            computation types rho ::= tau / pure | tau / rho1 => rho2
// ---------------------------------------------------------------------------

struct AtmVal;
struct AtmComp;
using AtmValPtr = std::shared_ptr<const AtmVal>;
using AtmCompPtr = std::shared_ptr<const AtmComp>;

struct AtmVal {
  enum class Kind { Unit, Bool, Arrow };
  Kind kind = Kind::Unit;
  AtmValPtr dom;
  AtmCompPtr cod;
};

struct AtmComp {
  AtmValPtr result;
  AtmCompPtr ans_in, ans_out;  // both null = pure
  bool is_pure() const { return ans_in == nullptr; }
};

AtmValPtr atm_unit();
AtmValPtr atm_bool();
AtmValPtr atm_arrow(AtmValPtr dom, AtmCompPtr cod);
AtmCompPtr atm_pure(AtmValPtr result);
AtmCompPtr atm_eff(AtmValPtr result, AtmCompPtr ans_in, AtmCompPtr ans_out);

bool atm_equal(const AtmValPtr& a, const AtmValPtr& b);
bool atm_equal(const AtmCompPtr& a, const AtmCompPtr& b);
int depth(const AtmValPtr& t);
int depth(const AtmCompPtr& t);
std::string to_string(const AtmValPtr& t);
std::string to_string(const AtmCompPtr& t);

// Effect-erasing view of an ATM type as a simple type. Erasure drops answer
// types entirely: |b| = b, |tau -> rho| = |tau| -> |rho.result|.
SimpleTypePtr erase_to_simple(const AtmValPtr& t);

// ---------------------------------------------------------------------------
// Operation signatures
// ---------------------------------------------------------------------------

struct StOpSig {
  SimpleTypePtr arg, result;
};

// op : arg -> result / ans_in => ans_out
struct AtmOpSig {
  AtmValPtr arg, result;
  AtmCompPtr ans_in, ans_out;
  AtmCompPtr result_comp() const { return atm_eff(result, ans_in, ans_out); }
};

struct Signature {
  std::map<std::string, StOpSig> st;
  std::map<std::string, AtmOpSig> atm;

  bool declares(const std::string& op) const {
    return st.count(op) || atm.count(op);
  }
};
using SignaturePtr = std::shared_ptr<const Signature>;

}  // namespace feh
