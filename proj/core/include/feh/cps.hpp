#pragma once

#include "feh/ast.hpp"
#include "feh/check_atm.hpp"

namespace feh {

// ---------------------------------------------------------------------------
// CPS translation of types:
//   [b] = b   [tau -> rho] = [tau] -> [rho]   [tau/pure] = [tau]
//   [tau / rho1 => rho2] = [Sigma] -> ([tau] -> [rho1]) -> [rho2]
// where [Sigma] is a record over the ATM operation entries.
// ---------------------------------------------------------------------------

SimpleTypePtr cps_type(const AtmValPtr& t, const Signature& sig);
SimpleTypePtr cps_type(const AtmCompPtr& t, const Signature& sig);
SimpleTypePtr cps_sig_type(const Signature& sig);

// ---------------------------------------------------------------------------
// Static application: the transform-time @ of the CPS rules. A syntactic
// lambda applied to a value reduces now; computations are sequenced through
// fresh lets so that evaluation order is preserved.
// ---------------------------------------------------------------------------

// A transform result: exactly one of value or computation.
struct VC {
  ValuePtr v;
  CompPtr c;
  bool is_value() const { return v != nullptr; }

  static VC val(ValuePtr p) { return VC{std::move(p), nullptr}; }
  static VC comp(CompPtr p) { return VC{nullptr, std::move(p)}; }
};

// Reads a transform result as a computation (`return v` for values).
CompPtr as_comp(const VC& r);

VC static_apply(const VC& f, const VC& a, NameSupply& supply);

// ---------------------------------------------------------------------------
// CPS of subtyping derivations (coercions) and of typing derivations.
// Output binders carry simple-type annotations so targets check under the
// simple system directly.
// ---------------------------------------------------------------------------

ValuePtr cps_sub(const SubDerivPtr& d, const Signature& sig, NameSupply& supply);

VC cps_deriv(const TypeDerivPtr& d, const Signature& sig, NameSupply& supply);

// Top-level entry for computation-judgment derivations.
CompPtr cps_term(const TypeDerivPtr& d, const Signature& sig, NameSupply& supply);

}  // namespace feh
