#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "feh/types.hpp"

namespace feh {

struct Span {
  int line = 0, col = 0;
  bool known() const { return line > 0; }
  std::string to_string() const;
};

// A variable name: source text plus a numeric tag. Tags are assigned by a
// per-program counter; after alpha-normalization every binder tag in a term
// is distinct (evaluation may later duplicate tags through sharing).
// Tag 0 marks a free occurrence that was never resolved to a binder.
struct Name {
  std::string text;
  uint32_t id = 0;
  friend bool operator==(const Name& a, const Name& b) {
    return a.id == b.id && a.text == b.text;
  }
  friend auto operator<=>(const Name& a, const Name& b) = default;
  std::string to_string() const;
};

class NameSupply {
 public:
  explicit NameSupply(uint32_t next = 1) : next_(next) {}
  Name fresh(std::string text) { return Name{std::move(text), next_++}; }
  uint32_t mark() const { return next_; }

 private:
  uint32_t next_;
};

// Lambda and rec binders carry optional type annotations, one per type
// system. When only the ATM annotation is present, the simple checker falls
// back to its effect erasure.
struct Binder {
  Name name;
  SimpleTypePtr st_ann;
  AtmValPtr atm_ann;
};

class Value;
class Comp;
struct Handler;
using ValuePtr = std::shared_ptr<const Value>;
using CompPtr = std::shared_ptr<const Comp>;
using HandlerPtr = std::shared_ptr<const Handler>;

// ---------------------------------------------------------------------------
// Values
// ---------------------------------------------------------------------------

struct Var {
  Name name;
};
struct UnitLit {};
struct BoolLit {
  bool value = false;
};
struct Lam {
  Binder binder;
  CompPtr body;
};
struct RecFun {  // rec x. v
  Binder binder;
  ValuePtr body;
};
struct RecordLit {
  std::vector<std::pair<std::string, ValuePtr>> fields;  // label order preserved
};

class Value {
 public:
  using Node = std::variant<Var, UnitLit, BoolLit, Lam, RecFun, RecordLit>;
  Node node;
  Span span;
  uint32_t size = 1;                // logical node count (shared subterms recount)
  std::vector<uint32_t> free_ids;   // sorted tags of free variables; 0 if any unresolved

  template <class T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
  bool closed() const { return free_ids.empty(); }
};

// ---------------------------------------------------------------------------
// Computations
// ---------------------------------------------------------------------------

struct Return {
  ValuePtr value;
};
struct OpCall {  // do op v
  std::string op;
  ValuePtr arg;
};
struct Apply {
  ValuePtr fn, arg;
};
struct If {
  ValuePtr cond;
  CompPtr then_c, else_c;
};
struct Let {
  Name binder;
  CompPtr bound, body;
};
struct Handle {
  HandlerPtr handler;
  CompPtr body;
};
struct Proj {
  ValuePtr record;
  std::string label;
};
// Annotation node (c : rho); transparent to evaluation, used by the ATM checker.
struct Ascribe {
  CompPtr body;
  AtmCompPtr type;
};

class Comp {
 public:
  using Node = std::variant<Return, OpCall, Apply, If, Let, Handle, Proj, Ascribe>;
  Node node;
  Span span;
  uint32_t size = 1;
  std::vector<uint32_t> free_ids;

  template <class T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
  bool closed() const { return free_ids.empty(); }
};

struct OpClause {
  std::string op;
  Name arg, kont;
  CompPtr body;
};

struct Handler {
  Name ret_binder;
  CompPtr ret_body;
  std::vector<OpClause> clauses;  // op names pairwise distinct
  Span span;
  uint32_t size = 1;
  std::vector<uint32_t> free_ids;

  const OpClause* find(const std::string& op) const;
};

// ---------------------------------------------------------------------------
// Construction (computes size and free-variable caches)
// ---------------------------------------------------------------------------

ValuePtr mk_var(Name name, Span sp = {});
ValuePtr mk_unit(Span sp = {});
ValuePtr mk_bool(bool b, Span sp = {});
ValuePtr mk_lam(Binder binder, CompPtr body, Span sp = {});
ValuePtr mk_rec(Binder binder, ValuePtr body, Span sp = {});
ValuePtr mk_record(std::vector<std::pair<std::string, ValuePtr>> fields, Span sp = {});

CompPtr mk_return(ValuePtr v, Span sp = {});
CompPtr mk_opcall(std::string op, ValuePtr arg, Span sp = {});
CompPtr mk_apply(ValuePtr fn, ValuePtr arg, Span sp = {});
CompPtr mk_if(ValuePtr cond, CompPtr t, CompPtr e, Span sp = {});
CompPtr mk_let(Name binder, CompPtr bound, CompPtr body, Span sp = {});
CompPtr mk_handle(HandlerPtr h, CompPtr body, Span sp = {});
CompPtr mk_proj(ValuePtr record, std::string label, Span sp = {});
CompPtr mk_ascribe(CompPtr body, AtmCompPtr type, Span sp = {});
HandlerPtr mk_handler(Name ret_binder, CompPtr ret_body, std::vector<OpClause> clauses,
                      Span sp = {});

// ---------------------------------------------------------------------------
// Core operations
// ---------------------------------------------------------------------------

// Free variables as (text, tag) pairs.
std::set<Name> free_vars(const ValuePtr& v);
std::set<Name> free_vars(const CompPtr& c);

// Capture-avoiding substitution of a value for a variable. Binders that would
// capture a free variable of the replacement are renamed; when the
// replacement is closed the input structure is shared untouched.
ValuePtr substitute(const ValuePtr& body, const Name& var, const ValuePtr& v);
CompPtr substitute(const CompPtr& body, const Name& var, const ValuePtr& v);

// Alpha-equivalence; annotations are metadata and do not participate.
bool alpha_equal(const ValuePtr& a, const ValuePtr& b);
bool alpha_equal(const CompPtr& a, const CompPtr& b);

// Renumbers all binder tags in deterministic traversal order starting at
// `first_id`; returns the renumbered term and the next unused tag.
std::pair<CompPtr, uint32_t> alpha_normalize(const CompPtr& c, uint32_t first_id = 1);
std::pair<ValuePtr, uint32_t> alpha_normalize(const ValuePtr& v, uint32_t first_id = 1);

// Removes every Ascribe node.
CompPtr strip_ascriptions(const CompPtr& c);
ValuePtr strip_ascriptions(const ValuePtr& v);

// True iff the term contains no with-handle, op-invoke, or handler node.
bool handler_free(const CompPtr& c);
bool handler_free(const ValuePtr& v);

// Canonical text form: structural serialization with binder tags replaced by
// traversal indices. Two terms serialize equally iff they are alpha-equivalent
// (annotations excluded).
void serialize_canonical(const CompPtr& c, std::string& out);
std::string serialize_canonical(const CompPtr& c);

// ---------------------------------------------------------------------------
// Programs
// ---------------------------------------------------------------------------

struct Program {
  SignaturePtr sig;
  CompPtr main;           // desugared, alpha-normalized, closed
  uint32_t name_counter;  // next fresh tag for transforms over this program
};

}  // namespace feh
