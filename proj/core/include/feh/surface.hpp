#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "feh/ast.hpp"
#include "feh/types.hpp"

// Concrete-syntax layer: sugared expressions and type expressions as parsed
// from `.feh` files. Desugaring turns these into core terms.
namespace feh::surface {

struct TypeExpr;
using TypeExprPtr = std::shared_ptr<const TypeExpr>;

struct TypeExpr {
  enum class Kind { Unit, Bool, Arrow, Record, Pure, Eff };
  Kind kind = Kind::Unit;
  TypeExprPtr a, b, c;  // Arrow: a -> b; Pure: a / pure; Eff: a / b => c
  std::vector<std::pair<std::string, TypeExprPtr>> fields;
  Span span;
};

TypeExprPtr te_base(bool is_bool, Span sp = {});
TypeExprPtr te_arrow(TypeExprPtr dom, TypeExprPtr cod, Span sp = {});
TypeExprPtr te_record(std::vector<std::pair<std::string, TypeExprPtr>> fields, Span sp = {});
TypeExprPtr te_pure(TypeExprPtr t, Span sp = {});
TypeExprPtr te_eff(TypeExprPtr t, TypeExprPtr in, TypeExprPtr out, Span sp = {});

// Elaborations; return null when the expression does not belong to the
// requested type language.
SimpleTypePtr to_simple(const TypeExprPtr& t);
AtmValPtr to_atm_value(const TypeExprPtr& t);
AtmCompPtr to_atm_comp(const TypeExprPtr& t);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct HandlerExpr;
using HandlerExprPtr = std::shared_ptr<const HandlerExpr>;

// A binder with up to two annotations; `st ~ atm` when both are given,
// otherwise the single annotation is classified by shape.
struct BinderExpr {
  std::string name;
  TypeExprPtr ann1, ann2;
  Span span;
};

struct EVar { std::string name; };
struct EUnit {};
struct EBool { bool value; };
struct EFun { BinderExpr binder; ExprPtr body; };
struct ERec { BinderExpr binder; ExprPtr body; };
struct EApp { ExprPtr fn, arg; };
struct EIf { ExprPtr cond, then_e, else_e; };
struct ELet { std::string binder; ExprPtr bound, body; };
struct ESeq { ExprPtr first, second; };
struct EReturn { ExprPtr value; };
struct EOp { std::string op; ExprPtr arg; };
// handler is either a literal or the name of a handler definition
struct EHandle { HandlerExprPtr handler; std::string handler_ref; ExprPtr body; };
struct ERecord { std::vector<std::pair<std::string, ExprPtr>> fields; };
struct EProj { ExprPtr record; std::string label; };
struct EAscribe { ExprPtr body; TypeExprPtr type; };
struct MRecBinding { BinderExpr binder; ExprPtr value; };
struct EMRec { std::vector<MRecBinding> bindings; ExprPtr body; };

struct Expr {
  using Node = std::variant<EVar, EUnit, EBool, EFun, ERec, EApp, EIf, ELet, ESeq,
                            EReturn, EOp, EHandle, ERecord, EProj, EAscribe, EMRec>;
  Node node;
  Span span;

  template <class T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
};

struct HOpClause {
  std::string op, arg, kont;
  ExprPtr body;
  Span span;
};

struct HandlerExpr {
  std::string ret_binder;
  ExprPtr ret_body;
  std::vector<HOpClause> clauses;
  Span span;
};

template <class T>
ExprPtr mk(T node, Span sp = {}) {
  auto e = std::make_shared<Expr>();
  e->node = std::move(node);
  e->span = sp;
  return e;
}

// A named auxiliary definition: a value/computation expression or a handler
// literal. Definitions are macros; uses are inlined during desugaring.
struct Def {
  std::string name;
  ExprPtr expr;            // null when handler
  HandlerExprPtr handler;  // null when expr
  Span span;
};

struct EffectDecl {
  std::string op;
  TypeExprPtr type;
  Span span;
};

// A parsed `.feh` file, sugar intact.
struct Module {
  std::vector<EffectDecl> effects;
  std::vector<Def> defs;
  ExprPtr main;
};

}  // namespace feh::surface
