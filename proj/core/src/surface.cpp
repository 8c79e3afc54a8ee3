#include "feh/surface.hpp"

namespace feh::surface {

TypeExprPtr te_base(bool is_bool, Span sp) {
  auto t = std::make_shared<TypeExpr>();
  t->kind = is_bool ? TypeExpr::Kind::Bool : TypeExpr::Kind::Unit;
  t->span = sp;
  return t;
}

TypeExprPtr te_arrow(TypeExprPtr dom, TypeExprPtr cod, Span sp) {
  auto t = std::make_shared<TypeExpr>();
  t->kind = TypeExpr::Kind::Arrow;
  t->a = std::move(dom);
  t->b = std::move(cod);
  t->span = sp;
  return t;
}

TypeExprPtr te_record(std::vector<std::pair<std::string, TypeExprPtr>> fields, Span sp) {
  auto t = std::make_shared<TypeExpr>();
  t->kind = TypeExpr::Kind::Record;
  t->fields = std::move(fields);
  t->span = sp;
  return t;
}

TypeExprPtr te_pure(TypeExprPtr inner, Span sp) {
  auto t = std::make_shared<TypeExpr>();
  t->kind = TypeExpr::Kind::Pure;
  t->a = std::move(inner);
  t->span = sp;
  return t;
}

TypeExprPtr te_eff(TypeExprPtr inner, TypeExprPtr in, TypeExprPtr out, Span sp) {
  auto t = std::make_shared<TypeExpr>();
  t->kind = TypeExpr::Kind::Eff;
  t->a = std::move(inner);
  t->b = std::move(in);
  t->c = std::move(out);
  t->span = sp;
  return t;
}

SimpleTypePtr to_simple(const TypeExprPtr& t) {
  if (!t) return nullptr;
  switch (t->kind) {
    case TypeExpr::Kind::Unit:
      return st_unit();
    case TypeExpr::Kind::Bool:
      return st_bool();
    case TypeExpr::Kind::Arrow: {
      auto d = to_simple(t->a);
      auto c = to_simple(t->b);
      if (!d || !c) return nullptr;
      return st_arrow(std::move(d), std::move(c));
    }
    case TypeExpr::Kind::Record: {
      std::vector<std::pair<std::string, SimpleTypePtr>> fields;
      for (const auto& [l, ft] : t->fields) {
        auto s = to_simple(ft);
        if (!s) return nullptr;
        fields.emplace_back(l, std::move(s));
      }
      return st_record(std::move(fields));
    }
    case TypeExpr::Kind::Pure:
    case TypeExpr::Kind::Eff:
      return nullptr;
  }
  return nullptr;
}

AtmValPtr to_atm_value(const TypeExprPtr& t) {
  if (!t) return nullptr;
  switch (t->kind) {
    case TypeExpr::Kind::Unit:
      return atm_unit();
    case TypeExpr::Kind::Bool:
      return atm_bool();
    case TypeExpr::Kind::Arrow: {
      auto d = to_atm_value(t->a);
      auto c = to_atm_comp(t->b);
      if (!d || !c) return nullptr;
      return atm_arrow(std::move(d), std::move(c));
    }
    default:
      return nullptr;
  }
}

AtmCompPtr to_atm_comp(const TypeExprPtr& t) {
  if (!t) return nullptr;
  switch (t->kind) {
    case TypeExpr::Kind::Pure: {
      auto r = to_atm_value(t->a);
      if (!r) return nullptr;
      return atm_pure(std::move(r));
    }
    case TypeExpr::Kind::Eff: {
      auto r = to_atm_value(t->a);
      auto in = to_atm_comp(t->b);
      auto out = to_atm_comp(t->c);
      if (!r || !in || !out) return nullptr;
      return atm_eff(std::move(r), std::move(in), std::move(out));
    }
    default:
      return nullptr;
  }
}

}  // namespace feh::surface
