#include "feh/types.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace feh {

SimpleTypePtr st_unit() {
  static const SimpleTypePtr t = std::make_shared<SimpleType>(SimpleType{SimpleType::Kind::Unit});
  return t;
}

SimpleTypePtr st_bool() {
  static const SimpleTypePtr t = std::make_shared<SimpleType>(SimpleType{SimpleType::Kind::Bool});
  return t;
}

SimpleTypePtr st_arrow(SimpleTypePtr dom, SimpleTypePtr cod) {
  auto t = std::make_shared<SimpleType>();
  t->kind = SimpleType::Kind::Arrow;
  t->dom = std::move(dom);
  t->cod = std::move(cod);
  return t;
}

SimpleTypePtr st_record(std::vector<std::pair<std::string, SimpleTypePtr>> fields) {
  std::sort(fields.begin(), fields.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (size_t i = 1; i < fields.size(); ++i) {
    if (fields[i].first == fields[i - 1].first) {
      throw std::invalid_argument("duplicate record label: " + fields[i].first);
    }
  }
  auto t = std::make_shared<SimpleType>();
  t->kind = SimpleType::Kind::Record;
  t->fields = std::move(fields);
  return t;
}

bool st_equal(const SimpleTypePtr& a, const SimpleTypePtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case SimpleType::Kind::Unit:
    case SimpleType::Kind::Bool:
      return true;
    case SimpleType::Kind::Arrow:
      return st_equal(a->dom, b->dom) && st_equal(a->cod, b->cod);
    case SimpleType::Kind::Record: {
      if (a->fields.size() != b->fields.size()) return false;
      for (size_t i = 0; i < a->fields.size(); ++i) {
        if (a->fields[i].first != b->fields[i].first) return false;
        if (!st_equal(a->fields[i].second, b->fields[i].second)) return false;
      }
      return true;
    }
  }
  return false;
}

namespace {

// Parenthesize arrows on the left of -> and on the left of /.
void st_print(const SimpleTypePtr& t, std::string& out, bool atom) {
  switch (t->kind) {
    case SimpleType::Kind::Unit:
      out += "Unit";
      return;
    case SimpleType::Kind::Bool:
      out += "Bool";
      return;
    case SimpleType::Kind::Arrow:
      if (atom) out += '(';
      st_print(t->dom, out, true);
      out += " -> ";
      st_print(t->cod, out, false);
      if (atom) out += ')';
      return;
    case SimpleType::Kind::Record: {
      out += '{';
      bool first = true;
      for (const auto& [l, ft] : t->fields) {
        if (!first) out += ", ";
        first = false;
        out += l;
        out += " : ";
        st_print(ft, out, false);
      }
      out += '}';
      return;
    }
  }
}

}  // namespace

std::string to_string(const SimpleTypePtr& t) {
  std::string out;
  st_print(t, out, false);
  return out;
}

AtmValPtr atm_unit() {
  static const AtmValPtr t = std::make_shared<AtmVal>(AtmVal{AtmVal::Kind::Unit});
  return t;
}

AtmValPtr atm_bool() {
  static const AtmValPtr t = std::make_shared<AtmVal>(AtmVal{AtmVal::Kind::Bool});
  return t;
}

AtmValPtr atm_arrow(AtmValPtr dom, AtmCompPtr cod) {
  auto t = std::make_shared<AtmVal>();
  t->kind = AtmVal::Kind::Arrow;
  t->dom = std::move(dom);
  t->cod = std::move(cod);
  return t;
}

AtmCompPtr atm_pure(AtmValPtr result) {
  auto t = std::make_shared<AtmComp>();
  t->result = std::move(result);
  return t;
}

AtmCompPtr atm_eff(AtmValPtr result, AtmCompPtr ans_in, AtmCompPtr ans_out) {
  assert(ans_in && ans_out);
  auto t = std::make_shared<AtmComp>();
  t->result = std::move(result);
  t->ans_in = std::move(ans_in);
  t->ans_out = std::move(ans_out);
  return t;
}

bool atm_equal(const AtmValPtr& a, const AtmValPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  if (a->kind == AtmVal::Kind::Arrow) {
    return atm_equal(a->dom, b->dom) && atm_equal(a->cod, b->cod);
  }
  return true;
}

bool atm_equal(const AtmCompPtr& a, const AtmCompPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->is_pure() != b->is_pure()) return false;
  if (!atm_equal(a->result, b->result)) return false;
  if (a->is_pure()) return true;
  return atm_equal(a->ans_in, b->ans_in) && atm_equal(a->ans_out, b->ans_out);
}

int depth(const AtmValPtr& t) {
  if (t->kind != AtmVal::Kind::Arrow) return 1;
  return 1 + std::max(depth(t->dom), depth(t->cod));
}

int depth(const AtmCompPtr& t) {
  int d = depth(t->result);
  if (!t->is_pure()) {
    d = std::max(d, std::max(depth(t->ans_in), depth(t->ans_out)));
  }
  return 1 + d;
}

namespace {

void atm_print_val(const AtmValPtr& t, std::string& out, bool atom);
void atm_print_comp(const AtmCompPtr& t, std::string& out, bool guard_eff);

void atm_print_val(const AtmValPtr& t, std::string& out, bool atom) {
  switch (t->kind) {
    case AtmVal::Kind::Unit:
      out += "Unit";
      return;
    case AtmVal::Kind::Bool:
      out += "Bool";
      return;
    case AtmVal::Kind::Arrow:
      if (atom) out += '(';
      atm_print_val(t->dom, out, true);
      out += " -> ";
      atm_print_comp(t->cod, out, false);
      if (atom) out += ')';
      return;
  }
}

// guard_eff: parenthesize an effectful type appearing left of `=>`.
void atm_print_comp(const AtmCompPtr& t, std::string& out, bool guard_eff) {
  if (!t->is_pure() && guard_eff) out += '(';
  atm_print_val(t->result, out, true);
  out += " / ";
  if (t->is_pure()) {
    out += "pure";
  } else {
    atm_print_comp(t->ans_in, out, true);
    out += " => ";
    atm_print_comp(t->ans_out, out, true);
  }
  if (!t->is_pure() && guard_eff) out += ')';
}

}  // namespace

std::string to_string(const AtmValPtr& t) {
  std::string out;
  atm_print_val(t, out, false);
  return out;
}

std::string to_string(const AtmCompPtr& t) {
  std::string out;
  atm_print_comp(t, out, false);
  return out;
}

SimpleTypePtr erase_to_simple(const AtmValPtr& t) {
  switch (t->kind) {
    case AtmVal::Kind::Unit:
      return st_unit();
    case AtmVal::Kind::Bool:
      return st_bool();
    case AtmVal::Kind::Arrow:
      return st_arrow(erase_to_simple(t->dom), erase_to_simple(t->cod->result));
  }
  return nullptr;
}

}  // namespace feh
