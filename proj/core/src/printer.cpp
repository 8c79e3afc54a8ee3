#include "feh/printer.hpp"

#include <map>
#include <set>
#include <unordered_set>

namespace feh {

bool is_keyword(const std::string& word) {
  static const std::unordered_set<std::string> kw = {
      "fun",  "rec",    "let",  "in",   "if",   "then", "else",
      "return", "do",   "with", "handle", "def", "effect", "main",
      "mrec", "and",    "true", "false", "pure", "Unit", "Bool"};
  return kw.count(word) > 0;
}

namespace {

struct Printer {
  std::string out;
  std::map<Name, std::string> emitted;
  std::map<std::string, int> in_scope;  // emitted text -> nesting count
  std::set<std::string> free_texts;

  std::string pick_text(const Name& n) {
    std::string cand = n.text.empty() ? "_" : n.text;
    while (is_keyword(cand) || in_scope.count(cand) || free_texts.count(cand)) {
      cand += '\'';
    }
    return cand;
  }

  struct Scope {
    Printer& p;
    Name key;
    std::string text;
    std::string old;
    bool had = false;
    Scope(Printer& p, const Name& n) : Scope(p, n, p.pick_text(n)) {}
    Scope(Printer& p, const Name& n, std::string chosen) : p(p), key(n), text(std::move(chosen)) {
      if (auto it = p.emitted.find(n); it != p.emitted.end()) {
        had = true;
        old = it->second;
      }
      p.emitted[n] = text;
      p.in_scope[text]++;
    }
    ~Scope() {
      if (--p.in_scope[text] == 0) p.in_scope.erase(text);
      if (had) p.emitted[key] = old; else p.emitted.erase(key);
    }
  };

  void name(const Name& n) {
    auto it = emitted.find(n);
    out += it != emitted.end() ? it->second : n.text;
  }

  void binder(const Binder& b, const std::string& text) {
    bool atm_covers =
        b.atm_ann && (!b.st_ann || st_equal(b.st_ann, erase_to_simple(b.atm_ann)));
    if (atm_covers) {
      out += '(' + text + " : " + to_string(b.atm_ann) + ')';
    } else if (b.st_ann && b.atm_ann) {
      out += '(' + text + " : " + to_string(b.st_ann) + " ~ " + to_string(b.atm_ann) + ')';
    } else if (b.st_ann) {
      out += '(' + text + " : " + to_string(b.st_ann) + ')';
    } else {
      out += text;
    }
  }

  // atom: wrap lam/rec in parens (variables, literals, records are atomic)
  void value(const ValuePtr& v, bool atom) {
    if (const auto* x = v->as<Var>()) {
      name(x->name);
      return;
    }
    if (v->as<UnitLit>()) {
      out += "()";
      return;
    }
    if (const auto* b = v->as<BoolLit>()) {
      out += b->value ? "true" : "false";
      return;
    }
    if (const auto* l = v->as<Lam>()) {
      if (atom) out += '(';
      Scope s(*this, l->binder.name);
      out += "fun ";
      binder(l->binder, s.text);
      out += " -> ";
      comp(l->body);
      if (atom) out += ')';
      return;
    }
    if (const auto* r = v->as<RecFun>()) {
      if (atom) out += '(';
      Scope s(*this, r->binder.name);
      out += "rec ";
      binder(r->binder, s.text);
      out += ". ";
      value(r->body, false);
      if (atom) out += ')';
      return;
    }
    if (const auto* rec = v->as<RecordLit>()) {
      out += '{';
      bool first = true;
      for (const auto& [l, f] : rec->fields) {
        if (!first) out += ", ";
        first = false;
        out += l + " = ";
        value(f, false);
      }
      out += '}';
      return;
    }
  }

  void handler(const Handler& h) {
    out += "{return ";
    {
      Scope s(*this, h.ret_binder);
      out += s.text;
      out += " -> ";
      comp(h.ret_body);
    }
    for (const auto& cl : h.clauses) {
      out += "; " + cl.op + "(";
      Scope sa(*this, cl.arg);
      Scope sk(*this, cl.kont);
      out += sa.text + "; " + sk.text + ") -> ";
      comp(cl.body);
    }
    out += '}';
  }

  void comp(const CompPtr& c) {
    if (const auto* r = c->as<Return>()) {
      out += "return ";
      value(r->value, true);
      return;
    }
    if (const auto* o = c->as<OpCall>()) {
      out += "do " + o->op + " ";
      value(o->arg, true);
      return;
    }
    if (const auto* a = c->as<Apply>()) {
      value(a->fn, true);
      out += ' ';
      value(a->arg, true);
      return;
    }
    if (const auto* i = c->as<If>()) {
      out += "if ";
      value(i->cond, true);
      out += " then ";
      comp(i->then_c);
      out += " else ";
      comp(i->else_c);
      return;
    }
    if (const auto* l = c->as<Let>()) {
      // binder text is chosen up front but scopes over the body only
      std::string text = pick_text(l->binder);
      out += "let " + text + " = ";
      bool bound_is_handle = l->bound->as<Handle>() != nullptr;
      if (bound_is_handle) out += '(';
      comp(l->bound);
      if (bound_is_handle) out += ')';
      out += " in\n";
      Scope s(*this, l->binder, text);
      comp(l->body);
      return;
    }
    if (const auto* h = c->as<Handle>()) {
      out += "with ";
      handler(*h->handler);
      out += " handle ";
      comp(h->body);
      return;
    }
    if (const auto* p = c->as<Proj>()) {
      value(p->record, true);
      out += '.' + p->label;
      return;
    }
    if (const auto* asc = c->as<Ascribe>()) {
      out += '(';
      comp(asc->body);
      out += " : " + to_string(asc->type) + ')';
      return;
    }
  }
};

}  // namespace

std::string print_comp(const CompPtr& c) {
  Printer p;
  for (const auto& n : free_vars(c)) p.free_texts.insert(n.text);
  p.comp(c);
  return p.out;
}

std::string print_value(const ValuePtr& v) {
  Printer p;
  for (const auto& n : free_vars(v)) p.free_texts.insert(n.text);
  p.value(v, false);
  return p.out;
}

std::string print_program(const Program& p) {
  std::string out;
  for (const auto& [op, sig] : p.sig->st) {
    out += "effect " + op + " : " + to_string(st_arrow(sig.arg, sig.result)) + "\n";
  }
  for (const auto& [op, sig] : p.sig->atm) {
    out += "effect " + op + " : " + to_string(atm_arrow(sig.arg, sig.result_comp())) + "\n";
  }
  out += "main =\n";
  out += print_comp(p.main);
  out += "\n";
  return out;
}

}  // namespace feh
