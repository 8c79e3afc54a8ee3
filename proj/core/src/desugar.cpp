#include "feh/desugar.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace feh {

namespace {

using namespace surface;

// ---------------------------------------------------------------------------
// Surface-level substitution (for mrec expansion)
// ---------------------------------------------------------------------------

ExprPtr surf_subst(const ExprPtr& e, const std::string& name, const ExprPtr& repl);

HandlerExprPtr surf_subst_handler(const HandlerExprPtr& h, const std::string& name,
                                  const ExprPtr& repl) {
  auto out = std::make_shared<HandlerExpr>(*h);
  if (out->ret_binder != name) out->ret_body = surf_subst(out->ret_body, name, repl);
  for (auto& cl : out->clauses) {
    if (cl.arg != name && cl.kont != name) cl.body = surf_subst(cl.body, name, repl);
  }
  return out;
}

ExprPtr surf_subst(const ExprPtr& e, const std::string& name, const ExprPtr& repl) {
  if (const auto* v = e->as<EVar>()) {
    return v->name == name ? repl : e;
  }
  if (e->as<EUnit>() || e->as<EBool>()) return e;
  if (const auto* f = e->as<EFun>()) {
    if (f->binder.name == name) return e;
    return mk(EFun{f->binder, surf_subst(f->body, name, repl)}, e->span);
  }
  if (const auto* r = e->as<ERec>()) {
    if (r->binder.name == name) return e;
    return mk(ERec{r->binder, surf_subst(r->body, name, repl)}, e->span);
  }
  if (const auto* a = e->as<EApp>()) {
    return mk(EApp{surf_subst(a->fn, name, repl), surf_subst(a->arg, name, repl)}, e->span);
  }
  if (const auto* i = e->as<EIf>()) {
    return mk(EIf{surf_subst(i->cond, name, repl), surf_subst(i->then_e, name, repl),
                  surf_subst(i->else_e, name, repl)},
              e->span);
  }
  if (const auto* l = e->as<ELet>()) {
    auto bound = surf_subst(l->bound, name, repl);
    auto body = l->binder == name ? l->body : surf_subst(l->body, name, repl);
    return mk(ELet{l->binder, std::move(bound), std::move(body)}, e->span);
  }
  if (const auto* s = e->as<ESeq>()) {
    return mk(ESeq{surf_subst(s->first, name, repl), surf_subst(s->second, name, repl)},
              e->span);
  }
  if (const auto* r = e->as<EReturn>()) {
    return mk(EReturn{surf_subst(r->value, name, repl)}, e->span);
  }
  if (const auto* o = e->as<EOp>()) {
    return mk(EOp{o->op, surf_subst(o->arg, name, repl)}, e->span);
  }
  if (const auto* h = e->as<EHandle>()) {
    auto handler = h->handler ? surf_subst_handler(h->handler, name, repl) : nullptr;
    return mk(EHandle{std::move(handler), h->handler_ref,
                      surf_subst(h->body, name, repl)},
              e->span);
  }
  if (const auto* r = e->as<ERecord>()) {
    ERecord out;
    for (const auto& [l, f] : r->fields) out.fields.emplace_back(l, surf_subst(f, name, repl));
    return mk(std::move(out), e->span);
  }
  if (const auto* p = e->as<EProj>()) {
    return mk(EProj{surf_subst(p->record, name, repl), p->label}, e->span);
  }
  if (const auto* a = e->as<EAscribe>()) {
    return mk(EAscribe{surf_subst(a->body, name, repl), a->type}, e->span);
  }
  if (const auto* m = e->as<EMRec>()) {
    for (const auto& b : m->bindings) {
      if (b.binder.name == name) return e;  // all bindings scope over values and body
    }
    EMRec out;
    for (const auto& b : m->bindings) {
      out.bindings.push_back({b.binder, surf_subst(b.value, name, repl)});
    }
    out.body = surf_subst(m->body, name, repl);
    return mk(std::move(out), e->span);
  }
  return e;
}

// Value-position expansion of `mrec fs in v`: substitutes a rec closure for
// every binding name, each closure expanding the remaining bindings.
ExprPtr expand_mrec_value(const std::vector<MRecBinding>& bindings, const ExprPtr& v) {
  ExprPtr out = v;
  for (size_t j = 0; j < bindings.size(); ++j) {
    std::vector<MRecBinding> rest;
    for (size_t i = 0; i < bindings.size(); ++i) {
      if (i != j) rest.push_back(bindings[i]);
    }
    auto inner = expand_mrec_value(rest, bindings[j].value);
    auto closure = mk(ERec{bindings[j].binder, std::move(inner)}, v->span);
    out = surf_subst(out, bindings[j].binder.name, closure);
  }
  return out;
}

// Computation-position expansion: one let per binding around the body.
ExprPtr expand_mrec_comp(const EMRec& m, Span sp) {
  ExprPtr out = m.body;
  for (size_t j = m.bindings.size(); j-- > 0;) {
    std::vector<MRecBinding> rest;
    for (size_t i = 0; i < m.bindings.size(); ++i) {
      if (i != j) rest.push_back(m.bindings[i]);
    }
    auto inner = expand_mrec_value(rest, m.bindings[j].value);
    auto closure = mk(ERec{m.bindings[j].binder, std::move(inner)}, sp);
    out = mk(ELet{m.bindings[j].binder.name, std::move(closure), std::move(out)}, sp);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Elaboration to core
// ---------------------------------------------------------------------------

struct Elab {
  NameSupply& supply;
  const Signature* sig;
  const std::vector<Def>* defs;
  bool allow_free;
  std::map<std::string, Name> scope;
  std::set<std::string> expanding;  // def-recursion guard

  using Prefix = std::vector<std::pair<Name, CompPtr>>;

  const Def* find_def(const std::string& name) const {
    if (!defs) return nullptr;
    for (const auto& d : *defs) {
      if (d.name == name) return &d;
    }
    return nullptr;
  }

  [[noreturn]] void fail(const std::string& msg, Span sp) const {
    throw ParseError(msg, sp);
  }

  Binder make_binder(const BinderExpr& b) {
    Binder out;
    out.name = supply.fresh(b.name);
    if (b.ann2) {
      out.st_ann = to_simple(b.ann1);
      if (!out.st_ann) fail("left annotation of '~' must be a simple type", b.span);
      out.atm_ann = to_atm_value(b.ann2);
      if (!out.atm_ann) fail("right annotation of '~' must be an ATM value type", b.span);
    } else if (b.ann1) {
      out.st_ann = to_simple(b.ann1);
      out.atm_ann = to_atm_value(b.ann1);
      if (!out.st_ann && !out.atm_ann) {
        fail("annotation is neither a simple type nor an ATM value type", b.span);
      }
    }
    return out;
  }

  CompPtr wrap(Prefix prefix, CompPtr core) {
    for (size_t i = prefix.size(); i-- > 0;) {
      core = mk_let(prefix[i].first, std::move(prefix[i].second), std::move(core));
    }
    return core;
  }

  ValuePtr as_value(const ExprPtr& e, Prefix& prefix) {
    if (const auto* v = e->as<EVar>()) {
      auto it = scope.find(v->name);
      if (it != scope.end()) return mk_var(it->second, e->span);
      if (const Def* d = find_def(v->name)) {
        if (d->handler) fail("handler definition '" + v->name + "' used as a value", e->span);
        if (expanding.count(v->name)) fail("recursive definition '" + v->name + "'", e->span);
        expanding.insert(v->name);
        auto saved = std::move(scope);
        scope.clear();
        auto out = as_value(d->expr, prefix);
        scope = std::move(saved);
        expanding.erase(v->name);
        return out;
      }
      if (!allow_free) fail("unbound variable '" + v->name + "'", e->span);
      return mk_var(Name{v->name, 0}, e->span);
    }
    if (e->as<EUnit>()) return mk_unit(e->span);
    if (const auto* b = e->as<EBool>()) return mk_bool(b->value, e->span);
    if (const auto* f = e->as<EFun>()) {
      Binder b = make_binder(f->binder);
      auto saved = scope;
      scope[f->binder.name] = b.name;
      auto body = comp(f->body);
      scope = std::move(saved);
      return mk_lam(std::move(b), std::move(body), e->span);
    }
    if (const auto* r = e->as<ERec>()) {
      Binder b = make_binder(r->binder);
      auto saved = scope;
      scope[r->binder.name] = b.name;
      Prefix inner;
      auto body = as_value(r->body, inner);
      if (!inner.empty()) fail("the body of 'rec' must be a value", e->span);
      scope = std::move(saved);
      return mk_rec(std::move(b), std::move(body), e->span);
    }
    if (const auto* r = e->as<ERecord>()) {
      std::vector<std::pair<std::string, ValuePtr>> fields;
      for (const auto& [l, fe] : r->fields) fields.emplace_back(l, as_value(fe, prefix));
      try {
        return mk_record(std::move(fields), e->span);
      } catch (const std::invalid_argument& ex) {
        fail(ex.what(), e->span);
      }
    }
    // computation in value position: bind through a fresh let
    auto c = comp(e);
    Name w = supply.fresh("w");
    prefix.emplace_back(w, std::move(c));
    return mk_var(w, e->span);
  }

  CompPtr comp(const ExprPtr& e) {
    if (const auto* r = e->as<EReturn>()) {
      Prefix p;
      auto v = as_value(r->value, p);
      return wrap(std::move(p), mk_return(std::move(v), e->span));
    }
    if (const auto* o = e->as<EOp>()) {
      if (sig && !sig->declares(o->op)) {
        fail("operation '" + o->op + "' has no signature entry", e->span);
      }
      Prefix p;
      auto v = as_value(o->arg, p);
      return wrap(std::move(p), mk_opcall(o->op, std::move(v), e->span));
    }
    if (const auto* a = e->as<EApp>()) {
      Prefix p;
      auto fn = as_value(a->fn, p);
      auto arg = as_value(a->arg, p);
      return wrap(std::move(p), mk_apply(std::move(fn), std::move(arg), e->span));
    }
    if (const auto* i = e->as<EIf>()) {
      Prefix p;
      auto c = as_value(i->cond, p);
      return wrap(std::move(p),
                  mk_if(std::move(c), comp(i->then_e), comp(i->else_e), e->span));
    }
    if (const auto* l = e->as<ELet>()) {
      auto bound = comp(l->bound);
      Name b = supply.fresh(l->binder);
      auto saved = scope;
      scope[l->binder] = b;
      auto body = comp(l->body);
      scope = std::move(saved);
      return mk_let(b, std::move(bound), std::move(body), e->span);
    }
    if (const auto* s = e->as<ESeq>()) {
      auto first = comp(s->first);
      Name b = supply.fresh("_");
      return mk_let(b, std::move(first), comp(s->second), e->span);
    }
    if (const auto* h = e->as<EHandle>()) {
      const HandlerExpr* lit = h->handler.get();
      HandlerExprPtr resolved;
      if (!lit) {
        const Def* d = find_def(h->handler_ref);
        if (!d || !d->handler) {
          fail("'" + h->handler_ref + "' is not a handler definition", e->span);
        }
        resolved = d->handler;
        lit = resolved.get();
      }
      Name rb = supply.fresh(lit->ret_binder);
      auto saved = scope;
      scope[lit->ret_binder] = rb;
      auto ret_body = comp(lit->ret_body);
      scope = saved;
      std::vector<OpClause> clauses;
      for (const auto& cl : lit->clauses) {
        if (sig && !sig->declares(cl.op)) {
          fail("operation '" + cl.op + "' has no signature entry", cl.span);
        }
        OpClause out;
        out.op = cl.op;
        out.arg = supply.fresh(cl.arg);
        out.kont = supply.fresh(cl.kont);
        scope = saved;
        scope[cl.arg] = out.arg;
        scope[cl.kont] = out.kont;
        out.body = comp(cl.body);
        clauses.push_back(std::move(out));
      }
      scope = std::move(saved);
      HandlerPtr handler;
      try {
        handler = mk_handler(rb, std::move(ret_body), std::move(clauses), lit->span);
      } catch (const std::invalid_argument& ex) {
        fail(ex.what(), lit->span);
      }
      return mk_handle(std::move(handler), comp(h->body), e->span);
    }
    if (const auto* p = e->as<EProj>()) {
      Prefix pre;
      auto v = as_value(p->record, pre);
      return wrap(std::move(pre), mk_proj(std::move(v), p->label, e->span));
    }
    if (const auto* a = e->as<EAscribe>()) {
      auto t = to_atm_comp(a->type);
      if (!t) fail("ascription must be an ATM computation type", e->span);
      return mk_ascribe(comp(a->body), std::move(t), e->span);
    }
    if (const auto* m = e->as<EMRec>()) {
      return comp(expand_mrec_comp(*m, e->span));
    }
    // value form in computation position
    Prefix p;
    auto v = as_value(e, p);
    return wrap(std::move(p), mk_return(std::move(v), e->span));
  }
};

}  // namespace

CompPtr expand_sugar(const surface::ExprPtr& e, NameSupply& supply, const Signature* sig,
                     const std::vector<surface::Def>* defs, bool allow_free) {
  Elab el{supply, sig, defs, allow_free, {}, {}};
  return el.comp(e);
}

SignaturePtr elaborate_signature(const surface::Module& m) {
  auto sig = std::make_shared<Signature>();
  for (const auto& d : m.effects) {
    if (d.type->kind != surface::TypeExpr::Kind::Arrow) {
      throw ParseError("effect signature must be an arrow type", d.span);
    }
    if (auto st = surface::to_simple(d.type)) {
      if (sig->st.count(d.op)) {
        throw ParseError("duplicate simple signature for operation '" + d.op + "'", d.span);
      }
      sig->st[d.op] = StOpSig{st->dom, st->cod};
      continue;
    }
    auto arg = surface::to_atm_value(d.type->a);
    auto res = surface::to_atm_comp(d.type->b);
    if (!arg || !res || res->is_pure()) {
      throw ParseError(
          "effect signature must be 'S -> S'' or 'T -> T' / R1 => R2'", d.span);
    }
    if (sig->atm.count(d.op)) {
      throw ParseError("duplicate ATM signature for operation '" + d.op + "'", d.span);
    }
    sig->atm[d.op] = AtmOpSig{arg, res->result, res->ans_in, res->ans_out};
  }
  return sig;
}

Program load_program(const std::string& text) {
  auto mod = parse_module(text);
  auto sig = elaborate_signature(mod);
  NameSupply supply;
  auto main = expand_sugar(mod.main, supply, sig.get(), &mod.defs, false);
  if (!main->closed()) {
    auto frees = free_vars(main);
    throw ParseError("program is not closed; free variable '" +
                         (frees.empty() ? std::string("?") : frees.begin()->text) + "'",
                     Span{});
  }
  auto [norm, next] = alpha_normalize(main, 1);
  return Program{std::move(sig), std::move(norm), next};
}

Program load_program_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path, Span{});
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_program(ss.str());
}

}  // namespace feh
