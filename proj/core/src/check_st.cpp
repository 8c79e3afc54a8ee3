#include "feh/check_st.hpp"

namespace feh {

namespace {

using R = Result<SimpleTypePtr, StError>;

R err(std::string rule, Span sp, std::string msg) {
  return R::failure(StError{std::move(rule), sp, std::move(msg)});
}

SimpleTypePtr binder_annotation(const Binder& b) {
  if (b.st_ann) return b.st_ann;
  if (b.atm_ann) return erase_to_simple(b.atm_ann);
  return nullptr;
}

struct Checker {
  const Signature& sig;

  R value(StEnv& env, const ValuePtr& v) {
    if (const auto* x = v->as<Var>()) {
      auto it = env.find(x->name.id);
      if (it == env.end()) {
        return err("St-Var", v->span, "unbound variable '" + x->name.text + "'");
      }
      return it->second;
    }
    if (v->as<UnitLit>()) return st_unit();
    if (v->as<BoolLit>()) return st_bool();
    if (const auto* l = v->as<Lam>()) {
      auto dom = binder_annotation(l->binder);
      if (!dom) {
        return err("St-Lam", v->span,
                   "needs-annotation: lambda binder '" + l->binder.name.text +
                       "' has no simple type");
      }
      auto saved = bind(env, l->binder.name.id, dom);
      auto cod = comp(env, l->body);
      restore(env, l->binder.name.id, saved);
      if (!cod.ok()) return cod;
      return st_arrow(dom, cod.value());
    }
    if (const auto* r = v->as<RecFun>()) {
      auto ty = binder_annotation(r->binder);
      if (!ty) {
        return err("St-Rec", v->span,
                   "needs-annotation: rec binder '" + r->binder.name.text +
                       "' has no simple type");
      }
      auto saved = bind(env, r->binder.name.id, ty);
      auto body = value(env, r->body);
      restore(env, r->binder.name.id, saved);
      if (!body.ok()) return body;
      if (!st_equal(body.value(), ty)) {
        return err("St-Rec", v->span,
                   "rec body has type " + to_string(body.value()) +
                       ", annotation says " + to_string(ty));
      }
      return ty;
    }
    if (const auto* rec = v->as<RecordLit>()) {
      std::vector<std::pair<std::string, SimpleTypePtr>> fields;
      for (const auto& [l, f] : rec->fields) {
        auto ft = value(env, f);
        if (!ft.ok()) return ft;
        fields.emplace_back(l, ft.value());
      }
      return st_record(std::move(fields));
    }
    return err("St", v->span, "unknown value form");
  }

  R comp(StEnv& env, const CompPtr& c) {
    if (const auto* r = c->as<Return>()) return value(env, r->value);
    if (const auto* o = c->as<OpCall>()) {
      auto it = sig.st.find(o->op);
      if (it == sig.st.end()) {
        return err("St-Op", c->span, "operation '" + o->op + "' has no simple signature");
      }
      auto arg = value(env, o->arg);
      if (!arg.ok()) return arg;
      if (!st_equal(arg.value(), it->second.arg)) {
        return err("St-Op", c->span,
                   "operation '" + o->op + "' expects " + to_string(it->second.arg) +
                       ", argument has type " + to_string(arg.value()));
      }
      return it->second.result;
    }
    if (const auto* a = c->as<Apply>()) {
      auto fn = value(env, a->fn);
      if (!fn.ok()) return fn;
      if (fn.value()->kind != SimpleType::Kind::Arrow) {
        return err("St-App", c->span,
                   "application of a non-function of type " + to_string(fn.value()));
      }
      auto arg = value(env, a->arg);
      if (!arg.ok()) return arg;
      if (!st_equal(arg.value(), fn.value()->dom)) {
        return err("St-App", c->span,
                   "function expects " + to_string(fn.value()->dom) +
                       ", argument has type " + to_string(arg.value()));
      }
      return fn.value()->cod;
    }
    if (const auto* i = c->as<If>()) {
      auto cond = value(env, i->cond);
      if (!cond.ok()) return cond;
      if (cond.value()->kind != SimpleType::Kind::Bool) {
        return err("St-If", c->span, "condition has type " + to_string(cond.value()));
      }
      auto t = comp(env, i->then_c);
      if (!t.ok()) return t;
      auto e = comp(env, i->else_c);
      if (!e.ok()) return e;
      if (!st_equal(t.value(), e.value())) {
        return err("St-If", c->span,
                   "branches disagree: " + to_string(t.value()) + " vs " +
                       to_string(e.value()));
      }
      return t;
    }
    if (const auto* l = c->as<Let>()) {
      auto bound = comp(env, l->bound);
      if (!bound.ok()) return bound;
      auto saved = bind(env, l->binder.id, bound.value());
      auto body = comp(env, l->body);
      restore(env, l->binder.id, saved);
      return body;
    }
    if (const auto* h = c->as<Handle>()) {
      auto body = comp(env, h->body);
      if (!body.ok()) return body;
      return handler(env, *h->handler, body.value(), c->span);
    }
    if (const auto* p = c->as<Proj>()) {
      auto rec = value(env, p->record);
      if (!rec.ok()) return rec;
      if (rec.value()->kind != SimpleType::Kind::Record) {
        return err("St-Proj", c->span,
                   "projection from a non-record of type " + to_string(rec.value()));
      }
      for (const auto& [l, ft] : rec.value()->fields) {
        if (l == p->label) return ft;
      }
      return err("St-Proj", c->span, "record has no field '" + p->label + "'");
    }
    if (const auto* asc = c->as<Ascribe>()) {
      return comp(env, asc->body);  // ATM metadata; transparent here
    }
    return err("St", c->span, "unknown computation form");
  }

  // (St-Hdlr) + (St-Han): all clause bodies, the return-clause body, and all
  // continuation codomains share one answer type.
  R handler(StEnv& env, const Handler& h, const SimpleTypePtr& body_ty, Span sp) {
    auto saved = bind(env, h.ret_binder.id, body_ty);
    auto answer = comp(env, h.ret_body);
    restore(env, h.ret_binder.id, saved);
    if (!answer.ok()) return answer;
    for (const auto& cl : h.clauses) {
      auto it = sig.st.find(cl.op);
      if (it == sig.st.end()) {
        return err("St-Hdlr", h.span, "operation '" + cl.op + "' has no simple signature");
      }
      auto saved_arg = bind(env, cl.arg.id, it->second.arg);
      auto saved_k = bind(env, cl.kont.id, st_arrow(it->second.result, answer.value()));
      auto body = comp(env, cl.body);
      restore(env, cl.kont.id, saved_k);
      restore(env, cl.arg.id, saved_arg);
      if (!body.ok()) return body;
      if (!st_equal(body.value(), answer.value())) {
        return err("St-Hdlr", sp,
                   "clause '" + cl.op + "' has answer type " + to_string(body.value()) +
                       ", return clause has " + to_string(answer.value()));
      }
    }
    return answer;
  }

  static SimpleTypePtr bind(StEnv& env, uint32_t id, SimpleTypePtr t) {
    auto it = env.find(id);
    SimpleTypePtr old = it == env.end() ? nullptr : it->second;
    env[id] = std::move(t);
    return old;
  }

  static void restore(StEnv& env, uint32_t id, SimpleTypePtr old) {
    if (old) {
      env[id] = std::move(old);
    } else {
      env.erase(id);
    }
  }
};

}  // namespace

Result<SimpleTypePtr, StError> check_st(const Signature& sig, const StEnv& env,
                                        const CompPtr& c) {
  Checker ck{sig};
  StEnv e = env;
  return ck.comp(e, c);
}

Result<SimpleTypePtr, StError> check_st_value(const Signature& sig, const StEnv& env,
                                              const ValuePtr& v) {
  Checker ck{sig};
  StEnv e = env;
  return ck.value(e, v);
}

}  // namespace feh
