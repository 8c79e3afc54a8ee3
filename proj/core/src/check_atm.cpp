#include "feh/check_atm.hpp"

namespace feh {

const char* to_string(TRule r) {
  switch (r) {
    case TRule::Unit: return "T-Unit";
    case TRule::Bool: return "T-Bool";
    case TRule::Var: return "T-Var";
    case TRule::Lam: return "T-Lam";
    case TRule::Rec: return "T-Rec";
    case TRule::If: return "T-If";
    case TRule::App: return "T-App";
    case TRule::LetP: return "T-LetP";
    case TRule::LetIp: return "T-LetIp";
    case TRule::Ret: return "T-Ret";
    case TRule::Op: return "T-Op";
    case TRule::Hdlr: return "T-Hdlr";
    case TRule::Han: return "T-Han";
    case TRule::VSub: return "T-VSub";
    case TRule::CSub: return "T-CSub";
  }
  return "?";
}

const char* to_string(SRule r) {
  switch (r) {
    case SRule::Base: return "S-Base";
    case SRule::Arr: return "S-Arr";
    case SRule::Pure: return "S-Pure";
    case SRule::Ipure: return "S-Ipure";
    case SRule::Embed: return "S-Embed";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Subtyping
// ---------------------------------------------------------------------------

namespace {

SubDerivPtr sub_node(SRule rule, AtmValPtr lv, AtmValPtr rv, std::vector<SubDerivPtr> prem) {
  auto d = std::make_shared<SubDeriv>();
  d->rule = rule;
  d->lv = std::move(lv);
  d->rv = std::move(rv);
  d->premises = std::move(prem);
  return d;
}

SubDerivPtr sub_node_c(SRule rule, AtmCompPtr lc, AtmCompPtr rc,
                       std::vector<SubDerivPtr> prem) {
  auto d = std::make_shared<SubDeriv>();
  d->rule = rule;
  d->lc = std::move(lc);
  d->rc = std::move(rc);
  d->premises = std::move(prem);
  return d;
}

}  // namespace

SubDerivPtr subtype(const AtmValPtr& a, const AtmValPtr& b) {
  if (a->kind != b->kind) return nullptr;
  if (a->kind != AtmVal::Kind::Arrow) {
    // (S-Base)
    return sub_node(SRule::Base, a, b, {});
  }
  // (S-Arr): contravariant domain, covariant codomain
  auto dom = subtype(b->dom, a->dom);
  if (!dom) return nullptr;
  auto cod = subtype(a->cod, b->cod);
  if (!cod) return nullptr;
  return sub_node(SRule::Arr, a, b, {dom, cod});
}

SubDerivPtr subtype(const AtmCompPtr& a, const AtmCompPtr& b) {
  if (a->is_pure() && b->is_pure()) {
    // (S-Pure)
    auto res = subtype(a->result, b->result);
    if (!res) return nullptr;
    return sub_node_c(SRule::Pure, a, b, {res});
  }
  if (a->is_pure() && !b->is_pure()) {
    // (S-Embed): tau1 <= tau2 and rho1 <= rho2 (the right side's answers)
    auto res = subtype(a->result, b->result);
    if (!res) return nullptr;
    auto ans = subtype(b->ans_in, b->ans_out);
    if (!ans) return nullptr;
    return sub_node_c(SRule::Embed, a, b, {res, ans});
  }
  if (!a->is_pure() && !b->is_pure()) {
    // (S-Ipure): contravariant in answer-in
    auto res = subtype(a->result, b->result);
    if (!res) return nullptr;
    auto in = subtype(b->ans_in, a->ans_in);
    if (!in) return nullptr;
    auto out = subtype(a->ans_out, b->ans_out);
    if (!out) return nullptr;
    return sub_node_c(SRule::Ipure, a, b, {res, in, out});
  }
  // effectful <= pure: no rule
  return nullptr;
}

// ---------------------------------------------------------------------------
// Checker
// ---------------------------------------------------------------------------

namespace {

using R = Result<TypeDerivPtr, AtmError>;

R err(std::string rule, Span sp, std::string msg) {
  return R::failure(AtmError{std::move(rule), sp, std::move(msg)});
}

TypeDerivPtr vnode(TRule rule, AtmEnv env, ValuePtr subject, AtmValPtr type,
                   std::vector<TypeDerivPtr> prem = {}, SubDerivPtr sub = nullptr,
                   SignaturePtr sig = nullptr) {
  auto d = std::make_shared<TypeDeriv>();
  d->rule = rule;
  d->env = std::move(env);
  d->vsubject = std::move(subject);
  d->vtype = std::move(type);
  d->premises = std::move(prem);
  d->sub = std::move(sub);
  d->sig = std::move(sig);
  return d;
}

TypeDerivPtr cnode(TRule rule, AtmEnv env, CompPtr subject, AtmCompPtr type,
                   std::vector<TypeDerivPtr> prem = {}, SubDerivPtr sub = nullptr,
                   SignaturePtr sig = nullptr) {
  auto d = std::make_shared<TypeDeriv>();
  d->rule = rule;
  d->env = std::move(env);
  d->csubject = std::move(subject);
  d->ctype = std::move(type);
  d->premises = std::move(prem);
  d->sub = std::move(sub);
  d->sig = std::move(sig);
  return d;
}

struct Checker {
  SignaturePtr sig;

  static AtmEnv extend(const AtmEnv& env, const Name& n, const AtmValPtr& t) {
    AtmEnv out = env;
    out[n.id] = t;
    return out;
  }

  // Wraps with a single T-VSub when the derived type is not exactly the goal.
  R subsume_v(TypeDerivPtr d, const AtmValPtr& want, Span sp) {
    if (atm_equal(d->vtype, want)) return d;
    auto s = subtype(d->vtype, want);
    if (!s) {
      return err("rule-mismatch", sp,
                 "value has type " + to_string(d->vtype) + ", expected " + to_string(want));
    }
    auto env = d->env;
    auto subj = d->vsubject;
    return vnode(TRule::VSub, std::move(env), std::move(subj), want, {std::move(d)},
                 std::move(s));
  }

  R subsume_c(TypeDerivPtr d, const AtmCompPtr& want, Span sp) {
    if (atm_equal(d->ctype, want)) return d;
    auto s = subtype(d->ctype, want);
    if (!s) {
      return err("rule-mismatch", sp,
                 "computation has type " + to_string(d->ctype) + ", expected " +
                     to_string(want));
    }
    auto env = d->env;
    auto subj = d->csubject;
    return cnode(TRule::CSub, std::move(env), std::move(subj), want, {std::move(d)},
                 std::move(s));
  }

  // Lifts a pure-typed derivation to tau / in => out via one (S-Embed).
  R embed(TypeDerivPtr d, const AtmCompPtr& in, const AtmCompPtr& out, Span sp) {
    auto want = atm_eff(d->ctype->result, in, out);
    return subsume_c(std::move(d), want, sp);
  }

  // ---- values -------------------------------------------------------------

  R infer_v(const AtmEnv& env, const ValuePtr& v) {
    if (const auto* x = v->as<Var>()) {
      auto it = env.find(x->name.id);
      if (it == env.end()) {
        return err("T-Var", v->span, "unbound variable '" + x->name.text + "'");
      }
      return vnode(TRule::Var, env, v, it->second);
    }
    if (v->as<UnitLit>()) return vnode(TRule::Unit, env, v, atm_unit());
    if (v->as<BoolLit>()) return vnode(TRule::Bool, env, v, atm_bool());
    if (const auto* l = v->as<Lam>()) {
      if (!l->binder.atm_ann) {
        return err("needs-annotation", v->span,
                   "lambda binder '" + l->binder.name.text +
                       "' has no ATM annotation and no expected type");
      }
      auto body = infer_c(extend(env, l->binder.name, l->binder.atm_ann), l->body);
      if (!body.ok()) return body;
      auto ty = atm_arrow(l->binder.atm_ann, body.value()->ctype);
      return vnode(TRule::Lam, env, v, std::move(ty), {body.value()});
    }
    if (const auto* r = v->as<RecFun>()) {
      if (!r->binder.atm_ann) {
        return err("needs-annotation", v->span,
                   "rec binder '" + r->binder.name.text +
                       "' has no ATM annotation and no expected type");
      }
      return rec_at(env, v, *r, r->binder.atm_ann);
    }
    return err("rule-mismatch", v->span, "records are not typable in the ATM system");
  }

  R rec_at(const AtmEnv& env, const ValuePtr& v, const RecFun& r, const AtmValPtr& ty) {
    auto body = check_v(extend(env, r.binder.name, ty), r.body, ty);
    if (!body.ok()) return body;
    return vnode(TRule::Rec, env, v, ty, {body.value()});
  }

  R check_v(const AtmEnv& env, const ValuePtr& v, const AtmValPtr& want) {
    if (const auto* l = v->as<Lam>()) {
      if (want->kind != AtmVal::Kind::Arrow) {
        return err("rule-mismatch", v->span,
                   "lambda checked against non-function type " + to_string(want));
      }
      // annotated binders that agree with the goal keep the goal's propagation
      if (!l->binder.atm_ann || atm_equal(l->binder.atm_ann, want->dom)) {
        auto body = check_c(extend(env, l->binder.name, want->dom), l->body, want->cod);
        if (!body.ok()) return body;
        return vnode(TRule::Lam, env, v, want, {body.value()});
      }
      auto d = infer_v(env, v);
      if (!d.ok()) return d;
      return subsume_v(d.value(), want, v->span);
    }
    if (const auto* r = v->as<RecFun>()) {
      auto ty = r->binder.atm_ann ? r->binder.atm_ann : want;
      auto d = rec_at(env, v, *r, ty);
      if (!d.ok()) return d;
      return subsume_v(d.value(), want, v->span);
    }
    auto d = infer_v(env, v);
    if (!d.ok()) return d;
    return subsume_v(d.value(), want, v->span);
  }

  // ---- computations -------------------------------------------------------

  R infer_c(const AtmEnv& env, const CompPtr& c) {
    if (const auto* asc = c->as<Ascribe>()) {
      return check_c(env, asc->body, asc->type);
    }
    if (const auto* r = c->as<Return>()) {
      auto dv = infer_v(env, r->value);
      if (!dv.ok()) return dv;
      auto ty = atm_pure(dv.value()->vtype);
      return cnode(TRule::Ret, env, c, std::move(ty), {dv.value()});
    }
    if (const auto* o = c->as<OpCall>()) {
      auto it = sig->atm.find(o->op);
      if (it == sig->atm.end()) {
        return err("T-Op", c->span, "operation '" + o->op + "' has no ATM signature");
      }
      auto darg = check_v(env, o->arg, it->second.arg);
      if (!darg.ok()) return darg;
      return cnode(TRule::Op, env, c, it->second.result_comp(), {darg.value()}, nullptr,
                   sig);
    }
    if (const auto* a = c->as<Apply>()) {
      auto dfn = infer_v(env, a->fn);
      if (!dfn.ok()) return dfn;
      auto fnty = dfn.value()->vtype;
      if (fnty->kind != AtmVal::Kind::Arrow) {
        return err("T-App", c->span, "application of a non-function of type " + to_string(fnty));
      }
      auto darg = check_v(env, a->arg, fnty->dom);
      if (!darg.ok()) return darg;
      return cnode(TRule::App, env, c, fnty->cod, {dfn.value(), darg.value()});
    }
    if (const auto* i = c->as<If>()) {
      auto dc = check_v(env, i->cond, atm_bool());
      if (!dc.ok()) return dc;
      auto d1 = infer_c(env, i->then_c);
      if (!d1.ok()) return d1;
      auto d2 = infer_c(env, i->else_c);
      if (!d2.ok()) return d2;
      auto t1 = d1.value()->ctype;
      auto t2 = d2.value()->ctype;
      if (atm_equal(t1, t2)) {
        return cnode(TRule::If, env, c, t1, {dc.value(), d1.value(), d2.value()});
      }
      if (subtype(t1, t2)) {
        auto d1s = subsume_c(d1.value(), t2, i->then_c->span);
        if (!d1s.ok()) return d1s;
        return cnode(TRule::If, env, c, t2, {dc.value(), d1s.value(), d2.value()});
      }
      if (subtype(t2, t1)) {
        auto d2s = subsume_c(d2.value(), t1, i->else_c->span);
        if (!d2s.ok()) return d2s;
        return cnode(TRule::If, env, c, t1, {dc.value(), d1.value(), d2s.value()});
      }
      return err("rule-mismatch", c->span,
                 "if-branches have incompatible types " + to_string(t1) + " and " +
                     to_string(t2));
    }
    if (const auto* l = c->as<Let>()) {
      auto d1 = infer_c(env, l->bound);
      if (!d1.ok()) return d1;
      auto t1 = d1.value()->ctype;
      auto env2 = extend(env, l->binder, t1->result);
      auto d2 = infer_c(env2, l->body);
      if (!d2.ok()) return d2;
      auto t2 = d2.value()->ctype;
      if (t1->is_pure() && t2->is_pure()) {
        // (T-LetP)
        return cnode(TRule::LetP, env, c, t2, {d1.value(), d2.value()});
      }
      if (t1->is_pure()) {
        // lift c1 to the body's answer-out
        auto d1e = embed(d1.value(), t2->ans_out, t2->ans_out, l->bound->span);
        if (!d1e.ok()) return d1e;
        auto ty = atm_eff(t2->result, t2->ans_in, t2->ans_out);
        return cnode(TRule::LetIp, env, c, std::move(ty), {d1e.value(), d2.value()});
      }
      if (t2->is_pure()) {
        // lift c2 to the middle answer (c1's answer-in)
        auto d2e = embed(d2.value(), t1->ans_in, t1->ans_in, l->body->span);
        if (!d2e.ok()) return d2e;
        auto ty = atm_eff(t2->result, t1->ans_in, t1->ans_out);
        return cnode(TRule::LetIp, env, c, std::move(ty), {d1.value(), d2e.value()});
      }
      // both effectful: the body's answer-out must meet the bound's answer-in
      if (!atm_equal(t2->ans_out, t1->ans_in)) {
        auto want = atm_eff(t2->result, t2->ans_in, t1->ans_in);
        auto d2s = subsume_c(d2.value(), want, l->body->span);
        if (!d2s.ok()) {
          return err("answer-type-mismatch", c->span,
                     "let body changes the answer to " + to_string(t2->ans_out) +
                         " but the bound computation consumes " + to_string(t1->ans_in));
        }
        d2 = d2s;
        t2 = d2.value()->ctype;
      }
      auto ty = atm_eff(t2->result, t2->ans_in, t1->ans_out);
      return cnode(TRule::LetIp, env, c, std::move(ty), {d1.value(), d2.value()});
    }
    if (const auto* h = c->as<Handle>()) {
      return handle_at(env, c, *h, nullptr);
    }
    if (c->as<Proj>()) {
      return err("rule-mismatch", c->span, "records are not typable in the ATM system");
    }
    return err("rule-mismatch", c->span, "unknown computation form");
  }

  R check_c(const AtmEnv& env, const CompPtr& c, const AtmCompPtr& want) {
    if (const auto* asc = c->as<Ascribe>()) {
      auto d = check_c(env, asc->body, asc->type);
      if (!d.ok()) return d;
      return subsume_c(d.value(), want, c->span);
    }
    if (const auto* r = c->as<Return>()) {
      auto dv = check_v(env, r->value, want->result);
      if (!dv.ok()) return dv;
      auto d = cnode(TRule::Ret, env, c, atm_pure(want->result), {dv.value()});
      return subsume_c(std::move(d), want, c->span);
    }
    if (const auto* i = c->as<If>()) {
      auto dc = check_v(env, i->cond, atm_bool());
      if (!dc.ok()) return dc;
      auto d1 = check_c(env, i->then_c, want);
      if (!d1.ok()) return d1;
      auto d2 = check_c(env, i->else_c, want);
      if (!d2.ok()) return d2;
      return cnode(TRule::If, env, c, want, {dc.value(), d1.value(), d2.value()});
    }
    if (const auto* l = c->as<Let>()) {
      if (want->is_pure()) {
        auto d1 = infer_c(env, l->bound);
        if (!d1.ok()) return d1;
        auto t1 = d1.value()->ctype;
        if (!t1->is_pure()) {
          return err("answer-type-mismatch", c->span,
                     "effectful computation of type " + to_string(t1) +
                         " bound in a pure let");
        }
        auto d2 = check_c(extend(env, l->binder, t1->result), l->body, want);
        if (!d2.ok()) return d2;
        return cnode(TRule::LetP, env, c, want, {d1.value(), d2.value()});
      }
      auto d1 = infer_c(env, l->bound);
      if (!d1.ok()) return d1;
      auto t1 = d1.value()->ctype;
      if (!t1->is_pure()) {
        // align c1's answer-out with the goal's
        auto want1 = atm_eff(t1->result, t1->ans_in, want->ans_out);
        auto d1s = subsume_c(d1.value(), want1, l->bound->span);
        if (!d1s.ok()) return d1s;
        auto want2 = atm_eff(want->result, want->ans_in, t1->ans_in);
        auto d2 = check_c(extend(env, l->binder, t1->result), l->body, want2);
        if (!d2.ok()) return d2;
        return cnode(TRule::LetIp, env, c, want, {d1s.value(), d2.value()});
      }
      // pure bound: discover the middle answer from the body
      auto env2 = extend(env, l->binder, t1->result);
      auto probe = infer_c(env2, l->body);
      if (probe.ok() && probe.value()->ctype->is_pure()) {
        auto d2 = check_c(env2, l->body, atm_pure(want->result));
        if (d2.ok()) {
          auto dlet = cnode(TRule::LetP, env, c, atm_pure(want->result),
                            {d1.value(), d2.value()});
          return subsume_c(std::move(dlet), want, c->span);
        }
      }
      AtmCompPtr middle =
          probe.ok() && !probe.value()->ctype->is_pure() ? probe.value()->ctype->ans_out
                                                         : want->ans_out;
      auto d1e = embed(d1.value(), middle, want->ans_out, l->bound->span);
      if (!d1e.ok()) return d1e;
      auto want2 = atm_eff(want->result, want->ans_in, middle);
      auto d2 = check_c(env2, l->body, want2);
      if (!d2.ok()) return d2;
      return cnode(TRule::LetIp, env, c, want, {d1e.value(), d2.value()});
    }
    if (const auto* h = c->as<Handle>()) {
      auto d = handle_at(env, c, *h, want);
      if (!d.ok()) return d;
      return subsume_c(d.value(), want, c->span);
    }
    // synthesize-and-subsume forms: return/op/apply/proj handled above or here
    auto d = infer_c(env, c);
    if (!d.ok()) return d;
    return subsume_c(d.value(), want, c->span);
  }

  // (T-Hdlr): each clause body checks against its signature answer-out, with
  // the continuation at tau' -> answer-in.
  R check_handler(const AtmEnv& env, const HandlerPtr& h) {
    std::vector<TypeDerivPtr> prem;
    for (const auto& cl : h->clauses) {
      auto it = sig->atm.find(cl.op);
      if (it == sig->atm.end()) {
        return err("T-Hdlr", h->span, "operation '" + cl.op + "' has no ATM signature");
      }
      auto env2 = extend(env, cl.arg, it->second.arg);
      env2[cl.kont.id] = atm_arrow(it->second.result, it->second.ans_in);
      auto body = check_c(env2, cl.body, it->second.ans_out);
      if (!body.ok()) return body;
      prem.push_back(body.value());
    }
    auto d = std::make_shared<TypeDeriv>();
    d->rule = TRule::Hdlr;
    d->env = env;
    d->hsubject = h;
    d->premises = std::move(prem);
    d->sig = sig;
    return TypeDerivPtr(d);
  }

  // (T-Han). `want` (nullable) is the expected type of the whole block; it is
  // only used to direct a pure body's embedding.
  R handle_at(const AtmEnv& env, const CompPtr& c, const Handle& h, AtmCompPtr want) {
    auto dh = check_handler(env, h.handler);
    if (!dh.ok()) return dh;
    auto dbody = infer_c(env, h.body);
    if (!dbody.ok()) return dbody;
    auto tbody = dbody.value()->ctype;
    if (tbody->is_pure()) {
      // An op-free body: embed it at the return clause's own type.
      auto renv = extend(env, h.handler->ret_binder, tbody->result);
      auto dret = infer_c(renv, h.handler->ret_body);
      if (!dret.ok()) {
        return err("needs-annotation", c->span,
                   "with-handle over a pure body needs an inferable return clause; add "
                   "an ascription (" +
                       dret.error().message + ")");
      }
      auto rho = dret.value()->ctype;
      auto rho_out = want ? want : rho;
      auto dbe = embed(dbody.value(), rho, rho_out, h.body->span);
      if (!dbe.ok()) return dbe;
      return cnode(TRule::Han, env, c, rho_out,
                   {dh.value(), dbe.value(), dret.value()});
    }
    auto dret = check_c(extend(env, h.handler->ret_binder, tbody->result),
                        h.handler->ret_body, tbody->ans_in);
    if (!dret.ok()) return dret;
    return cnode(TRule::Han, env, c, tbody->ans_out,
                 {dh.value(), dbody.value(), dret.value()});
  }
};

}  // namespace

Result<TypeDerivPtr, AtmError> check_atm(const SignaturePtr& sig, const AtmEnv& env,
                                         const CompPtr& c, AtmCompPtr expected) {
  Checker ck{sig};
  return expected ? ck.check_c(env, c, expected) : ck.infer_c(env, c);
}

Result<TypeDerivPtr, AtmError> check_atm_value(const SignaturePtr& sig, const AtmEnv& env,
                                               const ValuePtr& v, AtmValPtr expected) {
  Checker ck{sig};
  return expected ? ck.check_v(env, v, expected) : ck.infer_v(env, v);
}

Result<TypeDerivPtr, AtmError> check_atm_program(const Program& p) {
  auto d = check_atm(p.sig, {}, p.main);
  if (!d.ok()) return d;
  if (!d.value()->ctype->is_pure()) {
    return Result<TypeDerivPtr, AtmError>::failure(
        AtmError{"rule-mismatch", p.main->span,
                 "program synthesizes the effectful type " + to_string(d.value()->ctype) +
                     "; programs must have a pure type"});
  }
  return d;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

bool fail(std::string* why, const std::string& msg) {
  if (why) *why = msg;
  return false;
}

const CompPtr& peel(const CompPtr& c) {
  const CompPtr* cur = &c;
  while (const auto* asc = (*cur)->as<Ascribe>()) cur = &asc->body;
  return *cur;
}

bool env_extends(const AtmEnv& base, const AtmEnv& derived,
                 const std::vector<std::pair<uint32_t, AtmValPtr>>& adds, std::string* why) {
  AtmEnv want = base;
  for (const auto& [id, t] : adds) want[id] = t;
  if (want.size() != derived.size()) return fail(why, "environment size mismatch");
  for (const auto& [id, t] : want) {
    auto it = derived.find(id);
    if (it == derived.end() || !atm_equal(it->second, t)) {
      return fail(why, "environment mismatch at tag " + std::to_string(id));
    }
  }
  return true;
}

bool check_sub(const SubDerivPtr& d, std::string* why);

bool check_sub_v(const SubDerivPtr& d, const AtmValPtr& l, const AtmValPtr& r,
                 std::string* why) {
  if (!d || !d->value_form()) return fail(why, "expected a value-form subtyping premise");
  if (!atm_equal(d->lv, l) || !atm_equal(d->rv, r)) {
    return fail(why, "subtyping premise endpoints disagree");
  }
  return check_sub(d, why);
}

bool check_sub_c(const SubDerivPtr& d, const AtmCompPtr& l, const AtmCompPtr& r,
                 std::string* why) {
  if (!d || d->value_form()) return fail(why, "expected a computation-form subtyping premise");
  if (!atm_equal(d->lc, l) || !atm_equal(d->rc, r)) {
    return fail(why, "subtyping premise endpoints disagree");
  }
  return check_sub(d, why);
}

bool check_sub(const SubDerivPtr& d, std::string* why) {
  switch (d->rule) {
    case SRule::Base:
      if (!d->value_form() || d->lv->kind == AtmVal::Kind::Arrow ||
          d->lv->kind != d->rv->kind || !d->premises.empty()) {
        return fail(why, "malformed S-Base");
      }
      return true;
    case SRule::Arr: {
      if (!d->value_form() || d->lv->kind != AtmVal::Kind::Arrow ||
          d->rv->kind != AtmVal::Kind::Arrow || d->premises.size() != 2) {
        return fail(why, "malformed S-Arr");
      }
      return check_sub_v(d->premises[0], d->rv->dom, d->lv->dom, why) &&
             check_sub_c(d->premises[1], d->lv->cod, d->rv->cod, why);
    }
    case SRule::Pure: {
      if (d->value_form() || !d->lc->is_pure() || !d->rc->is_pure() ||
          d->premises.size() != 1) {
        return fail(why, "malformed S-Pure");
      }
      return check_sub_v(d->premises[0], d->lc->result, d->rc->result, why);
    }
    case SRule::Ipure: {
      if (d->value_form() || d->lc->is_pure() || d->rc->is_pure() ||
          d->premises.size() != 3) {
        return fail(why, "malformed S-Ipure");
      }
      return check_sub_v(d->premises[0], d->lc->result, d->rc->result, why) &&
             check_sub_c(d->premises[1], d->rc->ans_in, d->lc->ans_in, why) &&
             check_sub_c(d->premises[2], d->lc->ans_out, d->rc->ans_out, why);
    }
    case SRule::Embed: {
      if (d->value_form() || !d->lc->is_pure() || d->rc->is_pure() ||
          d->premises.size() != 2) {
        return fail(why, "malformed S-Embed");
      }
      return check_sub_v(d->premises[0], d->lc->result, d->rc->result, why) &&
             check_sub_c(d->premises[1], d->rc->ans_in, d->rc->ans_out, why);
    }
  }
  return fail(why, "unknown subtyping rule");
}

bool check_node(const TypeDerivPtr& d, std::string* why);

bool premise_at(const TypeDerivPtr& d, size_t i, std::string* why,
                const TypeDerivPtr** out) {
  if (i >= d->premises.size() || !d->premises[i]) {
    return fail(why, std::string(to_string(d->rule)) + ": missing premise");
  }
  *out = &d->premises[i];
  return true;
}

bool check_node(const TypeDerivPtr& d, std::string* why) {
  if (!d) return fail(why, "null derivation");
  switch (d->rule) {
    case TRule::Unit:
      if (!d->vsubject || !d->vsubject->as<UnitLit>() ||
          d->vtype->kind != AtmVal::Kind::Unit || !d->premises.empty()) {
        return fail(why, "malformed T-Unit");
      }
      return true;
    case TRule::Bool:
      if (!d->vsubject || !d->vsubject->as<BoolLit>() ||
          d->vtype->kind != AtmVal::Kind::Bool || !d->premises.empty()) {
        return fail(why, "malformed T-Bool");
      }
      return true;
    case TRule::Var: {
      const auto* x = d->vsubject ? d->vsubject->as<Var>() : nullptr;
      if (!x || !d->premises.empty()) return fail(why, "malformed T-Var");
      auto it = d->env.find(x->name.id);
      if (it == d->env.end() || !atm_equal(it->second, d->vtype)) {
        return fail(why, "T-Var: type not bound in the environment");
      }
      return true;
    }
    case TRule::Lam: {
      const auto* l = d->vsubject ? d->vsubject->as<Lam>() : nullptr;
      if (!l || d->premises.size() != 1 || d->vtype->kind != AtmVal::Kind::Arrow) {
        return fail(why, "malformed T-Lam");
      }
      const TypeDerivPtr* p;
      if (!premise_at(d, 0, why, &p)) return false;
      if (peel((*p)->csubject) != peel(l->body)) return fail(why, "T-Lam: wrong subject");
      if (!atm_equal((*p)->ctype, d->vtype->cod)) return fail(why, "T-Lam: wrong body type");
      return env_extends(d->env, (*p)->env, {{l->binder.name.id, d->vtype->dom}}, why) &&
             check_node(*p, why);
    }
    case TRule::Rec: {
      const auto* r = d->vsubject ? d->vsubject->as<RecFun>() : nullptr;
      if (!r || d->premises.size() != 1) return fail(why, "malformed T-Rec");
      const TypeDerivPtr* p;
      if (!premise_at(d, 0, why, &p)) return false;
      if ((*p)->vsubject != r->body) return fail(why, "T-Rec: wrong subject");
      if (!atm_equal((*p)->vtype, d->vtype)) return fail(why, "T-Rec: premise type differs");
      return env_extends(d->env, (*p)->env, {{r->binder.name.id, d->vtype}}, why) &&
             check_node(*p, why);
    }
    case TRule::If: {
      const auto* i = d->csubject ? peel(d->csubject)->as<If>() : nullptr;
      if (!i || d->premises.size() != 3) return fail(why, "malformed T-If");
      const auto& dc = d->premises[0];
      const auto& d1 = d->premises[1];
      const auto& d2 = d->premises[2];
      if (dc->vsubject != i->cond || dc->vtype->kind != AtmVal::Kind::Bool) {
        return fail(why, "T-If: condition premise");
      }
      if (peel(d1->csubject) != peel(i->then_c) || peel(d2->csubject) != peel(i->else_c)) {
        return fail(why, "T-If: wrong branch subjects");
      }
      if (!atm_equal(d1->ctype, d->ctype) || !atm_equal(d2->ctype, d->ctype)) {
        return fail(why, "T-If: branch types differ from the node type");
      }
      return env_extends(d->env, dc->env, {}, why) &&
             env_extends(d->env, d1->env, {}, why) &&
             env_extends(d->env, d2->env, {}, why) && check_node(dc, why) &&
             check_node(d1, why) && check_node(d2, why);
    }
    case TRule::App: {
      const auto* a = d->csubject ? peel(d->csubject)->as<Apply>() : nullptr;
      if (!a || d->premises.size() != 2) return fail(why, "malformed T-App");
      const auto& dfn = d->premises[0];
      const auto& darg = d->premises[1];
      if (dfn->vsubject != a->fn || darg->vsubject != a->arg) {
        return fail(why, "T-App: wrong subjects");
      }
      if (dfn->vtype->kind != AtmVal::Kind::Arrow ||
          !atm_equal(dfn->vtype->dom, darg->vtype) ||
          !atm_equal(dfn->vtype->cod, d->ctype)) {
        return fail(why, "T-App: types do not line up");
      }
      return env_extends(d->env, dfn->env, {}, why) &&
             env_extends(d->env, darg->env, {}, why) && check_node(dfn, why) &&
             check_node(darg, why);
    }
    case TRule::LetP: {
      const auto* l = d->csubject ? peel(d->csubject)->as<Let>() : nullptr;
      if (!l || d->premises.size() != 2) return fail(why, "malformed T-LetP");
      const auto& d1 = d->premises[0];
      const auto& d2 = d->premises[1];
      if (peel(d1->csubject) != peel(l->bound) || peel(d2->csubject) != peel(l->body)) {
        return fail(why, "T-LetP: wrong subjects");
      }
      if (!d1->ctype->is_pure() || !d2->ctype->is_pure() ||
          !atm_equal(d2->ctype, d->ctype) || !d->ctype->is_pure()) {
        return fail(why, "T-LetP: premise types must be pure");
      }
      return env_extends(d->env, d1->env, {}, why) &&
             env_extends(d->env, d2->env, {{l->binder.id, d1->ctype->result}}, why) &&
             check_node(d1, why) && check_node(d2, why);
    }
    case TRule::LetIp: {
      const auto* l = d->csubject ? peel(d->csubject)->as<Let>() : nullptr;
      if (!l || d->premises.size() != 2) return fail(why, "malformed T-LetIp");
      const auto& d1 = d->premises[0];
      const auto& d2 = d->premises[1];
      if (peel(d1->csubject) != peel(l->bound) || peel(d2->csubject) != peel(l->body)) {
        return fail(why, "T-LetIp: wrong subjects");
      }
      const auto& t1 = d1->ctype;
      const auto& t2 = d2->ctype;
      if (t1->is_pure() || t2->is_pure() || d->ctype->is_pure()) {
        return fail(why, "T-LetIp: premises must be effectful");
      }
      // c1 : tau1/rho1 => rho1'   c2 : tau2/rho2 => rho1   |- tau2/rho2 => rho1'
      if (!atm_equal(t2->ans_out, t1->ans_in)) {
        return fail(why, "T-LetIp: answers do not compose");
      }
      if (!atm_equal(d->ctype->result, t2->result) ||
          !atm_equal(d->ctype->ans_in, t2->ans_in) ||
          !atm_equal(d->ctype->ans_out, t1->ans_out)) {
        return fail(why, "T-LetIp: conclusion type mismatch");
      }
      return env_extends(d->env, d1->env, {}, why) &&
             env_extends(d->env, d2->env, {{l->binder.id, t1->result}}, why) &&
             check_node(d1, why) && check_node(d2, why);
    }
    case TRule::Ret: {
      const auto* r = d->csubject ? peel(d->csubject)->as<Return>() : nullptr;
      if (!r || d->premises.size() != 1) return fail(why, "malformed T-Ret");
      const auto& dv = d->premises[0];
      if (dv->vsubject != r->value) return fail(why, "T-Ret: wrong subject");
      if (!d->ctype->is_pure() || !atm_equal(d->ctype->result, dv->vtype)) {
        return fail(why, "T-Ret: type must be the pure type of the value");
      }
      return env_extends(d->env, dv->env, {}, why) && check_node(dv, why);
    }
    case TRule::Op: {
      const auto* o = d->csubject ? peel(d->csubject)->as<OpCall>() : nullptr;
      if (!o || d->premises.size() != 1 || !d->sig) return fail(why, "malformed T-Op");
      auto it = d->sig->atm.find(o->op);
      if (it == d->sig->atm.end()) return fail(why, "T-Op: operation not in signature");
      const auto& dv = d->premises[0];
      if (dv->vsubject != o->arg || !atm_equal(dv->vtype, it->second.arg)) {
        return fail(why, "T-Op: argument premise mismatch");
      }
      if (!atm_equal(d->ctype, it->second.result_comp())) {
        return fail(why, "T-Op: conclusion differs from the signature");
      }
      return env_extends(d->env, dv->env, {}, why) && check_node(dv, why);
    }
    case TRule::Hdlr: {
      if (!d->hsubject || !d->sig) return fail(why, "malformed T-Hdlr");
      const auto& h = *d->hsubject;
      if (d->premises.size() != h.clauses.size()) {
        return fail(why, "T-Hdlr: one premise per operation clause required");
      }
      for (size_t i = 0; i < h.clauses.size(); ++i) {
        const auto& cl = h.clauses[i];
        auto it = d->sig->atm.find(cl.op);
        if (it == d->sig->atm.end()) return fail(why, "T-Hdlr: operation not in signature");
        const auto& p = d->premises[i];
        if (peel(p->csubject) != peel(cl.body)) return fail(why, "T-Hdlr: wrong clause subject");
        if (!atm_equal(p->ctype, it->second.ans_out)) {
          return fail(why, "T-Hdlr: clause body must have the signature's answer-out type");
        }
        if (!env_extends(d->env, p->env,
                         {{cl.arg.id, it->second.arg},
                          {cl.kont.id, atm_arrow(it->second.result, it->second.ans_in)}},
                         why)) {
          return false;
        }
        if (!check_node(p, why)) return false;
      }
      return true;
    }
    case TRule::Han: {
      const auto* hn = d->csubject ? peel(d->csubject)->as<Handle>() : nullptr;
      if (!hn || d->premises.size() != 3) return fail(why, "malformed T-Han");
      const auto& dh = d->premises[0];
      const auto& dbody = d->premises[1];
      const auto& dret = d->premises[2];
      if (dh->rule != TRule::Hdlr || dh->hsubject != hn->handler) {
        return fail(why, "T-Han: first premise must type the handler");
      }
      if (peel(dbody->csubject) != peel(hn->body)) return fail(why, "T-Han: wrong body subject");
      const auto& tb = dbody->ctype;
      if (tb->is_pure()) return fail(why, "T-Han: body must be effectful");
      if (!atm_equal(tb->ans_out, d->ctype)) {
        return fail(why, "T-Han: conclusion must be the body's answer-out");
      }
      if (peel(dret->csubject) != peel(hn->handler->ret_body)) {
        return fail(why, "T-Han: wrong return-clause subject");
      }
      if (!atm_equal(dret->ctype, tb->ans_in)) {
        return fail(why, "T-Han: return clause must have the body's answer-in type");
      }
      return env_extends(d->env, dh->env, {}, why) &&
             env_extends(d->env, dbody->env, {}, why) &&
             env_extends(d->env, dret->env,
                         {{hn->handler->ret_binder.id, tb->result}}, why) &&
             check_node(dh, why) && check_node(dbody, why) && check_node(dret, why);
    }
    case TRule::VSub: {
      if (d->premises.size() != 1 || !d->sub || !d->sub->value_form() || !d->vsubject) {
        return fail(why, "malformed T-VSub");
      }
      const auto& p = d->premises[0];
      if (p->vsubject != d->vsubject) return fail(why, "T-VSub: wrong subject");
      if (!atm_equal(d->sub->lv, p->vtype) || !atm_equal(d->sub->rv, d->vtype)) {
        return fail(why, "T-VSub: coercion endpoints disagree with the node types");
      }
      return env_extends(d->env, p->env, {}, why) && check_sub(d->sub, why) &&
             check_node(p, why);
    }
    case TRule::CSub: {
      if (d->premises.size() != 1 || !d->sub || d->sub->value_form() || !d->csubject) {
        return fail(why, "malformed T-CSub");
      }
      const auto& p = d->premises[0];
      if (peel(p->csubject) != peel(d->csubject)) return fail(why, "T-CSub: wrong subject");
      if (!atm_equal(d->sub->lc, p->ctype) || !atm_equal(d->sub->rc, d->ctype)) {
        return fail(why, "T-CSub: coercion endpoints disagree with the node types");
      }
      return env_extends(d->env, p->env, {}, why) && check_sub(d->sub, why) &&
             check_node(p, why);
    }
  }
  return fail(why, "unknown typing rule");
}

}  // namespace

bool validate_derivation(const SubDerivPtr& d, std::string* why) {
  if (!d) return fail(why, "null derivation");
  return check_sub(d, why);
}

bool validate_derivation(const TypeDerivPtr& d, std::string* why) {
  return check_node(d, why);
}

}  // namespace feh
