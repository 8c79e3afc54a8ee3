#include "feh/cps.hpp"

#include <cassert>
#include <stdexcept>

namespace feh {

SimpleTypePtr cps_type(const AtmValPtr& t, const Signature& sig) {
  switch (t->kind) {
    case AtmVal::Kind::Unit:
      return st_unit();
    case AtmVal::Kind::Bool:
      return st_bool();
    case AtmVal::Kind::Arrow:
      return st_arrow(cps_type(t->dom, sig), cps_type(t->cod, sig));
  }
  return nullptr;
}

SimpleTypePtr cps_type(const AtmCompPtr& t, const Signature& sig) {
  if (t->is_pure()) return cps_type(t->result, sig);
  return st_arrow(cps_sig_type(sig),
                  st_arrow(st_arrow(cps_type(t->result, sig), cps_type(t->ans_in, sig)),
                           cps_type(t->ans_out, sig)));
}

SimpleTypePtr cps_sig_type(const Signature& sig) {
  std::vector<std::pair<std::string, SimpleTypePtr>> fields;
  for (const auto& [op, entry] : sig.atm) {
    fields.emplace_back(
        op, st_arrow(cps_type(entry.arg, sig),
                     st_arrow(st_arrow(cps_type(entry.result, sig),
                                       cps_type(entry.ans_in, sig)),
                              cps_type(entry.ans_out, sig))));
  }
  return st_record(std::move(fields));
}

CompPtr as_comp(const VC& r) { return r.is_value() ? mk_return(r.v) : r.c; }

namespace {

// λx.return x is the identity coercion; applying it statically is a no-op.
bool is_identity_lambda(const ValuePtr& v) {
  const auto* l = v->as<Lam>();
  if (!l) return false;
  const auto* r = l->body->as<Return>();
  if (!r) return false;
  const auto* x = r->value->as<Var>();
  return x && x->name == l->binder.name;
}

}  // namespace

VC static_apply(const VC& f, const VC& a, NameSupply& supply) {
  if (!f.is_value()) {
    Name g = supply.fresh("g");
    auto rest = static_apply(VC::val(mk_var(g)), a, supply);
    return VC::comp(mk_let(g, f.c, as_comp(rest)));
  }
  if (const auto* lam = f.v->as<Lam>()) {
    if (is_identity_lambda(f.v)) return a;
    if (a.is_value()) {
      return VC::comp(substitute(lam->body, lam->binder.name, a.v));
    }
    Name w = supply.fresh("w");
    return VC::comp(
        mk_let(w, a.c, substitute(lam->body, lam->binder.name, mk_var(w))));
  }
  if (a.is_value()) return VC::comp(mk_apply(f.v, a.v));
  Name w = supply.fresh("w");
  return VC::comp(mk_let(w, a.c, mk_apply(f.v, mk_var(w))));
}

namespace {

Binder st_binder(Name n, SimpleTypePtr t) {
  Binder b;
  b.name = std::move(n);
  b.st_ann = std::move(t);
  return b;
}

// λa.λb.body with annotated binders (inner lambdas are return-wrapped values)
ValuePtr lams(std::vector<Binder> binders, CompPtr body) {
  for (size_t i = binders.size(); i-- > 0;) {
    auto l = mk_lam(std::move(binders[i]), std::move(body));
    if (i == 0) return l;
    body = mk_return(std::move(l));
  }
  return nullptr;
}

// dynamic application of a value to a transform result (sequenced by a let
// when the argument is a computation)
CompPtr dyn_apply(const ValuePtr& f, const VC& a, NameSupply& supply) {
  if (a.is_value()) return mk_apply(f, a.v);
  Name w = supply.fresh("w");
  return mk_let(w, a.c, mk_apply(f, mk_var(w)));
}

struct Cps {
  const Signature& sig;
  NameSupply& supply;

  SimpleTypePtr ty(const AtmValPtr& t) const { return cps_type(t, sig); }
  SimpleTypePtr ty(const AtmCompPtr& t) const { return cps_type(t, sig); }
  SimpleTypePtr sigma() const { return cps_sig_type(sig); }

  // continuation type of an effectful computation type: [tau] -> [rho1]
  SimpleTypePtr kty(const AtmCompPtr& t) const {
    return st_arrow(ty(t->result), ty(t->ans_in));
  }

  ValuePtr coerce(const SubDerivPtr& d) {
    switch (d->rule) {
      case SRule::Base: {
        Name x = supply.fresh("x");
        return mk_lam(st_binder(x, ty(d->lv)), mk_return(mk_var(x)));
      }
      case SRule::Arr: {
        // λf.λx. [cod](f ([dom] x))
        Name f = supply.fresh("f");
        Name x = supply.fresh("x");
        auto inner = static_apply(VC::val(coerce(d->premises[0])), VC::val(mk_var(x)),
                                  supply);
        auto applied = static_apply(VC::val(mk_var(f)), inner, supply);
        auto out = static_apply(VC::val(coerce(d->premises[1])), applied, supply);
        return lams({st_binder(f, ty(d->lv)), st_binder(x, ty(d->rv->dom))},
                    as_comp(out));
      }
      case SRule::Pure: {
        Name x = supply.fresh("x");
        auto out =
            static_apply(VC::val(coerce(d->premises[0])), VC::val(mk_var(x)), supply);
        return mk_lam(st_binder(x, ty(d->lc->result)), as_comp(out));
      }
      case SRule::Ipure: {
        // λx.λh.λk. [out](x h (λy. [in](k ([tau] y))))
        Name x = supply.fresh("x");
        Name h = supply.fresh("h");
        Name k = supply.fresh("k");
        Name y = supply.fresh("y");
        auto cy = static_apply(VC::val(coerce(d->premises[0])), VC::val(mk_var(y)),
                               supply);
        auto ky = static_apply(VC::val(mk_var(k)), cy, supply);
        auto iny = static_apply(VC::val(coerce(d->premises[1])), ky, supply);
        auto konts =
            mk_lam(st_binder(y, ty(d->lc->result)), as_comp(iny));
        auto xh = static_apply(VC::val(mk_var(x)), VC::val(mk_var(h)), supply);
        auto xhk = static_apply(xh, VC::val(konts), supply);
        auto out = static_apply(VC::val(coerce(d->premises[2])), xhk, supply);
        return lams({st_binder(x, ty(d->lc)), st_binder(h, sigma()),
                     st_binder(k, kty(d->rc))},
                    as_comp(out));
      }
      case SRule::Embed: {
        // λx.λh.λk. [ans](k ([tau] x))
        Name x = supply.fresh("x");
        Name h = supply.fresh("h");
        Name k = supply.fresh("k");
        auto cx = static_apply(VC::val(coerce(d->premises[0])), VC::val(mk_var(x)),
                               supply);
        auto kx = static_apply(VC::val(mk_var(k)), cx, supply);
        auto out = static_apply(VC::val(coerce(d->premises[1])), kx, supply);
        return lams({st_binder(x, ty(d->lc->result)), st_binder(h, sigma()),
                     st_binder(k, kty(d->rc))},
                    as_comp(out));
      }
    }
    throw std::logic_error("cps_sub: unknown rule");
  }

  ValuePtr value_of(const VC& r, const char* what) {
    if (!r.is_value()) {
      throw std::logic_error(std::string("cps: expected a value transform for ") + what);
    }
    return r.v;
  }

  VC deriv(const TypeDerivPtr& d) {
    switch (d->rule) {
      case TRule::Unit:
        return VC::val(mk_unit());
      case TRule::Bool:
        return VC::val(mk_bool(d->vsubject->as<BoolLit>()->value));
      case TRule::Var:
        return VC::val(mk_var(d->vsubject->as<Var>()->name));
      case TRule::Lam: {
        const auto* l = d->vsubject->as<Lam>();
        auto body = deriv(d->premises[0]);
        return VC::val(mk_lam(st_binder(l->binder.name, ty(d->vtype->dom)),
                              as_comp(body)));
      }
      case TRule::Rec: {
        const auto* r = d->vsubject->as<RecFun>();
        auto body = deriv(d->premises[0]);
        return VC::val(mk_rec(st_binder(r->binder.name, ty(d->vtype)),
                              value_of(body, "rec body")));
      }
      case TRule::If: {
        const auto* i = peel(d->csubject)->as<If>();
        (void)i;
        auto cond = deriv(d->premises[0]);
        auto t = deriv(d->premises[1]);
        auto e = deriv(d->premises[2]);
        return VC::comp(
            mk_if(value_of(cond, "if condition"), as_comp(t), as_comp(e)));
      }
      case TRule::App: {
        auto f = deriv(d->premises[0]);
        auto a = deriv(d->premises[1]);
        return VC::comp(mk_apply(value_of(f, "function"), value_of(a, "argument")));
      }
      case TRule::LetP: {
        // (λx.[c2]) [c1] — a dynamic application
        const auto* l = peel(d->csubject)->as<Let>();
        auto c1 = deriv(d->premises[0]);
        auto c2 = deriv(d->premises[1]);
        auto lam = mk_lam(st_binder(l->binder, ty(d->premises[0]->ctype->result)),
                          as_comp(c2));
        return VC::comp(dyn_apply(lam, c1, supply));
      }
      case TRule::LetIp: {
        // λh.λk. [c1] h (λx. [c2] h k)
        const auto* l = peel(d->csubject)->as<Let>();
        Name h = supply.fresh("h");
        Name k = supply.fresh("k");
        auto c1 = deriv(d->premises[0]);
        auto c2 = deriv(d->premises[1]);
        auto c2h = static_apply(c2, VC::val(mk_var(h)), supply);
        auto c2hk = static_apply(c2h, VC::val(mk_var(k)), supply);
        auto konts = mk_lam(
            st_binder(l->binder, ty(d->premises[0]->ctype->result)), as_comp(c2hk));
        auto c1h = static_apply(c1, VC::val(mk_var(h)), supply);
        auto body = static_apply(c1h, VC::val(konts), supply);
        return VC::val(lams({st_binder(h, sigma()), st_binder(k, kty(d->ctype))},
                            as_comp(body)));
      }
      case TRule::Ret:
        return deriv(d->premises[0]);
      case TRule::Op: {
        // λh.λk. h.op [v] k
        const auto* o = peel(d->csubject)->as<OpCall>();
        Name h = supply.fresh("h");
        Name k = supply.fresh("k");
        auto arg = deriv(d->premises[0]);
        auto lookup = VC::comp(mk_proj(mk_var(h), o->op));
        auto applied = static_apply(lookup, arg, supply);
        auto body = static_apply(applied, VC::val(mk_var(k)), supply);
        return VC::val(lams({st_binder(h, sigma()), st_binder(k, kty(d->ctype))},
                            as_comp(body)));
      }
      case TRule::Hdlr: {
        // record mapping each operation name to λx.λk.[clause body]
        const auto& h = *d->hsubject;
        std::vector<std::pair<std::string, ValuePtr>> fields;
        for (size_t i = 0; i < h.clauses.size(); ++i) {
          const auto& cl = h.clauses[i];
          const auto& entry = sig.atm.at(cl.op);
          auto body = deriv(d->premises[i]);
          fields.emplace_back(
              cl.op,
              lams({st_binder(cl.arg, ty(entry.arg)),
                    st_binder(cl.kont, st_arrow(ty(entry.result), ty(entry.ans_in)))},
                   as_comp(body)));
        }
        return VC::val(mk_record(std::move(fields)));
      }
      case TRule::Han: {
        // [body] [handler] (λx.[return clause])
        const auto* hn = peel(d->csubject)->as<Handle>();
        auto body = deriv(d->premises[1]);
        auto hrec = deriv(d->premises[0]);
        auto tbody = d->premises[1]->ctype;
        auto retfun =
            mk_lam(st_binder(hn->handler->ret_binder, ty(tbody->result)),
                   as_comp(deriv(d->premises[2])));
        auto bh = static_apply(body, hrec, supply);
        return static_apply(bh, VC::val(retfun), supply);
      }
      case TRule::VSub:
      case TRule::CSub: {
        auto inner = deriv(d->premises[0]);
        return static_apply(VC::val(coerce(d->sub)), inner, supply);
      }
    }
    throw std::logic_error("cps_term: unknown rule");
  }

  static const CompPtr& peel(const CompPtr& c) {
    const CompPtr* cur = &c;
    while (const auto* asc = (*cur)->as<Ascribe>()) cur = &asc->body;
    return *cur;
  }
};

}  // namespace

ValuePtr cps_sub(const SubDerivPtr& d, const Signature& sig, NameSupply& supply) {
  Cps cps{sig, supply};
  return cps.coerce(d);
}

VC cps_deriv(const TypeDerivPtr& d, const Signature& sig, NameSupply& supply) {
  Cps cps{sig, supply};
  return cps.deriv(d);
}

CompPtr cps_term(const TypeDerivPtr& d, const Signature& sig, NameSupply& supply) {
  if (!d->csubject) {
    throw std::invalid_argument("cps_term expects a computation-judgment derivation");
  }
  return as_comp(cps_deriv(d, sig, supply));
}

}  // namespace feh
