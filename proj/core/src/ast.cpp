#include "feh/ast.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <map>
#include <stdexcept>

namespace feh {

std::string Span::to_string() const {
  if (!known()) return "<unknown>";
  return std::to_string(line) + ":" + std::to_string(col);
}

std::string Name::to_string() const { return text + "#" + std::to_string(id); }

const OpClause* Handler::find(const std::string& op) const {
  for (const auto& cl : clauses) {
    if (cl.op == op) return &cl;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// free-id set helpers (sorted unique vectors)
// ---------------------------------------------------------------------------

namespace {

using IdSet = std::vector<uint32_t>;

IdSet merge(const IdSet& a, const IdSet& b) {
  IdSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IdSet without(IdSet s, uint32_t id) {
  s.erase(std::remove(s.begin(), s.end(), id), s.end());
  return s;
}

bool contains(const IdSet& s, uint32_t id) {
  return std::binary_search(s.begin(), s.end(), id);
}

}  // namespace

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

ValuePtr mk_var(Name name, Span sp) {
  auto v = std::make_shared<Value>();
  v->free_ids = {name.id};
  v->node = Var{std::move(name)};
  v->span = sp;
  return v;
}

ValuePtr mk_unit(Span sp) {
  auto v = std::make_shared<Value>();
  v->node = UnitLit{};
  v->span = sp;
  return v;
}

ValuePtr mk_bool(bool b, Span sp) {
  auto v = std::make_shared<Value>();
  v->node = BoolLit{b};
  v->span = sp;
  return v;
}

ValuePtr mk_lam(Binder binder, CompPtr body, Span sp) {
  auto v = std::make_shared<Value>();
  v->size = 1 + body->size;
  v->free_ids = without(body->free_ids, binder.name.id);
  v->node = Lam{std::move(binder), std::move(body)};
  v->span = sp;
  return v;
}

ValuePtr mk_rec(Binder binder, ValuePtr body, Span sp) {
  auto v = std::make_shared<Value>();
  v->size = 1 + body->size;
  v->free_ids = without(body->free_ids, binder.name.id);
  v->node = RecFun{std::move(binder), std::move(body)};
  v->span = sp;
  return v;
}

ValuePtr mk_record(std::vector<std::pair<std::string, ValuePtr>> fields, Span sp) {
  auto v = std::make_shared<Value>();
  v->size = 1;
  for (const auto& [l, f] : fields) {
    v->size += f->size;
    v->free_ids = merge(v->free_ids, f->free_ids);
  }
  for (size_t i = 0; i < fields.size(); ++i) {
    for (size_t j = i + 1; j < fields.size(); ++j) {
      if (fields[i].first == fields[j].first) {
        throw std::invalid_argument("duplicate record label: " + fields[i].first);
      }
    }
  }
  v->node = RecordLit{std::move(fields)};
  v->span = sp;
  return v;
}

CompPtr mk_return(ValuePtr val, Span sp) {
  auto c = std::make_shared<Comp>();
  c->size = 1 + val->size;
  c->free_ids = val->free_ids;
  c->node = Return{std::move(val)};
  c->span = sp;
  return c;
}

CompPtr mk_opcall(std::string op, ValuePtr arg, Span sp) {
  auto c = std::make_shared<Comp>();
  c->size = 1 + arg->size;
  c->free_ids = arg->free_ids;
  c->node = OpCall{std::move(op), std::move(arg)};
  c->span = sp;
  return c;
}

CompPtr mk_apply(ValuePtr fn, ValuePtr arg, Span sp) {
  auto c = std::make_shared<Comp>();
  c->size = 1 + fn->size + arg->size;
  c->free_ids = merge(fn->free_ids, arg->free_ids);
  c->node = Apply{std::move(fn), std::move(arg)};
  c->span = sp;
  return c;
}

CompPtr mk_if(ValuePtr cond, CompPtr t, CompPtr e, Span sp) {
  auto c = std::make_shared<Comp>();
  c->size = 1 + cond->size + t->size + e->size;
  c->free_ids = merge(cond->free_ids, merge(t->free_ids, e->free_ids));
  c->node = If{std::move(cond), std::move(t), std::move(e)};
  c->span = sp;
  return c;
}

CompPtr mk_let(Name binder, CompPtr bound, CompPtr body, Span sp) {
  auto c = std::make_shared<Comp>();
  c->size = 1 + bound->size + body->size;
  c->free_ids = merge(bound->free_ids, without(body->free_ids, binder.id));
  c->node = Let{std::move(binder), std::move(bound), std::move(body)};
  c->span = sp;
  return c;
}

CompPtr mk_handle(HandlerPtr h, CompPtr body, Span sp) {
  auto c = std::make_shared<Comp>();
  c->size = 1 + h->size + body->size;
  c->free_ids = merge(h->free_ids, body->free_ids);
  c->node = Handle{std::move(h), std::move(body)};
  c->span = sp;
  return c;
}

CompPtr mk_proj(ValuePtr record, std::string label, Span sp) {
  auto c = std::make_shared<Comp>();
  c->size = 1 + record->size;
  c->free_ids = record->free_ids;
  c->node = Proj{std::move(record), std::move(label)};
  c->span = sp;
  return c;
}

CompPtr mk_ascribe(CompPtr body, AtmCompPtr type, Span sp) {
  auto c = std::make_shared<Comp>();
  c->size = 1 + body->size;
  c->free_ids = body->free_ids;
  c->node = Ascribe{std::move(body), std::move(type)};
  c->span = sp;
  return c;
}

HandlerPtr mk_handler(Name ret_binder, CompPtr ret_body, std::vector<OpClause> clauses,
                      Span sp) {
  auto h = std::make_shared<Handler>();
  h->size = 1 + ret_body->size;
  h->free_ids = without(ret_body->free_ids, ret_binder.id);
  for (size_t i = 0; i < clauses.size(); ++i) {
    for (size_t j = i + 1; j < clauses.size(); ++j) {
      if (clauses[i].op == clauses[j].op) {
        throw std::invalid_argument("duplicate operation clause: " + clauses[i].op);
      }
    }
    const auto& cl = clauses[i];
    h->size += cl.body->size;
    h->free_ids =
        merge(h->free_ids, without(without(cl.body->free_ids, cl.arg.id), cl.kont.id));
  }
  h->ret_binder = std::move(ret_binder);
  h->ret_body = std::move(ret_body);
  h->clauses = std::move(clauses);
  h->span = sp;
  return h;
}

// ---------------------------------------------------------------------------
// Free variables
// ---------------------------------------------------------------------------

namespace {

void collect_free(const ValuePtr& v, std::vector<Name>& bound, std::set<Name>& out);
void collect_free(const CompPtr& c, std::vector<Name>& bound, std::set<Name>& out);

void collect_free(const ValuePtr& v, std::vector<Name>& bound, std::set<Name>& out) {
  if (const auto* x = v->as<Var>()) {
    if (std::find(bound.rbegin(), bound.rend(), x->name) == bound.rend()) {
      out.insert(x->name);
    }
  } else if (const auto* l = v->as<Lam>()) {
    bound.push_back(l->binder.name);
    collect_free(l->body, bound, out);
    bound.pop_back();
  } else if (const auto* r = v->as<RecFun>()) {
    bound.push_back(r->binder.name);
    collect_free(r->body, bound, out);
    bound.pop_back();
  } else if (const auto* rec = v->as<RecordLit>()) {
    for (const auto& [_, f] : rec->fields) collect_free(f, bound, out);
  }
}

void collect_free(const CompPtr& c, std::vector<Name>& bound, std::set<Name>& out) {
  if (const auto* r = c->as<Return>()) {
    collect_free(r->value, bound, out);
  } else if (const auto* o = c->as<OpCall>()) {
    collect_free(o->arg, bound, out);
  } else if (const auto* a = c->as<Apply>()) {
    collect_free(a->fn, bound, out);
    collect_free(a->arg, bound, out);
  } else if (const auto* i = c->as<If>()) {
    collect_free(i->cond, bound, out);
    collect_free(i->then_c, bound, out);
    collect_free(i->else_c, bound, out);
  } else if (const auto* l = c->as<Let>()) {
    collect_free(l->bound, bound, out);
    bound.push_back(l->binder);
    collect_free(l->body, bound, out);
    bound.pop_back();
  } else if (const auto* h = c->as<Handle>()) {
    const auto& hd = *h->handler;
    bound.push_back(hd.ret_binder);
    collect_free(hd.ret_body, bound, out);
    bound.pop_back();
    for (const auto& cl : hd.clauses) {
      bound.push_back(cl.arg);
      bound.push_back(cl.kont);
      collect_free(cl.body, bound, out);
      bound.pop_back();
      bound.pop_back();
    }
    collect_free(h->body, bound, out);
  } else if (const auto* p = c->as<Proj>()) {
    collect_free(p->record, bound, out);
  } else if (const auto* asc = c->as<Ascribe>()) {
    collect_free(asc->body, bound, out);
  }
}

}  // namespace

std::set<Name> free_vars(const ValuePtr& v) {
  std::set<Name> out;
  std::vector<Name> bound;
  collect_free(v, bound, out);
  return out;
}

std::set<Name> free_vars(const CompPtr& c) {
  std::set<Name> out;
  std::vector<Name> bound;
  collect_free(c, bound, out);
  return out;
}

// ---------------------------------------------------------------------------
// Substitution
// ---------------------------------------------------------------------------

namespace {

uint32_t max_id_v(const ValuePtr& v);
uint32_t max_id_c(const CompPtr& c);

uint32_t max_id_v(const ValuePtr& v) {
  uint32_t m = 0;
  if (const auto* x = v->as<Var>()) {
    m = x->name.id;
  } else if (const auto* l = v->as<Lam>()) {
    m = std::max(l->binder.name.id, max_id_c(l->body));
  } else if (const auto* r = v->as<RecFun>()) {
    m = std::max(r->binder.name.id, max_id_v(r->body));
  } else if (const auto* rec = v->as<RecordLit>()) {
    for (const auto& [_, f] : rec->fields) m = std::max(m, max_id_v(f));
  }
  return m;
}

uint32_t max_id_c(const CompPtr& c) {
  uint32_t m = 0;
  if (const auto* r = c->as<Return>()) {
    m = max_id_v(r->value);
  } else if (const auto* o = c->as<OpCall>()) {
    m = max_id_v(o->arg);
  } else if (const auto* a = c->as<Apply>()) {
    m = std::max(max_id_v(a->fn), max_id_v(a->arg));
  } else if (const auto* i = c->as<If>()) {
    m = std::max({max_id_v(i->cond), max_id_c(i->then_c), max_id_c(i->else_c)});
  } else if (const auto* l = c->as<Let>()) {
    m = std::max({l->binder.id, max_id_c(l->bound), max_id_c(l->body)});
  } else if (const auto* h = c->as<Handle>()) {
    const auto& hd = *h->handler;
    m = std::max({hd.ret_binder.id, max_id_c(hd.ret_body), max_id_c(h->body)});
    for (const auto& cl : hd.clauses) {
      m = std::max({m, cl.arg.id, cl.kont.id, max_id_c(cl.body)});
    }
  } else if (const auto* p = c->as<Proj>()) {
    m = max_id_v(p->record);
  } else if (const auto* asc = c->as<Ascribe>()) {
    m = max_id_c(asc->body);
  }
  return m;
}

struct Subst {
  Name var;
  ValuePtr repl;
  std::set<Name> repl_free;  // only populated when repl is open
  uint32_t fresh_counter = 0;
  bool var_active = true;  // false under a shadowing binder
  // In-flight renames of capturing binders.
  std::map<Name, Name> renames;

  bool needs(const ValuePtr& t) const {
    return (var_active && contains(t->free_ids, var.id)) || !renames.empty();
  }
  bool needs(const CompPtr& t) const {
    return (var_active && contains(t->free_ids, var.id)) || !renames.empty();
  }

  // Returns the replacement-capture-free version of a binder, renaming when the
  // binder collides with a free variable of the replacement.
  Name enter(const Name& b) {
    if (repl_free.count(b)) {
      Name fresh{b.text, ++fresh_counter};
      renames[b] = fresh;
      return fresh;
    }
    return b;
  }
  void leave(const Name& b) { renames.erase(b); }

  ValuePtr value(const ValuePtr& t);
  CompPtr comp(const CompPtr& t);
};

ValuePtr Subst::value(const ValuePtr& t) {
  if (!needs(t)) return t;
  if (const auto* x = t->as<Var>()) {
    if (var_active && x->name == var) return repl;
    auto it = renames.find(x->name);
    if (it != renames.end()) return mk_var(it->second, t->span);
    return t;
  }
  if (const auto* l = t->as<Lam>()) {
    bool shadows = l->binder.name == var;
    bool saved = var_active;
    if (shadows) var_active = false;
    Binder b = l->binder;
    b.name = enter(l->binder.name);
    auto body = comp(l->body);
    leave(l->binder.name);
    var_active = saved;
    return mk_lam(std::move(b), std::move(body), t->span);
  }
  if (const auto* r = t->as<RecFun>()) {
    bool shadows = r->binder.name == var;
    bool saved = var_active;
    if (shadows) var_active = false;
    Binder b = r->binder;
    b.name = enter(r->binder.name);
    auto body = value(r->body);
    leave(r->binder.name);
    var_active = saved;
    return mk_rec(std::move(b), std::move(body), t->span);
  }
  if (const auto* rec = t->as<RecordLit>()) {
    std::vector<std::pair<std::string, ValuePtr>> fields;
    fields.reserve(rec->fields.size());
    for (const auto& [l, f] : rec->fields) fields.emplace_back(l, value(f));
    return mk_record(std::move(fields), t->span);
  }
  return t;
}

CompPtr Subst::comp(const CompPtr& t) {
  if (!needs(t)) return t;
  if (const auto* r = t->as<Return>()) {
    return mk_return(value(r->value), t->span);
  }
  if (const auto* o = t->as<OpCall>()) {
    return mk_opcall(o->op, value(o->arg), t->span);
  }
  if (const auto* a = t->as<Apply>()) {
    return mk_apply(value(a->fn), value(a->arg), t->span);
  }
  if (const auto* i = t->as<If>()) {
    return mk_if(value(i->cond), comp(i->then_c), comp(i->else_c), t->span);
  }
  if (const auto* l = t->as<Let>()) {
    auto bound = comp(l->bound);
    bool shadows = l->binder == var;
    bool saved = var_active;
    if (shadows) var_active = false;
    Name b = enter(l->binder);
    auto body = comp(l->body);
    leave(l->binder);
    var_active = saved;
    return mk_let(b, std::move(bound), std::move(body), t->span);
  }
  if (const auto* h = t->as<Handle>()) {
    const auto& hd = *h->handler;
    bool saved = var_active;
    if (hd.ret_binder == var) var_active = false;
    Name ret_binder = enter(hd.ret_binder);
    auto ret_body = comp(hd.ret_body);
    leave(hd.ret_binder);
    var_active = saved;
    std::vector<OpClause> clauses;
    clauses.reserve(hd.clauses.size());
    for (const auto& cl : hd.clauses) {
      if (cl.arg == var || cl.kont == var) var_active = false;
      OpClause ncl = cl;
      ncl.arg = enter(cl.arg);
      ncl.kont = enter(cl.kont);
      ncl.body = comp(cl.body);
      leave(cl.kont);
      leave(cl.arg);
      var_active = saved;
      clauses.push_back(std::move(ncl));
    }
    auto nh = mk_handler(std::move(ret_binder), std::move(ret_body), std::move(clauses),
                         hd.span);
    return mk_handle(std::move(nh), comp(h->body), t->span);
  }
  if (const auto* p = t->as<Proj>()) {
    return mk_proj(value(p->record), p->label, t->span);
  }
  if (const auto* asc = t->as<Ascribe>()) {
    return mk_ascribe(comp(asc->body), asc->type, t->span);
  }
  return t;
}

Subst make_subst(const Name& var, const ValuePtr& repl, uint32_t body_max) {
  Subst s;
  s.var = var;
  s.repl = repl;
  if (!repl->closed()) {
    s.repl_free = free_vars(repl);
    s.fresh_counter = std::max(body_max, max_id_v(repl));
  }
  return s;
}

}  // namespace

ValuePtr substitute(const ValuePtr& body, const Name& var, const ValuePtr& v) {
  if (!contains(body->free_ids, var.id)) return body;
  auto s = make_subst(var, v, v->closed() ? 0 : max_id_v(body));
  return s.value(body);
}

CompPtr substitute(const CompPtr& body, const Name& var, const ValuePtr& v) {
  if (!contains(body->free_ids, var.id)) return body;
  auto s = make_subst(var, v, v->closed() ? 0 : max_id_c(body));
  return s.comp(body);
}

// ---------------------------------------------------------------------------
// Alpha equivalence
// ---------------------------------------------------------------------------

namespace {

struct AlphaCmp {
  std::map<Name, uint32_t> la, lb;
  uint32_t next = 1;

  bool var(const Name& a, const Name& b) {
    auto ia = la.find(a), ib = lb.find(b);
    if (ia != la.end() || ib != lb.end()) {
      return ia != la.end() && ib != lb.end() && ia->second == ib->second;
    }
    return a == b;  // both free
  }

  struct Scope {
    AlphaCmp& cmp;
    Name a, b;
    bool had_a = false, had_b = false;
    uint32_t old_a = 0, old_b = 0;
    Scope(AlphaCmp& cmp, const Name& a, const Name& b) : cmp(cmp), a(a), b(b) {
      if (auto it = cmp.la.find(a); it != cmp.la.end()) had_a = true, old_a = it->second;
      if (auto it = cmp.lb.find(b); it != cmp.lb.end()) had_b = true, old_b = it->second;
      cmp.la[a] = cmp.lb[b] = cmp.next++;
    }
    ~Scope() {
      if (had_a) cmp.la[a] = old_a; else cmp.la.erase(a);
      if (had_b) cmp.lb[b] = old_b; else cmp.lb.erase(b);
    }
  };

  bool value(const ValuePtr& a, const ValuePtr& b);
  bool comp(const CompPtr& a, const CompPtr& b);
};

bool AlphaCmp::value(const ValuePtr& a, const ValuePtr& b) {
  if (a->node.index() != b->node.index()) return false;
  if (const auto* x = a->as<Var>()) return var(x->name, b->as<Var>()->name);
  if (a->as<UnitLit>()) return true;
  if (const auto* l = a->as<BoolLit>()) return l->value == b->as<BoolLit>()->value;
  if (const auto* l = a->as<Lam>()) {
    const auto* m = b->as<Lam>();
    Scope s(*this, l->binder.name, m->binder.name);
    return comp(l->body, m->body);
  }
  if (const auto* r = a->as<RecFun>()) {
    const auto* m = b->as<RecFun>();
    Scope s(*this, r->binder.name, m->binder.name);
    return value(r->body, m->body);
  }
  if (const auto* ra = a->as<RecordLit>()) {
    const auto* rb = b->as<RecordLit>();
    if (ra->fields.size() != rb->fields.size()) return false;
    for (size_t i = 0; i < ra->fields.size(); ++i) {
      if (ra->fields[i].first != rb->fields[i].first) return false;
      if (!value(ra->fields[i].second, rb->fields[i].second)) return false;
    }
    return true;
  }
  return false;
}

bool AlphaCmp::comp(const CompPtr& a, const CompPtr& b) {
  if (a->node.index() != b->node.index()) return false;
  if (const auto* r = a->as<Return>()) return value(r->value, b->as<Return>()->value);
  if (const auto* o = a->as<OpCall>()) {
    const auto* p = b->as<OpCall>();
    return o->op == p->op && value(o->arg, p->arg);
  }
  if (const auto* x = a->as<Apply>()) {
    const auto* y = b->as<Apply>();
    return value(x->fn, y->fn) && value(x->arg, y->arg);
  }
  if (const auto* x = a->as<If>()) {
    const auto* y = b->as<If>();
    return value(x->cond, y->cond) && comp(x->then_c, y->then_c) &&
           comp(x->else_c, y->else_c);
  }
  if (const auto* x = a->as<Let>()) {
    const auto* y = b->as<Let>();
    if (!comp(x->bound, y->bound)) return false;
    Scope s(*this, x->binder, y->binder);
    return comp(x->body, y->body);
  }
  if (const auto* x = a->as<Handle>()) {
    const auto* y = b->as<Handle>();
    const auto& ha = *x->handler;
    const auto& hb = *y->handler;
    if (ha.clauses.size() != hb.clauses.size()) return false;
    {
      Scope s(*this, ha.ret_binder, hb.ret_binder);
      if (!comp(ha.ret_body, hb.ret_body)) return false;
    }
    for (size_t i = 0; i < ha.clauses.size(); ++i) {
      const auto& ca = ha.clauses[i];
      const auto& cb = hb.clauses[i];
      if (ca.op != cb.op) return false;
      Scope s1(*this, ca.arg, cb.arg);
      Scope s2(*this, ca.kont, cb.kont);
      if (!comp(ca.body, cb.body)) return false;
    }
    return comp(x->body, y->body);
  }
  if (const auto* x = a->as<Proj>()) {
    const auto* y = b->as<Proj>();
    return x->label == y->label && value(x->record, y->record);
  }
  if (const auto* x = a->as<Ascribe>()) {
    return comp(x->body, b->as<Ascribe>()->body);
  }
  return false;
}

}  // namespace

bool alpha_equal(const ValuePtr& a, const ValuePtr& b) {
  AlphaCmp cmp;
  return cmp.value(a, b);
}

bool alpha_equal(const CompPtr& a, const CompPtr& b) {
  AlphaCmp cmp;
  return cmp.comp(a, b);
}

// ---------------------------------------------------------------------------
// Alpha normalization
// ---------------------------------------------------------------------------

namespace {

struct Renumber {
  uint32_t next;
  std::map<Name, Name> env;

  Name bind(const Name& n) {
    Name fresh{n.text, next++};
    return fresh;
  }

  struct Scope {
    Renumber& r;
    Name key;
    bool had = false;
    Name old;
    Scope(Renumber& r, const Name& key, const Name& fresh) : r(r), key(key) {
      if (auto it = r.env.find(key); it != r.env.end()) had = true, old = it->second;
      r.env[key] = fresh;
    }
    ~Scope() {
      if (had) r.env[key] = old; else r.env.erase(key);
    }
  };

  ValuePtr value(const ValuePtr& v);
  CompPtr comp(const CompPtr& c);
};

ValuePtr Renumber::value(const ValuePtr& v) {
  if (const auto* x = v->as<Var>()) {
    auto it = env.find(x->name);
    return mk_var(it != env.end() ? it->second : x->name, v->span);
  }
  if (v->as<UnitLit>() || v->as<BoolLit>()) return v;
  if (const auto* l = v->as<Lam>()) {
    Binder b = l->binder;
    b.name = bind(l->binder.name);
    Scope s(*this, l->binder.name, b.name);
    return mk_lam(std::move(b), comp(l->body), v->span);
  }
  if (const auto* r = v->as<RecFun>()) {
    Binder b = r->binder;
    b.name = bind(r->binder.name);
    Scope s(*this, r->binder.name, b.name);
    return mk_rec(std::move(b), value(r->body), v->span);
  }
  if (const auto* rec = v->as<RecordLit>()) {
    std::vector<std::pair<std::string, ValuePtr>> fields;
    for (const auto& [l, f] : rec->fields) fields.emplace_back(l, value(f));
    return mk_record(std::move(fields), v->span);
  }
  return v;
}

CompPtr Renumber::comp(const CompPtr& c) {
  if (const auto* r = c->as<Return>()) return mk_return(value(r->value), c->span);
  if (const auto* o = c->as<OpCall>()) return mk_opcall(o->op, value(o->arg), c->span);
  if (const auto* a = c->as<Apply>()) return mk_apply(value(a->fn), value(a->arg), c->span);
  if (const auto* i = c->as<If>()) {
    return mk_if(value(i->cond), comp(i->then_c), comp(i->else_c), c->span);
  }
  if (const auto* l = c->as<Let>()) {
    auto bound = comp(l->bound);
    Name b = bind(l->binder);
    Scope s(*this, l->binder, b);
    return mk_let(b, std::move(bound), comp(l->body), c->span);
  }
  if (const auto* h = c->as<Handle>()) {
    const auto& hd = *h->handler;
    Name rb = bind(hd.ret_binder);
    CompPtr ret_body;
    {
      Scope s(*this, hd.ret_binder, rb);
      ret_body = comp(hd.ret_body);
    }
    std::vector<OpClause> clauses;
    for (const auto& cl : hd.clauses) {
      OpClause ncl = cl;
      ncl.arg = bind(cl.arg);
      ncl.kont = bind(cl.kont);
      Scope s1(*this, cl.arg, ncl.arg);
      Scope s2(*this, cl.kont, ncl.kont);
      ncl.body = comp(cl.body);
      clauses.push_back(std::move(ncl));
    }
    auto nh = mk_handler(rb, std::move(ret_body), std::move(clauses), hd.span);
    return mk_handle(std::move(nh), comp(h->body), c->span);
  }
  if (const auto* p = c->as<Proj>()) return mk_proj(value(p->record), p->label, c->span);
  if (const auto* asc = c->as<Ascribe>()) {
    return mk_ascribe(comp(asc->body), asc->type, c->span);
  }
  return c;
}

}  // namespace

std::pair<CompPtr, uint32_t> alpha_normalize(const CompPtr& c, uint32_t first_id) {
  Renumber r{first_id, {}};
  auto out = r.comp(c);
  return {out, r.next};
}

std::pair<ValuePtr, uint32_t> alpha_normalize(const ValuePtr& v, uint32_t first_id) {
  Renumber r{first_id, {}};
  auto out = r.value(v);
  return {out, r.next};
}

// ---------------------------------------------------------------------------
// Ascription stripping, handler-freeness
// ---------------------------------------------------------------------------

ValuePtr strip_ascriptions(const ValuePtr& v) {
  if (const auto* l = v->as<Lam>()) {
    auto body = strip_ascriptions(l->body);
    if (body == l->body) return v;
    return mk_lam(l->binder, std::move(body), v->span);
  }
  if (const auto* r = v->as<RecFun>()) {
    auto body = strip_ascriptions(r->body);
    if (body == r->body) return v;
    return mk_rec(r->binder, std::move(body), v->span);
  }
  if (const auto* rec = v->as<RecordLit>()) {
    std::vector<std::pair<std::string, ValuePtr>> fields;
    bool changed = false;
    for (const auto& [l, f] : rec->fields) {
      auto nf = strip_ascriptions(f);
      changed |= nf != f;
      fields.emplace_back(l, std::move(nf));
    }
    if (!changed) return v;
    return mk_record(std::move(fields), v->span);
  }
  return v;
}

CompPtr strip_ascriptions(const CompPtr& c) {
  if (const auto* asc = c->as<Ascribe>()) return strip_ascriptions(asc->body);
  if (const auto* r = c->as<Return>()) {
    auto v = strip_ascriptions(r->value);
    return v == r->value ? c : mk_return(std::move(v), c->span);
  }
  if (const auto* o = c->as<OpCall>()) {
    auto v = strip_ascriptions(o->arg);
    return v == o->arg ? c : mk_opcall(o->op, std::move(v), c->span);
  }
  if (const auto* a = c->as<Apply>()) {
    auto f = strip_ascriptions(a->fn);
    auto x = strip_ascriptions(a->arg);
    return (f == a->fn && x == a->arg) ? c : mk_apply(std::move(f), std::move(x), c->span);
  }
  if (const auto* i = c->as<If>()) {
    auto v = strip_ascriptions(i->cond);
    auto t = strip_ascriptions(i->then_c);
    auto e = strip_ascriptions(i->else_c);
    if (v == i->cond && t == i->then_c && e == i->else_c) return c;
    return mk_if(std::move(v), std::move(t), std::move(e), c->span);
  }
  if (const auto* l = c->as<Let>()) {
    auto bound = strip_ascriptions(l->bound);
    auto body = strip_ascriptions(l->body);
    if (bound == l->bound && body == l->body) return c;
    return mk_let(l->binder, std::move(bound), std::move(body), c->span);
  }
  if (const auto* h = c->as<Handle>()) {
    const auto& hd = *h->handler;
    auto ret_body = strip_ascriptions(hd.ret_body);
    std::vector<OpClause> clauses;
    bool changed = ret_body != hd.ret_body;
    for (const auto& cl : hd.clauses) {
      OpClause ncl = cl;
      ncl.body = strip_ascriptions(cl.body);
      changed |= ncl.body != cl.body;
      clauses.push_back(std::move(ncl));
    }
    auto body = strip_ascriptions(h->body);
    changed |= body != h->body;
    if (!changed) return c;
    auto nh = mk_handler(hd.ret_binder, std::move(ret_body), std::move(clauses), hd.span);
    return mk_handle(std::move(nh), std::move(body), c->span);
  }
  if (const auto* p = c->as<Proj>()) {
    auto v = strip_ascriptions(p->record);
    return v == p->record ? c : mk_proj(std::move(v), p->label, c->span);
  }
  return c;
}

bool handler_free(const ValuePtr& v) {
  if (const auto* l = v->as<Lam>()) return handler_free(l->body);
  if (const auto* r = v->as<RecFun>()) return handler_free(r->body);
  if (const auto* rec = v->as<RecordLit>()) {
    for (const auto& [_, f] : rec->fields) {
      if (!handler_free(f)) return false;
    }
  }
  return true;
}

bool handler_free(const CompPtr& c) {
  if (c->as<Handle>() || c->as<OpCall>()) return false;
  if (const auto* r = c->as<Return>()) return handler_free(r->value);
  if (const auto* a = c->as<Apply>()) return handler_free(a->fn) && handler_free(a->arg);
  if (const auto* i = c->as<If>()) {
    return handler_free(i->cond) && handler_free(i->then_c) && handler_free(i->else_c);
  }
  if (const auto* l = c->as<Let>()) {
    return handler_free(l->bound) && handler_free(l->body);
  }
  if (const auto* p = c->as<Proj>()) return handler_free(p->record);
  if (const auto* asc = c->as<Ascribe>()) return handler_free(asc->body);
  return true;
}

// ---------------------------------------------------------------------------
// Canonical serialization
// ---------------------------------------------------------------------------

namespace {

struct Canon {
  std::string& out;
  std::map<Name, uint32_t> env;
  uint32_t next = 1;

  struct Scope {
    Canon& c;
    Name key;
    bool had = false;
    uint32_t old = 0;
    Scope(Canon& c, const Name& key) : c(c), key(key) {
      if (auto it = c.env.find(key); it != c.env.end()) had = true, old = it->second;
      c.env[key] = c.next++;
    }
    ~Scope() {
      if (had) c.env[key] = old; else c.env.erase(key);
    }
  };

  void value(const ValuePtr& v);
  void comp(const CompPtr& c);
};

void Canon::value(const ValuePtr& v) {
  if (const auto* x = v->as<Var>()) {
    auto it = env.find(x->name);
    if (it != env.end()) {
      out += 'v';
      out += std::to_string(it->second);
    } else {
      out += '!';
      out += x->name.text;
      out += '#';
      out += std::to_string(x->name.id);
    }
    return;
  }
  if (v->as<UnitLit>()) {
    out += 'u';
    return;
  }
  if (const auto* b = v->as<BoolLit>()) {
    out += b->value ? 'T' : 'F';
    return;
  }
  if (const auto* l = v->as<Lam>()) {
    out += "(L.";
    Scope s(*this, l->binder.name);
    comp(l->body);
    out += ')';
    return;
  }
  if (const auto* r = v->as<RecFun>()) {
    out += "(R.";
    Scope s(*this, r->binder.name);
    value(r->body);
    out += ')';
    return;
  }
  if (const auto* rec = v->as<RecordLit>()) {
    out += "(#";
    for (const auto& [lab, f] : rec->fields) {
      out += lab;
      out += '=';
      value(f);
      out += ',';
    }
    out += ')';
    return;
  }
}

void Canon::comp(const CompPtr& c) {
  if (const auto* r = c->as<Return>()) {
    out += "(r ";
    value(r->value);
    out += ')';
    return;
  }
  if (const auto* o = c->as<OpCall>()) {
    out += "(o ";
    out += o->op;
    out += ' ';
    value(o->arg);
    out += ')';
    return;
  }
  if (const auto* a = c->as<Apply>()) {
    out += "(a ";
    value(a->fn);
    out += ' ';
    value(a->arg);
    out += ')';
    return;
  }
  if (const auto* i = c->as<If>()) {
    out += "(i ";
    value(i->cond);
    comp(i->then_c);
    comp(i->else_c);
    out += ')';
    return;
  }
  if (const auto* l = c->as<Let>()) {
    out += "(l ";
    comp(l->bound);
    Scope s(*this, l->binder);
    comp(l->body);
    out += ')';
    return;
  }
  if (const auto* h = c->as<Handle>()) {
    const auto& hd = *h->handler;
    out += "(h {";
    {
      Scope s(*this, hd.ret_binder);
      comp(hd.ret_body);
    }
    for (const auto& cl : hd.clauses) {
      out += cl.op;
      out += ':';
      Scope s1(*this, cl.arg);
      Scope s2(*this, cl.kont);
      comp(cl.body);
    }
    out += "} ";
    comp(h->body);
    out += ')';
    return;
  }
  if (const auto* p = c->as<Proj>()) {
    out += "(p ";
    value(p->record);
    out += '.';
    out += p->label;
    out += ')';
    return;
  }
  if (const auto* asc = c->as<Ascribe>()) {
    comp(asc->body);
    return;
  }
}

}  // namespace

void serialize_canonical(const CompPtr& c, std::string& out) {
  Canon canon{out};
  canon.comp(c);
}

std::string serialize_canonical(const CompPtr& c) {
  std::string out;
  serialize_canonical(c, out);
  return out;
}

}  // namespace feh
