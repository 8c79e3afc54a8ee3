#include "feh/eval.hpp"

#include <unordered_map>
#include <variant>

#include "feh/printer.hpp"

namespace feh {

namespace {

uint32_t max_id_value(const ValuePtr& v);

uint32_t max_id_comp(const CompPtr& c) {
  uint32_t m = 0;
  if (const auto* r = c->as<Return>()) {
    m = max_id_value(r->value);
  } else if (const auto* o = c->as<OpCall>()) {
    m = max_id_value(o->arg);
  } else if (const auto* a = c->as<Apply>()) {
    m = std::max(max_id_value(a->fn), max_id_value(a->arg));
  } else if (const auto* i = c->as<If>()) {
    m = std::max({max_id_value(i->cond), max_id_comp(i->then_c), max_id_comp(i->else_c)});
  } else if (const auto* l = c->as<Let>()) {
    m = std::max({l->binder.id, max_id_comp(l->bound), max_id_comp(l->body)});
  } else if (const auto* h = c->as<Handle>()) {
    const auto& hd = *h->handler;
    m = std::max({hd.ret_binder.id, max_id_comp(hd.ret_body), max_id_comp(h->body)});
    for (const auto& cl : hd.clauses) {
      m = std::max({m, cl.arg.id, cl.kont.id, max_id_comp(cl.body)});
    }
  } else if (const auto* p = c->as<Proj>()) {
    m = max_id_value(p->record);
  } else if (const auto* asc = c->as<Ascribe>()) {
    m = max_id_comp(asc->body);
  }
  return m;
}

uint32_t max_id_value(const ValuePtr& v) {
  uint32_t m = 0;
  if (const auto* x = v->as<Var>()) {
    m = x->name.id;
  } else if (const auto* l = v->as<Lam>()) {
    m = std::max(l->binder.name.id, max_id_comp(l->body));
  } else if (const auto* r = v->as<RecFun>()) {
    m = std::max(r->binder.name.id, max_id_value(r->body));
  } else if (const auto* rec = v->as<RecordLit>()) {
    for (const auto& [_, f] : rec->fields) m = std::max(m, max_id_value(f));
  }
  return m;
}

struct LetFrame {
  Name binder;
  CompPtr body;
};
struct HandleFrame {
  HandlerPtr handler;
};
using Frame = std::variant<LetFrame, HandleFrame>;

uint64_t frame_size(const Frame& f) {
  if (const auto* l = std::get_if<LetFrame>(&f)) return 1 + l->body->size;
  return 1 + std::get<HandleFrame>(f).handler->size;
}

// The evaluation-context stack: let-frames realize E ::= [] | let x = E in c,
// handle-frames delimit it.
struct Machine {
  std::vector<Frame> frames;
  CompPtr focus;
  uint64_t frame_sizes = 0;
  uint32_t handle_count = 0;
  NameSupply supply;
  const Signature* sig = nullptr;

  explicit Machine(const CompPtr& c)
      : focus(strip_ascriptions(c)), supply(max_id_comp(c) + 1) {}

  void push(Frame f) {
    frame_sizes += frame_size(f);
    if (std::holds_alternative<HandleFrame>(f)) ++handle_count;
    frames.push_back(std::move(f));
  }

  void pop() {
    frame_sizes -= frame_size(frames.back());
    if (std::holds_alternative<HandleFrame>(frames.back())) --handle_count;
    frames.pop_back();
  }

  void descend() {
    while (true) {
      if (const auto* l = focus->as<Let>()) {
        auto bound = l->bound;
        push(LetFrame{l->binder, l->body});
        focus = std::move(bound);
      } else if (const auto* h = focus->as<Handle>()) {
        auto body = h->body;
        push(HandleFrame{h->handler});
        focus = std::move(body);
      } else {
        break;
      }
    }
  }

  uint64_t config_size() const { return frame_sizes + focus->size; }

  CompPtr recompose() const {
    CompPtr t = focus;
    for (size_t i = frames.size(); i-- > 0;) {
      if (const auto* l = std::get_if<LetFrame>(&frames[i])) {
        t = mk_let(l->binder, std::move(t), l->body);
      } else {
        t = mk_handle(std::get<HandleFrame>(frames[i]).handler, std::move(t));
      }
    }
    return t;
  }

  enum class Fire { Stepped, Returned, Stuck, TypeError };

  struct FireResult {
    Fire what = Fire::Stepped;
    ValuePtr value;      // Returned
    std::string op;      // Stuck
    ValuePtr op_arg;     // Stuck
    std::string message; // TypeError
  };

  Binder continuation_binder(const std::string& op) {
    Binder b;
    b.name = supply.fresh("y");
    if (sig) {
      if (auto it = sig->atm.find(op); it != sig->atm.end()) b.atm_ann = it->second.result;
      if (auto it = sig->st.find(op); it != sig->st.end()) b.st_ann = it->second.result;
    }
    return b;
  }

  // Applies one rule at the focus; descend() must have run.
  FireResult fire() {
    if (const auto* r = focus->as<Return>()) {
      if (frames.empty()) return {Fire::Returned, r->value};
      if (const auto* l = std::get_if<LetFrame>(&frames.back())) {
        // (E-Ret)
        auto next = substitute(l->body, l->binder, r->value);
        pop();
        focus = std::move(next);
        return {};
      }
      // (E-HRet)
      const auto& h = std::get<HandleFrame>(frames.back()).handler;
      auto next = substitute(h->ret_body, h->ret_binder, r->value);
      pop();
      focus = std::move(next);
      return {};
    }
    if (const auto* o = focus->as<OpCall>()) {
      size_t j = frames.size();
      while (j > 0 && !std::holds_alternative<HandleFrame>(frames[j - 1])) --j;
      if (j == 0) return {Fire::Stuck, nullptr, o->op, o->arg};
      const auto& h = std::get<HandleFrame>(frames[j - 1]).handler;
      const OpClause* clause = h->find(o->op);
      if (!clause) return {Fire::Stuck, nullptr, o->op, o->arg};
      // (E-Op): k = \y. with h handle E[return y]
      Binder yb = continuation_binder(o->op);
      CompPtr inner = mk_return(mk_var(yb.name));
      for (size_t i = frames.size(); i-- > j;) {
        const auto& l = std::get<LetFrame>(frames[i]);
        inner = mk_let(l.binder, std::move(inner), l.body);
      }
      ValuePtr k = mk_lam(std::move(yb), mk_handle(h, std::move(inner)));
      auto next = substitute(substitute(clause->body, clause->arg, o->arg),
                             clause->kont, k);
      while (frames.size() >= j) pop();
      focus = std::move(next);
      return {};
    }
    if (const auto* a = focus->as<Apply>()) {
      if (const auto* lam = a->fn->as<Lam>()) {
        // (E-LamApp)
        focus = substitute(lam->body, lam->binder.name, a->arg);
        return {};
      }
      if (const auto* rec = a->fn->as<RecFun>()) {
        // (E-RecApp): unfold one layer
        focus = mk_apply(substitute(rec->body, rec->binder.name, a->fn), a->arg);
        return {};
      }
      return {Fire::TypeError, nullptr, "", nullptr, "application of a non-function value"};
    }
    if (const auto* i = focus->as<If>()) {
      if (const auto* b = i->cond->as<BoolLit>()) {
        focus = b->value ? i->then_c : i->else_c;
        return {};
      }
      return {Fire::TypeError, nullptr, "", nullptr, "if-condition is not a boolean"};
    }
    if (const auto* p = focus->as<Proj>()) {
      if (const auto* rec = p->record->as<RecordLit>()) {
        for (const auto& [l, f] : rec->fields) {
          if (l == p->label) {
            // (E-Proj)
            focus = mk_return(f);
            return {};
          }
        }
        return {Fire::TypeError, nullptr, "", nullptr,
                "record has no field '" + p->label + "'"};
      }
      return {Fire::TypeError, nullptr, "", nullptr, "projection from a non-record value"};
    }
    return {Fire::TypeError, nullptr, "", nullptr, "malformed redex"};
  }
};

}  // namespace

uint32_t max_name_id(const CompPtr& c) { return max_id_comp(c); }

bool Outcome::returned(bool want) const {
  if (kind != Kind::Returned) return false;
  const auto* b = value->as<BoolLit>();
  return b && b->value == want;
}

std::string Outcome::describe() const {
  switch (kind) {
    case Kind::Returned:
      return "returned " + print_value(value);
    case Kind::Stuck:
      return "stuck on unhandled operation '" + op + "' (handler depth " +
             std::to_string(handler_depth) + ")";
    case Kind::CycleDetected:
      return "cycle detected: configuration at step " + std::to_string(first_seen) +
             " recurs with period " + std::to_string(period);
    case Kind::BudgetExhausted:
      return "budget exhausted after " + std::to_string(steps_used) + " steps";
    case Kind::DynamicTypeError:
      return "dynamic type error: " + message;
  }
  return "?";
}

StepResult step(const CompPtr& c) {
  Machine m(c);
  m.descend();
  auto r = m.fire();
  switch (r.what) {
    case Machine::Fire::Stepped:
      return {StepStatus::Stepped, m.recompose(), ""};
    case Machine::Fire::Returned:
      return {StepStatus::Normal, nullptr, ""};
    case Machine::Fire::Stuck:
      return {StepStatus::Stuck, nullptr, ""};
    case Machine::Fire::TypeError:
      return {StepStatus::TypeError, nullptr, r.message};
  }
  return {StepStatus::TypeError, nullptr, "unreachable"};
}

std::pair<Outcome, EvalStats> eval(const CompPtr& c, const EvalOptions& opts) {
  Machine m(c);
  m.sig = opts.sig.get();
  EvalStats stats;
  std::unordered_map<std::string, uint64_t> seen;
  bool cycle_tracking = opts.detect_cycles;

  Outcome out;
  while (true) {
    m.descend();

    // terminal shapes first: they consume no step
    if (const auto* r = m.focus->as<Return>(); r && m.frames.empty()) {
      out.kind = Outcome::Kind::Returned;
      out.value = r->value;
      return {out, stats};
    }
    if (m.focus->as<OpCall>()) {
      // peek whether any rule can fire
      size_t j = m.frames.size();
      while (j > 0 && !std::holds_alternative<HandleFrame>(m.frames[j - 1])) --j;
      const OpClause* clause = nullptr;
      if (j > 0) {
        clause = std::get<HandleFrame>(m.frames[j - 1]).handler->find(
            m.focus->as<OpCall>()->op);
      }
      if (!clause) {
        out.kind = Outcome::Kind::Stuck;
        out.op = m.focus->as<OpCall>()->op;
        out.op_arg = m.focus->as<OpCall>()->arg;
        out.handler_depth = m.handle_count;
        return {out, stats};
      }
    }

    if (stats.steps >= opts.budget) {
      out.kind = Outcome::Kind::BudgetExhausted;
      out.steps_used = stats.steps;
      return {out, stats};
    }

    if (cycle_tracking && m.config_size() <= opts.cycle_size_limit) {
      auto key = serialize_canonical(m.recompose());
      auto [it, inserted] = seen.try_emplace(std::move(key), stats.steps);
      if (!inserted) {
        out.kind = Outcome::Kind::CycleDetected;
        out.first_seen = it->second;
        out.period = stats.steps - it->second;
        return {out, stats};
      }
      if (seen.size() >= opts.cycle_max_entries) cycle_tracking = false;
    }

    stats.max_active_handlers = std::max(stats.max_active_handlers, m.handle_count);
    auto r = m.fire();
    if (r.what == Machine::Fire::TypeError) {
      out.kind = Outcome::Kind::DynamicTypeError;
      out.message = r.message;
      return {out, stats};
    }
    ++stats.steps;
  }
}

std::vector<CompPtr> trace(const CompPtr& c, uint64_t budget) {
  std::vector<CompPtr> out;
  if (budget == 0) return out;
  out.push_back(strip_ascriptions(c));
  while (out.size() < budget) {
    auto r = step(out.back());
    if (r.status != StepStatus::Stepped) break;
    out.push_back(r.next);
  }
  return out;
}

}  // namespace feh
