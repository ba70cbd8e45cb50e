#include "evsec/protocol.hpp"

namespace evsec {

namespace {

// Replace idealisation constants by the corresponding second-order variables.
term symbolize(const signature& sig, const term& t) {
  if (t->kind == term_kind::app && t->args.empty() && sig.at(t->id).ideal)
    return mk_xvar(sig.at(t->id).name);
  if (t->args.empty()) return t;
  std::vector<term> args;
  bool changed = false;
  for (const auto& a : t->args) {
    term b = symbolize(sig, a);
    changed = changed || b.get() != a.get();
    args.push_back(std::move(b));
  }
  if (!changed) return t;
  return t->kind == term_kind::choice ? mk_choice(args[0], args[1])
                                      : mk_app(sig, t->id, std::move(args));
}

bool has_ideal(const signature& sig, const term& t) {
  if (t->kind == term_kind::app && t->args.empty() && sig.at(t->id).ideal) return true;
  for (const auto& a : t->args)
    if (has_ideal(sig, a)) return true;
  return false;
}

}  // namespace

// Deterministic schedule over the honest system: each role runs as far as it
// can in configuration order; input recipes are rebuilt from the declared
// honest messages by smallest-first synthesis; phases advance minimally when
// everyone blocks.
bool extract_honest_trace(evoting_protocol& p, std::vector<diagnostic>& diags) {
  const signature& sig = p.th.sig();
  semantics_ctx cx = p.ctx();
  config cfg = p.honest_config();
  substitution names = p.honest_name_subst();

  trace recorded;
  auto take = [&](const step& st) {
    recorded.push_back(st.act);
    cfg = st.next;
  };

  int guard_iterations = 0;
  for (;;) {
    if (++guard_iterations > 10000) {
      diags.push_back({0, 0, "honest execution did not terminate", ""});
      return false;
    }
    bool progressed = false;
    for (size_t i = 0; i < cfg.procs.size() && !progressed; ++i) {
      const aproc& ap = cfg.procs[i];
      if (ap.p->phase != cfg.phase) continue;
      const process& body = ap.p->cont;
      if (body->kind == proc_kind::input && cx.is_public(body->chan)) {
        if (body->hint_role < 0 ||
            body->hint_index >=
                static_cast<int>(p.roles[static_cast<size_t>(body->hint_role)].expects.size()))
          continue;
        const term& tmpl =
            p.roles[static_cast<size_t>(body->hint_role)].expects[static_cast<size_t>(
                body->hint_index)];
        if (!tmpl) {
          diags.push_back({0, 0,
                           "input on " + channels::display(body->chan) + " in role " +
                               p.roles[static_cast<size_t>(body->hint_role)].name +
                               " has no honest message",
                           "annotate it as in(c, x : message)"});
          return false;
        }
        substitution s = names;
        s.bind(term_kind::var, atoms::var("id"), p.id_A());
        s.bind(term_kind::var, atoms::var("v"), p.vote0());
        term goal;
        try {
          goal = p.th.normalize(s.apply(sig, tmpl));
        } catch (const budget_exceeded&) {
          continue;
        }
        if (!goal->message) continue;
        knowledge kb(cfg.fl, p.th, p.default_bounds.depth);
        auto recipe = kb.synthesize(goal);
        if (!recipe) continue;  // maybe expressible later
        auto steps = enabled_steps(cfg, cx, {*recipe});
        for (const auto& st : steps) {
          if (st.act.k == action::kind::in && st.act.who == ap.ann &&
              equal(st.act.recipe, *recipe)) {
            take(st);
            progressed = true;
            break;
          }
        }
      } else if (body->kind != proc_kind::input) {
        auto steps = enabled_steps(cfg, cx, {});
        for (const auto& st : steps) {
          if (st.act.k == action::kind::phase_jump) continue;
          if (st.act.who == ap.ann) {
            take(st);
            progressed = true;
            break;
          }
        }
      }
    }
    if (progressed) continue;
    // minimal phase advance, only while someone still waits at a later phase
    int next_phase = 0;
    for (int ph : p.phases)
      if (ph > cfg.phase) {
        next_phase = ph;
        break;
      }
    bool waiting = false;
    for (const auto& ap : cfg.procs)
      if (ap.p->phase > cfg.phase) waiting = true;
    if (!next_phase || !waiting) break;
    auto steps = enabled_steps(cfg, cx, {});
    for (const auto& st : steps)
      if (st.act.k == action::kind::phase_jump && st.act.target == next_phase) {
        take(st);
        break;
      }
  }

  // Anything still waiting for input could not be expressed from prior
  // outputs and public constructions.
  for (const auto& ap : cfg.procs) {
    if (ap.p->cont->kind == proc_kind::input && ap.p->phase == cfg.phase) {
      diags.push_back({0, 0,
                       "honest message for input on " +
                           channels::display(ap.p->cont->chan) + " (" + ap.ann.str() +
                           ") is not derivable from prior outputs",
                       ""});
      return false;
    }
  }

  honest_trace ht;
  ht.idealised = recorded;
  for (auto a : recorded) {
    if (a.k == action::kind::in && a.recipe) {
      if (has_ideal(sig, a.recipe)) ht.has_xvars = true;
      a.recipe = symbolize(sig, a.recipe);
    }
    ht.symbolic.push_back(a);
  }
  ht.final_frame = cfg.fl;
  ht.k_f = cfg.phase;
  p.htr = std::move(ht);
  p.k_f = cfg.phase;
  return true;
}

}  // namespace evsec
