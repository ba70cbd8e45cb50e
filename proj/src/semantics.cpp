#include "evsec/semantics.hpp"

#include "evsec/deduce.hpp"

namespace evsec {

namespace {

term normalized_payload(const semantics_ctx& ctx, const term& t, side sd) {
  term v = ctx.th->normalize(project(ctx.th->sig(), t, sd), ctx.rewrite_budget);
  if (!v->message)
    throw std::logic_error("output payload is not a message: " +
                           to_string(ctx.th->sig(), v));
  return v;
}

std::optional<term> try_compute(const semantics_ctx& ctx, const term& t, side sd) {
  return ctx.th->compute(project(ctx.th->sig(), t, sd), ctx.rewrite_budget);
}

annotation unfold_annotation(const annotation& parent, int serial) {
  std::string role;
  if (parent.k == annotation::kind::session)
    role = parent.role;
  else if (parent.k == annotation::kind::voter)
    role = parent.id + "/" + parent.vote;
  else
    role = "P";
  return annotation::session(role, serial);
}

// Shared generator for the plain and biprocess semantics. In the biprocess
// case both sides must take the same rule; a diverging let yields no step.
std::vector<step> gen_steps(const config& K, const semantics_ctx& ctx,
                            const std::vector<term>& pool, bool bi) {
  const signature& sig = ctx.th->sig();
  std::vector<step> out;

  auto advanced = [&](size_t i, process replacement) {
    config n = K;
    n.procs.erase(n.procs.begin() + static_cast<long>(i));
    if (replacement && replacement->kind == proc_kind::phase &&
        replacement->cont->kind != proc_kind::null)
      n.procs.insert(n.procs.begin() + static_cast<long>(i),
                     {replacement, K.procs[i].ann, -1});
    return n;
  };

  for (size_t i = 0; i < K.procs.size(); ++i) {
    const aproc& ap = K.procs[i];
    const process& g = ap.p;
    if (g->phase != K.phase) continue;
    const process& body = g->cont;
    switch (body->kind) {
      case proc_kind::input: {
        if (!ctx.is_public(body->chan)) break;  // private inputs move via Com
        for (const term& R : pool) {
          auto ul = eval_recipe(R, K.fl, *ctx.th);
          if (!ul) continue;
          term bound = *ul;
          if (bi) {
            auto ur = eval_recipe(R, K.fr, *ctx.th);
            if (!ur) continue;
            if (!equal(*ul, *ur)) bound = mk_choice(*ul, *ur);
          }
          substitution s;
          s.bind(term_kind::var, body->var, bound);
          config n = advanced(i, p_phase(g->phase, subst_process(sig, body->cont, s)));
          action a{action::kind::in, body->chan, R, -1, 0, ap.ann};
          out.push_back({a, std::move(n)});
        }
        break;
      }
      case proc_kind::output: {
        if (ctx.is_public(body->chan)) {
          term vl = normalized_payload(ctx, body->payload, side::left);
          term vr = bi ? normalized_payload(ctx, body->payload, side::right) : vl;
          config n = advanced(i, p_phase(g->phase, body->cont));
          int w = n.fresh_handle();
          n.fl.add(w, vl);
          n.fr.add(w, vr);
          action a{action::kind::out, body->chan, nullptr, w, 0, ap.ann};
          out.push_back({a, std::move(n)});
        } else {
          // Com: pair with an input on the same private channel at this phase.
          for (size_t j = 0; j < K.procs.size(); ++j) {
            if (j == i) continue;
            const aproc& bp = K.procs[j];
            if (bp.p->phase != K.phase) continue;
            const process& ib = bp.p->cont;
            if (ib->kind != proc_kind::input || ib->chan != body->chan) continue;
            term vl = normalized_payload(ctx, body->payload, side::left);
            term bound = vl;
            if (bi) {
              term vr = normalized_payload(ctx, body->payload, side::right);
              if (!equal(vl, vr)) bound = mk_choice(vl, vr);
            }
            substitution s;
            s.bind(term_kind::var, ib->var, bound);
            config n = K;
            process sender = p_phase(K.phase, body->cont);
            process receiver = p_phase(K.phase, subst_process(sig, ib->cont, s));
            size_t hi = std::max(i, j), lo = std::min(i, j);
            n.procs.erase(n.procs.begin() + static_cast<long>(hi));
            n.procs.erase(n.procs.begin() + static_cast<long>(lo));
            auto put = [&](process p, const annotation& ann) {
              if (p->cont->kind != proc_kind::null) n.procs.push_back({p, ann, -1});
            };
            put(sender, ap.ann);
            put(receiver, bp.ann);
            action a{action::kind::tau, body->chan, nullptr, -1, 0, ap.ann};
            out.push_back({a, std::move(n)});
          }
        }
        break;
      }
      case proc_kind::let_: {
        auto vl = try_compute(ctx, body->payload, side::left);
        auto vr = bi ? try_compute(ctx, body->payload, side::right) : vl;
        if (vl.has_value() != vr.has_value()) break;  // biprocess blocks
        if (vl) {
          term bound = *vl;
          if (bi && !equal(*vl, *vr)) bound = mk_choice(*vl, *vr);
          substitution s;
          s.bind(term_kind::var, body->var, bound);
          config n = advanced(i, p_phase(g->phase, subst_process(sig, body->cont, s)));
          action a{action::kind::tau_then, -1, nullptr, -1, 0, ap.ann};
          out.push_back({a, std::move(n)});
        } else {
          config n = advanced(i, p_phase(g->phase, body->alt));
          action a{action::kind::tau_else, -1, nullptr, -1, 0, ap.ann};
          out.push_back({a, std::move(n)});
        }
        break;
      }
      case proc_kind::new_: {
        int fresh = atoms::fresh_name(atoms::display(term_kind::name, body->name_id));
        substitution s;
        s.bind(term_kind::name, body->name_id, mk_name(fresh));
        config n = advanced(i, p_phase(g->phase, subst_process(sig, body->cont, s)));
        action a{action::kind::tau, -1, nullptr, -1, 0, ap.ann};
        out.push_back({a, std::move(n)});
        break;
      }
      case proc_kind::parallel: {
        config n = K;
        n.procs.erase(n.procs.begin() + static_cast<long>(i));
        n.push(p_phase(g->phase, body->cont), ap.ann);
        n.push(p_phase(g->phase, body->alt), ap.ann);
        action a{action::kind::tau, -1, nullptr, -1, 0, ap.ann};
        out.push_back({a, std::move(n)});
        break;
      }
      case proc_kind::repl: {
        int budget = ap.repl_budget >= 0 ? ap.repl_budget : ctx.repl_budget;
        if (budget <= 0) break;
        config n = K;
        n.procs[i].repl_budget = budget - 1;
        annotation child = unfold_annotation(ap.ann, n.next_serial++);
        n.push(p_phase(g->phase, body->cont), child);
        action a{action::kind::tau, -1, nullptr, -1, 0, ap.ann};
        out.push_back({a, std::move(n)});
        break;
      }
      case proc_kind::phase: {
        config n = K;
        n.procs.erase(n.procs.begin() + static_cast<long>(i));
        n.push(body, ap.ann);
        action a{action::kind::tau, -1, nullptr, -1, 0, ap.ann};
        out.push_back({a, std::move(n)});
        break;
      }
      case proc_kind::null:
        break;
    }
  }

  for (int target : ctx.phase_targets) {
    if (target <= K.phase) continue;
    config n = K;
    n.phase = target;
    action a{action::kind::phase_jump, -1, nullptr, -1, target, annotation{}};
    out.push_back({a, std::move(n)});
  }
  return out;
}

}  // namespace

std::vector<step> enabled_steps(const config& K, const semantics_ctx& ctx,
                                const std::vector<term>& pool) {
  return gen_steps(K, ctx, pool, false);
}

std::vector<step> bi_enabled_steps(const config& K, const semantics_ctx& ctx,
                                   const std::vector<term>& pool) {
  return gen_steps(K, ctx, pool, true);
}

config replay(const config& K0, const semantics_ctx& ctx, const trace& tr,
              trace* out_actions) {
  config cur = K0;
  bool bi = !cur.plain();
  for (size_t pos = 0; pos < tr.size(); ++pos) {
    const action& want = tr[pos];
    std::vector<term> pool;
    if (want.k == action::kind::in) {
      if (!want.recipe || want.recipe->has_xvar) throw replay_mismatch(pos);
      pool.push_back(want.recipe);
    }
    auto steps = bi ? bi_enabled_steps(cur, ctx, pool) : enabled_steps(cur, ctx, pool);
    bool found = false;
    for (auto& s : steps) {
      if (s.act.k != want.k) continue;
      if (want.k == action::kind::phase_jump && s.act.target != want.target) continue;
      if (want.k == action::kind::in &&
          (s.act.chan != want.chan || !equal(s.act.recipe, want.recipe)))
        continue;
      if (want.k == action::kind::out && s.act.chan != want.chan) continue;
      if (want.who.k != annotation::kind::none && !(s.act.who == want.who)) continue;
      if (want.k == action::kind::out && want.handle >= 0 && s.act.handle != want.handle)
        continue;
      cur = s.next;
      if (out_actions) out_actions->push_back(s.act);
      found = true;
      break;
    }
    if (!found) throw replay_mismatch(pos);
  }
  return cur;
}

}  // namespace evsec
