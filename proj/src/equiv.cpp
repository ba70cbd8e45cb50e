#include "evsec/equiv.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace evsec {

// ---------------------------------------------------------------------------
// Static equivalence

namespace {

// One static inclusion: every saturation test of `a` must carry over to `b`.
bool static_included(const frame& a, const frame& b, const theory& th, const bounds& bo,
                     verdict& out) {
  knowledge kb(a, th, bo.depth);
  for (const auto& f : kb.facts()) {
    if (!eval_recipe(f.recipe, b, th)) {
      out.pass = false;
      out.reason = "computation succeeds on one side only";
      out.recipe1 = f.recipe;
      return false;
    }
  }
  for (const auto& [r1, r2] : kb.dup_pairs()) {
    auto m1 = eval_recipe(r1, b, th);
    auto m2 = eval_recipe(r2, b, th);
    if (!m1 || !m2 || !equal(*m1, *m2)) {
      out.pass = false;
      out.reason = "recipes compute equal messages on one side only";
      out.recipe1 = r1;
      out.recipe2 = r2;
      return false;
    }
  }
  return true;
}

}  // namespace

verdict static_equiv(const frame& f1, const frame& f2, const theory& th, const bounds& b) {
  verdict v = verdict::ok(b);
  if (!f1.same_domain(f2)) {
    v.pass = false;
    v.reason = "frame domains differ";
    return v;
  }
  if (!static_included(f1, f2, th, b, v)) return v;
  if (!static_included(f2, f1, th, b, v)) return v;
  return v;
}

// ---------------------------------------------------------------------------
// equiv_cache

const knowledge& equiv_cache::kb(const frame& f) {
  frame empty;
  std::string key = frame_pair_key(th_.sig(), f, empty);
  auto it = kbs_.find(key);
  if (it == kbs_.end())
    it = kbs_.emplace(key, std::make_unique<knowledge>(f, th_, b_.depth)).first;
  return *it->second;
}

const verdict& equiv_cache::static_check(const frame& fl, const frame& fr) {
  std::string key = frame_pair_key(th_.sig(), fl, fr);
  auto it = statics_.find(key);
  if (it == statics_.end())
    it = statics_.emplace(key, static_equiv(fl, fr, th_, b_)).first;
  return it->second;
}

// ---------------------------------------------------------------------------
// explorer

explorer::explorer(config K0, explore_env env, equiv_cache* cache)
    : env_(std::move(env)), cache_(cache), root_(std::move(K0)) {
  if (!cache_) {
    owned_cache_ = std::make_unique<equiv_cache>(*env_.sem.th, env_.b);
    cache_ = owned_cache_.get();
  }
  env_.sem.repl_budget = env_.b.repl;
  env_.sem.rewrite_budget = env_.b.rewrite;
}

// Structural tau steps (new, parallel split, nested-phase unwrap) are
// deterministic and commute with everything; they are taken eagerly in
// canonical order so that interleavings collapse.
void explorer::settle(config& K, std::vector<action>* rec) const {
  const signature& sig = env_.sem.th->sig();
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < K.procs.size(); ++i) {
      process holder = K.procs[i].p;  // keep the node alive across the erase
      if (holder->phase != K.phase) continue;
      process body = holder->cont;
      if (body->kind != proc_kind::new_ && body->kind != proc_kind::parallel &&
          body->kind != proc_kind::phase)
        continue;
      annotation ann = K.procs[i].ann;
      int guard = holder->phase;
      K.procs.erase(K.procs.begin() + static_cast<long>(i));
      switch (body->kind) {
        case proc_kind::new_: {
          // Session names are minted deterministically from the annotation so
          // branches that differ only in creation order merge, and honest
          // message hints can be re-instantiated per session.
          int fresh = atoms::name(atoms::display(term_kind::name, body->name_id) + "@" +
                                  ann.str());
          substitution s;
          s.bind(term_kind::name, body->name_id, mk_name(fresh));
          K.procs.insert(K.procs.begin() + static_cast<long>(i),
                         {p_phase(guard, subst_process(sig, body->cont, s)), ann, -1});
          break;
        }
        case proc_kind::parallel: {
          config tmp;
          tmp.push(p_phase(guard, body->cont), ann);
          tmp.push(p_phase(guard, body->alt), ann);
          K.procs.insert(K.procs.begin() + static_cast<long>(i), tmp.procs.begin(),
                         tmp.procs.end());
          break;
        }
        case proc_kind::phase: {
          if (body->cont->kind != proc_kind::null)
            K.procs.insert(K.procs.begin() + static_cast<long>(i), {body, ann, -1});
          break;
        }
        default:
          break;
      }
      // Drop processes that settled to a guarded null.
      for (size_t j = 0; j < K.procs.size();) {
        if (K.procs[j].p->cont->kind == proc_kind::null)
          K.procs.erase(K.procs.begin() + static_cast<long>(j));
        else
          ++j;
      }
      if (rec) rec->push_back({action::kind::tau, -1, nullptr, -1, 0, ann});
      changed = true;
      break;
    }
  }
}

const std::vector<term>& explorer::pool_for(const config& K) {
  const signature& sig = env_.sem.th->sig();
  std::string key = frame_pair_key(sig, K.fl, K.fr);
  auto it = pool_cache_.find(key);
  if (it == pool_cache_.end()) {
    std::vector<term> pool;
    std::set<std::string> seen;
    auto push = [&](const term& r) {
      std::string s = to_string(sig, r);
      if (seen.insert(s).second) pool.push_back(r);
    };
    for (const auto& f : cache_->kb(K.fl).facts()) push(f.recipe);
    if (env_.bi)
      for (const auto& f : cache_->kb(K.fr).facts()) push(f.recipe);
    it = pool_cache_.emplace(key, std::move(pool)).first;
  }
  // Hints depend on the configuration, not just the frames.
  if (!env_.extend_pool) return it->second;
  static thread_local std::vector<term> scratch;
  scratch = it->second;
  std::set<std::string> seen;
  for (const auto& r : scratch) seen.insert(to_string(sig, r));
  std::vector<term> extra;
  env_.extend_pool(K, cache_->kb(K.fl), cache_->kb(K.fr), extra);
  for (const auto& r : extra)
    if (seen.insert(to_string(sig, r)).second) scratch.push_back(r);
  return scratch;
}

bool explorer::make_child(const xstate& parent, const step& st, xstate& out) {
  const signature& sig = env_.sem.th->sig();
  out = xstate{};
  out.K = st.next;
  out.parent = parent.id;
  out.via = {st.act};
  out.depth = parent.depth + 1;
  out.log = parent.log;
  out.bb = parent.bb;
  out.voter_outs = parent.voter_outs;
  out.session_last_in = parent.session_last_in;
  out.casts = parent.casts;

  const action& a = st.act;
  switch (a.k) {
    case action::kind::in: {
      auto m = eval_recipe(a.recipe, parent.K.fl, *env_.sem.th);
      term msg = m ? *m : nullptr;
      if (a.who.k == annotation::kind::session && msg)
        out.session_last_in[a.who] = {a.chan, msg};
      if (env_.track_logs)
        out.log.push_back({a.who, {a.k, a.chan, msg, parent.K.phase, -1}});
      break;
    }
    case action::kind::out: {
      const term* val = out.K.fl.lookup(a.handle);
      term msg = val ? *val : nullptr;
      if (a.who.k == annotation::kind::voter && msg)
        out.voter_outs[a.who].push_back({a.chan, msg});
      if (a.chan == env_.ballot_chan) {
        out.bb.push_back(a.handle);
        if (a.who.k == annotation::kind::session && msg) {
          auto it = out.session_last_in.find(a.who);
          if (it != out.session_last_in.end()) {
            for (const auto& [vann, outs] : out.voter_outs) {
              if (out.casts.count(vann)) continue;
              for (const auto& [ch, vmsg] : outs) {
                if (ch == it->second.first && equal(vmsg, it->second.second)) {
                  bool valid = env_.ballot_valid ? env_.ballot_valid(msg) : true;
                  out.casts[vann] = {a.handle, valid};
                  break;
                }
              }
            }
          }
        }
      }
      if (env_.track_logs)
        out.log.push_back({a.who, {a.k, a.chan, msg, parent.K.phase, a.handle}});
      break;
    }
    case action::kind::tau_then:
    case action::kind::tau_else:
      if (env_.track_logs)
        out.log.push_back({a.who, {a.k, -1, nullptr, parent.K.phase, -1}});
      break;
    case action::kind::tau:
      if (env_.track_logs && a.chan >= 0)  // private communication
        out.log.push_back({a.who, {a.k, a.chan, nullptr, parent.K.phase, -1}});
      break;
    case action::kind::phase_jump: {
      if (env_.fairness) {
        for (const auto& v : env_.voters) {
          bool present = false;
          for (const auto& ap : out.K.procs)
            if (ap.ann == v && ap.p->phase == a.target) present = true;
          if (!present) return false;  // unfair continuation, prune
        }
      }
      if (env_.track_logs)
        out.log.push_back({annotation{}, {a.k, -1, nullptr, a.target, -1}});
      break;
    }
  }

  // A voter whose residual vanished on a failed conditional can never be
  // inspected again; collapse its log so garbage inputs merge.
  if (env_.track_logs && a.k == action::kind::tau_else &&
      a.who.k == annotation::kind::voter) {
    bool present = false;
    for (const auto& ap : out.K.procs)
      if (ap.ann == a.who) present = true;
    if (!present) {
      std::vector<std::pair<annotation, sem_entry>> keep;
      for (auto& e : out.log)
        if (!(e.first == a.who)) keep.push_back(e);
      keep.push_back({a.who, {action::kind::tau_else, -2, nullptr, 0, -1}});
      out.log = std::move(keep);
    }
  }

  settle(out.K, &out.via);
  (void)sig;
  return true;
}

std::string explorer::state_key(const xstate& s) const {
  const signature& sig = env_.sem.th->sig();
  std::map<int, int> rename;
  std::string key;
  config_key_into(sig, s.K, rename, key);
  key += "#bb:";
  for (int h : s.bb) key += atoms::display(term_kind::handle, h) + ",";
  key += "#casts:";
  for (const auto& [v, hv] : s.casts)
    key += v.str() + "=" + std::to_string(hv.first) + (hv.second ? "+" : "-") + ";";
  key += "#vouts:";
  for (const auto& [v, outs] : s.voter_outs) {
    key += v.str() + "{";
    for (const auto& [ch, m] : outs) {
      key += channels::display(ch) + ":";
      canonical_term_key(sig, m, rename, key);
      key += ",";
    }
    key += "}";
  }
  key += "#sin:";
  for (const auto& [ann, chm] : s.session_last_in) {
    key += ann.str() + "{" + channels::display(chm.first) + ":";
    canonical_term_key(sig, chm.second, rename, key);
    key += "}";
  }
  if (env_.track_logs) {
    key += "#log:";
    for (const auto& [ann, e] : s.log) {
      key += ann.str() + "/" + std::to_string(static_cast<int>(e.k)) + "/" +
             std::to_string(e.chan) + "/";
      if (e.msg) canonical_term_key(sig, e.msg, rename, key);
      key += "/" + std::to_string(e.phase) + ";";
    }
  }
  return key;
}

void explorer::run(const std::function<bool(const xstate&)>& visit) {
  states_.clear();
  std::set<std::string> seen;
  xstate root;
  root.K = root_;
  settle(root.K, nullptr);
  root.id = 0;
  states_.push_back(root);
  seen.insert(state_key(root));

  std::deque<int> queue{0};
  while (!queue.empty()) {
    int id = queue.front();
    queue.pop_front();
    xstate snapshot = states_[static_cast<size_t>(id)];
    if (!visit(snapshot)) return;
    if (snapshot.depth >= env_.b.max_trace) continue;
    const auto& pool = pool_for(snapshot.K);
    auto steps = env_.bi ? bi_enabled_steps(snapshot.K, env_.sem, pool)
                         : enabled_steps(snapshot.K, env_.sem, pool);
    for (const auto& st : steps) {
      xstate child;
      if (!make_child(snapshot, st, child)) continue;
      std::string key = state_key(child);
      if (!seen.insert(key).second) continue;
      child.id = static_cast<int>(states_.size());
      states_.push_back(child);
      queue.push_back(child.id);
    }
  }
}

trace explorer::trace_to(const xstate& s) const {
  std::vector<const xstate*> chain;
  const xstate* cur = &s;
  for (;;) {
    chain.push_back(cur);
    if (cur->parent < 0) break;
    cur = &states_[static_cast<size_t>(cur->parent)];
  }
  trace tr;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it)
    for (const auto& a : (*it)->via) tr.push_back(a);
  return tr;
}

bool explorer::is_fair_state(const xstate& s) const {
  // Clause (i) violations are pruned during exploration; what remains is the
  // cast-parity clause between the two distinguished voters.
  if (env_.voters.size() < 2) return true;
  bool a = s.casts.count(env_.voters[0]) > 0;
  bool b = s.casts.count(env_.voters[1]) > 0;
  return a == b;
}

// ---------------------------------------------------------------------------
// diff-equivalence

verdict diff_equiv_check(const config& K0, explore_env env, equiv_cache* cache) {
  env.bi = true;
  explorer ex(K0, env, cache);
  verdict result = verdict::ok(env.b);
  const theory& th = *env.sem.th;

  ex.run([&](const xstate& s) {
    const verdict& sv = ex.cache().static_check(s.K.fl, s.K.fr);
    if (!sv.pass) {
      result = sv;
      result.used = env.b;
      result.reason = "frames statically inequivalent: " + sv.reason;
      result.witness = ex.trace_to(s);
      return false;
    }
    // Out, Com, New, Par, Repl and phase jumps are always jointly enabled;
    // only conditionals and input computability can diverge.
    for (const auto& ap : s.K.procs) {
      if (ap.p->phase != s.K.phase) continue;
      const process& body = ap.p->cont;
      if (body->kind == proc_kind::let_) {
        auto vl = th.compute(project(th.sig(), body->payload, side::left), env.b.rewrite);
        auto vr = th.compute(project(th.sig(), body->payload, side::right), env.b.rewrite);
        if (vl.has_value() != vr.has_value()) {
          result.pass = false;
          result.reason = "conditional evaluation diverges at " + ap.ann.str();
          result.witness = ex.trace_to(s);
          return false;
        }
      } else if (body->kind == proc_kind::input && env.sem.is_public(body->chan)) {
        for (const term& r : ex.pool_for(s.K)) {
          bool l = eval_recipe(r, s.K.fl, th).has_value();
          bool rr = eval_recipe(r, s.K.fr, th).has_value();
          if (l != rr) {
            result.pass = false;
            result.reason = "input recipe computes on one side only";
            result.recipe1 = r;
            result.witness = ex.trace_to(s);
            return false;
          }
        }
      }
    }
    return true;
  });
  return result;
}

// ---------------------------------------------------------------------------
// trace equivalence

namespace {

std::string obs_key(const signature& sig, const trace& tr) {
  std::string s;
  for (const auto& a : tr)
    if (a.observable()) s += to_string(sig, a) + ".";
  return s;
}

void collect_recipes(const explorer& ex, std::set<std::string>& seen,
                     std::vector<term>& out, const signature& sig) {
  for (const auto& s : ex.states())
    for (const auto& a : s.via)
      if (a.k == action::kind::in && a.recipe)
        if (seen.insert(to_string(sig, a.recipe)).second) out.push_back(a.recipe);
}

}  // namespace

verdict trace_equiv_check(
    const config& K1, const config& K2, explore_env env,
    const std::function<bool(const xstate&)>& universal_filter,
    const std::function<bool(const xstate&, const xstate&)>& extra_match,
    equiv_cache* cache) {
  const signature& sig = env.sem.th->sig();
  env.bi = false;
  std::unique_ptr<equiv_cache> owned;
  if (!cache) {
    owned = std::make_unique<equiv_cache>(*env.sem.th, env.b);
    cache = owned.get();
  }

  auto with_extra = [&](std::vector<term> extra) {
    explore_env e = env;
    auto base_fn = env.extend_pool;
    e.extend_pool = [extra = std::move(extra), base_fn](const config& K, const knowledge& kl,
                                                     const knowledge& kr,
                                                     std::vector<term>& out) {
      if (base_fn) base_fn(K, kl, kr, out);
      for (const auto& r : extra) out.push_back(r);
    };
    return e;
  };

  // Recipes are part of the observables, so each side must be offered the
  // other side's attacker inputs before matching.
  explorer pre1(K1, env, cache);
  pre1.run([](const xstate&) { return true; });
  std::set<std::string> seen_r;
  std::vector<term> u1;
  collect_recipes(pre1, seen_r, u1, sig);

  explorer e2(K2, with_extra(u1), cache);
  e2.run([](const xstate&) { return true; });
  std::vector<term> u2 = u1;
  collect_recipes(e2, seen_r, u2, sig);

  explorer e1(K1, with_extra(u2), cache);
  e1.run([](const xstate&) { return true; });

  auto filter_of = [&](const explorer& ex, const xstate& s) {
    if (env.fairness && !ex.is_fair_state(s)) return false;
    return !universal_filter || universal_filter(s);
  };

  auto one_direction = [&](explorer& uni, explorer& exi, const char* dir) -> verdict {
    std::map<std::string, std::vector<int>> index;
    for (const auto& s : exi.states())
      if (filter_of(exi, s)) index[obs_key(sig, exi.trace_to(s))].push_back(s.id);
    for (const auto& s : uni.states()) {
      if (!filter_of(uni, s)) continue;
      auto it = index.find(obs_key(sig, uni.trace_to(s)));
      bool matched = false;
      if (it != index.end()) {
        for (int cid : it->second) {
          const xstate& c = exi.states()[static_cast<size_t>(cid)];
          if (!cache->static_check(s.K.fl, c.K.fl).pass) continue;
          if (extra_match && !extra_match(s, c)) continue;
          matched = true;
          break;
        }
      }
      if (!matched) {
        verdict v = verdict::ok(env.b);
        v.pass = false;
        v.reason = std::string("unmatched execution (") + dir + ")";
        v.witness = uni.trace_to(s);
        return v;
      }
    }
    return verdict::ok(env.b);
  };

  verdict d1 = one_direction(e1, e2, "left-to-right");
  if (!d1.pass) return d1;
  return one_direction(e2, e1, "right-to-left");
}

}  // namespace evsec
