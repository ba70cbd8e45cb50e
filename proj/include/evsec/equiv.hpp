#pragma once

// Bounded deciders for static equivalence, trace equivalence and
// diff-equivalence. Every verdict is relative to the recorded bounds; a pass
// is a pass at bound, never a proof.

#include <functional>
#include <map>
#include <memory>

#include "evsec/deduce.hpp"
#include "evsec/semantics.hpp"

namespace evsec {

struct bounds {
  int depth = 3;       // recipe depth for deduction and pools
  int repl = 2;        // replication unfolds per instance
  int max_trace = 40;  // actions per explored execution
  int rewrite = default_rewrite_budget;
};

struct verdict {
  bool pass = true;
  std::string reason;    // failing check, empty on pass
  trace witness;         // (bi-)trace to the failing state, when applicable
  term recipe1, recipe2; // distinguishing recipe (pair), when applicable
  bounds used;

  static verdict ok(const bounds& b) {
    verdict v;
    v.used = b;
    return v;
  }
};

// Both static inclusions over saturation-derived tests up to b.depth.
verdict static_equiv(const frame& f1, const frame& f2, const theory& th, const bounds& b);

// -- bounded exploration -------------------------------------------------------

// Semantic view of a logged participant action: recipes are replaced by the
// computed message so interleavings that differ only in attacker syntax merge.
struct sem_entry {
  action::kind k;
  int chan = -1;
  term msg;        // in: computed input, out: published value (left side)
  int phase = 0;
  int handle = -1; // out only
};

struct xstate {
  config K;
  int id = 0;
  int parent = -1;
  std::vector<action> via;  // actions from parent (step plus settled taus)
  int depth = 0;

  // chronological interaction log (kept only when track_logs)
  std::vector<std::pair<annotation, sem_entry>> log;
  std::vector<int> bb;  // handles output on the ballot channel
  std::map<annotation, std::vector<std::pair<int, term>>> voter_outs;
  std::map<annotation, std::pair<int, term>> session_last_in;
  std::map<annotation, std::pair<int, bool>> casts;  // voter -> (handle, valid)
};

struct explore_env {
  semantics_ctx sem;
  bounds b;
  bool bi = false;
  bool fairness = false;  // prune phase jumps that drop a distinguished voter
  bool track_logs = false;
  int ballot_chan = -1;
  std::vector<annotation> voters;
  // extra pool entries per state (honest-message hints); receives the left and
  // right saturations of the current frames.
  std::function<void(const config&, const knowledge&, const knowledge&,
                     std::vector<term>&)> extend_pool;
  // validity test for cast ballots (Psi_b); evaluated on left-frame values
  std::function<bool(const term&)> ballot_valid;
};

// Saturations and static verdicts are cached per frame pair across a run.
class equiv_cache {
 public:
  explicit equiv_cache(const theory& th, const bounds& b) : th_(th), b_(b) {}
  const knowledge& kb(const frame& f);
  const verdict& static_check(const frame& fl, const frame& fr);

 private:
  const theory& th_;
  bounds b_;
  std::map<std::string, std::unique_ptr<knowledge>> kbs_;
  std::map<std::string, verdict> statics_;
};

class explorer {
 public:
  explorer(config K0, explore_env env, equiv_cache* cache);

  // Breadth-first exploration with canonical dedup; the visitor sees every
  // state (including the root) and may stop the run by returning false.
  void run(const std::function<bool(const xstate&)>& visit);

  const std::vector<xstate>& states() const { return states_; }
  trace trace_to(const xstate& s) const;
  const std::vector<term>& pool_for(const config& K);
  bool is_fair_state(const xstate& s) const;  // clause (i) held and cast parity
  equiv_cache& cache() { return *cache_; }
  const explore_env& env() const { return env_; }

 private:
  std::string state_key(const xstate& s) const;
  void settle(config& K, std::vector<action>* rec) const;
  bool make_child(const xstate& parent, const step& st, xstate& out);

  explore_env env_;
  equiv_cache* cache_;
  std::unique_ptr<equiv_cache> owned_cache_;
  config root_;
  std::vector<xstate> states_;
  std::map<std::string, std::vector<term>> pool_cache_;
};

// Diff-equivalence of a bi-configuration: at every reachable bi-state the
// projected frames must be statically equivalent and every projection action
// (over the pool) must be matched by a bi-step.
verdict diff_equiv_check(const config& K0, explore_env env, equiv_cache* cache = nullptr);

// Trace equivalence of two plain configurations under a filter; extra_match
// adds per-pair conditions (e.g. equal tally outcomes).
verdict trace_equiv_check(
    const config& K1, const config& K2, explore_env env,
    const std::function<bool(const xstate&)>& universal_filter = {},
    const std::function<bool(const xstate&, const xstate&)>& extra_match = {},
    equiv_cache* cache = nullptr);

}  // namespace evsec
