#pragma once

// Labelled transition semantics over configurations, in canonical order:
// process insertion order first, then In < Out/Com < Let < New < Par < Repl <
// Phase-unwrap per process, with phase jumps last.

#include <set>
#include <stdexcept>

#include "evsec/process.hpp"
#include "evsec/theory.hpp"

namespace evsec {

struct semantics_ctx {
  const theory* th = nullptr;
  std::set<int> public_chans;
  std::vector<int> phase_targets;  // ascending; jump candidates
  int repl_budget = 2;
  int rewrite_budget = default_rewrite_budget;

  bool is_public(int chan) const { return public_chans.count(chan) > 0; }
};

struct step {
  action act;
  config next;
};

struct replay_mismatch : std::runtime_error {
  size_t position;
  explicit replay_mismatch(size_t pos)
      : std::runtime_error("trace action " + std::to_string(pos) + " is not enabled"),
        position(pos) {}
};

// Successors of a plain configuration. Attacker inputs range over `pool`.
std::vector<step> enabled_steps(const config& K, const semantics_ctx& ctx,
                                const std::vector<term>& pool);

// Successors of a bi-configuration: both projections must reduce by the same
// rule; a let whose sides disagree blocks.
std::vector<step> bi_enabled_steps(const config& K, const semantics_ctx& ctx,
                                   const std::vector<term>& pool);

// Deterministic re-execution of a trace; throws replay_mismatch at the first
// inapplicable action.
config replay(const config& K0, const semantics_ctx& ctx, const trace& tr,
              trace* out_actions = nullptr);

}  // namespace evsec
