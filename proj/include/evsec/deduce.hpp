#pragma once

// Attacker deduction over a frame: saturation under public destructors (and
// rewrite-firing constructor applications), goal-directed synthesis of
// recipes, and the bounded recipe stream.

#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

#include "evsec/frame.hpp"
#include "evsec/theory.hpp"

namespace evsec {

struct fact {
  term msg;     // normal form
  term recipe;  // smallest discovered, ties broken by printed form
  int depth;
};

// One saturation of a single frame. `dup_pairs` records every further recipe
// found for an already-known message; these carry the equality tests used by
// static equivalence.
class knowledge {
 public:
  knowledge(const frame& f, const theory& th, int max_depth);

  const std::vector<fact>& facts() const { return facts_; }
  const std::vector<std::pair<term, term>>& dup_pairs() const { return dup_pairs_; }

  // Smallest recipe computing `msg` from the saturated facts plus public
  // constructor composition; nullopt when the goal is not derivable.
  std::optional<term> synthesize(const term& msg) const;

  const theory& th() const { return th_; }

 private:
  bool better(const term& a, const term& b) const;
  void add(const term& msg, const term& recipe, int depth);

  const theory& th_;
  int max_depth_;
  std::vector<fact> facts_;
  std::unordered_map<std::size_t, std::vector<int>> by_msg_;
  std::vector<std::pair<term, term>> dup_pairs_;
  mutable std::unordered_map<std::size_t, std::optional<term>> syn_cache_;
};

// Substitutes frame values for handles, then computes. nullopt when a handle
// is unbound, the recipe is not concrete, or the computation fails.
std::optional<term> eval_recipe(const term& recipe, const frame& f, const theory& th);

enum class recipe_mode {
  all,             // every recipe (exponential; tiny inputs only)
  canonical,       // first recipe per distinct message normal form
  canonical_args,  // every top application over canonical subrecipes
};

// Calls `visit(recipe, computed)` per recipe of syntactic depth <= depth;
// `computed` is empty for failing computations. Stops when visit returns
// false.
void enumerate_recipes(const frame& f, const theory& th, int depth, recipe_mode mode,
                       const std::function<bool(const term&, const std::optional<term>&)>& visit);

}  // namespace evsec
