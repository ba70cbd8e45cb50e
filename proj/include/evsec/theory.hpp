#pragma once

// Convergent rewriting: destructor rules plus the left-to-right orientation
// of the constructor equations. Matching is syntactic on normal forms; a
// destructor rule only fires when every bound subterm is a message.

#include <optional>
#include <stdexcept>
#include <vector>

#include "evsec/term.hpp"

namespace evsec {

struct rewrite_rule {
  term lhs;
  term rhs;
  bool destructor_rule = false;  // false: oriented constructor equation
};

struct budget_exceeded : std::runtime_error {
  budget_exceeded() : std::runtime_error("rewrite budget exceeded") {}
};

enum class rewrite_strategy { innermost, outermost };

constexpr int default_rewrite_budget = 10000;

class theory {
 public:
  theory() = default;
  theory(signature sig, std::vector<rewrite_rule> rules);

  const signature& sig() const { return sig_; }
  const std::vector<rewrite_rule>& rules() const { return rules_; }
  const std::vector<int>& rules_for(int symbol_id) const;

  // Validation findings collected at load: every destructor needs a rule,
  // rule variables must be lhs-covered, oriented equations constructor-only.
  const std::vector<std::string>& load_findings() const { return findings_; }

  term normalize(const term& t, int budget = default_rewrite_budget,
                 rewrite_strategy strategy = rewrite_strategy::innermost) const;
  std::optional<term> compute(const term& t, int budget = default_rewrite_budget) const;
  bool computes(const term& t, int budget = default_rewrite_budget) const;
  bool msg_equal(const term& u, const term& v, int budget = default_rewrite_budget) const;

  // Matching on normal forms: normalizes `t`, then matches syntactically.
  std::optional<substitution> match_pattern(const term& pattern, const term& t) const;

  // Overlap probe for the confluence assumption. Returns one warning per
  // unjoinable critical pair whose unified peak stays within `size_bound`.
  std::vector<std::string> critical_pair_probe(int size_bound = 64) const;

 private:
  term rewrite_root(const term& t, int& budget) const;
  term normalize_innermost(const term& t, int& budget) const;
  term normalize_outermost(const term& t, int& budget) const;

  signature sig_;
  std::vector<rewrite_rule> rules_;
  std::vector<std::vector<int>> by_root_;
  std::vector<int> no_rules_;
  std::vector<std::string> findings_;
};

// Replaces every second-order variable by its idealisation constant (an
// `ideal` constant with the same display name).
term idealise(const signature& sig, const term& recipe);

}  // namespace evsec
