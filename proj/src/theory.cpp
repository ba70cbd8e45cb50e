#include "evsec/theory.hpp"

#include <functional>
#include <set>
#include <sstream>

namespace evsec {

namespace {

void collect_vars(const term& t, std::set<std::pair<term_kind, int>>& out) {
  if (t->kind == term_kind::var || t->kind == term_kind::xvar)
    out.insert({t->kind, t->id});
  for (const auto& a : t->args) collect_vars(a, out);
}

bool constructor_only(const signature& sig, const term& t) {
  if (t->kind == term_kind::app && !sig.at(t->id).constructor) return false;
  for (const auto& a : t->args)
    if (!constructor_only(sig, a)) return false;
  return true;
}

}  // namespace

theory::theory(signature sig, std::vector<rewrite_rule> rules)
    : sig_(std::move(sig)), rules_(std::move(rules)) {
  by_root_.resize(static_cast<size_t>(sig_.size()));
  std::vector<bool> has_rule(static_cast<size_t>(sig_.size()), false);
  for (size_t i = 0; i < rules_.size(); ++i) {
    const auto& r = rules_[i];
    if (r.lhs->kind != term_kind::app) {
      findings_.push_back("rule lhs must be an application");
      continue;
    }
    const symbol& root = sig_.at(r.lhs->id);
    if (r.destructor_rule && root.constructor)
      findings_.push_back("destructor rule headed by constructor " + root.name);
    if (!r.destructor_rule && !root.constructor)
      findings_.push_back("oriented equation headed by destructor " + root.name);
    for (const auto& a : r.lhs->args)
      if (!constructor_only(sig_, a))
        findings_.push_back("rule argument patterns must be constructor terms: " +
                            to_string(sig_, r.lhs));
    if (!constructor_only(sig_, r.rhs))
      findings_.push_back("rule rhs must be a constructor term: " + to_string(sig_, r.rhs));
    std::set<std::pair<term_kind, int>> lv, rv;
    collect_vars(r.lhs, lv);
    collect_vars(r.rhs, rv);
    for (const auto& v : rv)
      if (!lv.count(v))
        findings_.push_back("rule rhs variable not bound by lhs: " + to_string(sig_, r.rhs));
    by_root_[static_cast<size_t>(r.lhs->id)].push_back(static_cast<int>(i));
    has_rule[static_cast<size_t>(r.lhs->id)] = true;
  }
  for (int s = 0; s < sig_.size(); ++s)
    if (!sig_.at(s).constructor && !has_rule[static_cast<size_t>(s)])
      findings_.push_back("destructor without rewrite rule: " + sig_.at(s).name);
}

const std::vector<int>& theory::rules_for(int symbol_id) const {
  if (symbol_id < 0 || symbol_id >= static_cast<int>(by_root_.size())) return no_rules_;
  return by_root_[static_cast<size_t>(symbol_id)];
}

// Applies the first rule (in declaration order) that matches at the root with
// message bindings. Declaration order makes catch-all extractor rules well
// defined even though they overlap their vote-specific siblings.
term theory::rewrite_root(const term& t, int& budget) const {
  term cur = t;
  for (;;) {
    if (cur->kind != term_kind::app) return cur;
    bool fired = false;
    for (int ri : rules_for(cur->id)) {
      const rewrite_rule& r = rules_[static_cast<size_t>(ri)];
      substitution s;
      if (!match(sig_, r.lhs, cur, s)) continue;
      bool messages_only = true;
      for (const auto& [k, v] : s.entries()) {
        (void)k;
        if (!v->message) {
          messages_only = false;
          break;
        }
      }
      if (!messages_only) continue;
      if (--budget < 0) throw budget_exceeded();
      cur = s.apply(sig_, r.rhs);
      fired = true;
      break;
    }
    if (!fired) return cur;
  }
}

term theory::normalize_innermost(const term& t, int& budget) const {
  if (t->kind != term_kind::app) return t;
  std::vector<term> args;
  args.reserve(t->args.size());
  bool changed = false;
  for (const auto& a : t->args) {
    term b = normalize_innermost(a, budget);
    changed = changed || b.get() != a.get();
    args.push_back(std::move(b));
  }
  term cur = changed ? mk_app(sig_, t->id, std::move(args)) : t;
  term reduced = rewrite_root(cur, budget);
  if (reduced.get() == cur.get()) return cur;
  // Root contraction can expose new redexes below (rhs instantiation).
  return normalize_innermost(reduced, budget);
}

// Outermost-ish strategy kept for cross-checking determinism of the
// computation relation: tries the root first against argument normal forms,
// otherwise descends leftmost.
term theory::normalize_outermost(const term& t, int& budget) const {
  if (t->kind != term_kind::app) return t;
  term cur = t;
  for (;;) {
    std::vector<term> args;
    args.reserve(cur->args.size());
    for (const auto& a : cur->args) args.push_back(normalize_outermost(a, budget));
    term flat = mk_app(sig_, cur->id, std::move(args));
    term reduced = rewrite_root(flat, budget);
    if (reduced.get() == flat.get()) return flat;
    if (reduced->kind != term_kind::app) return reduced;
    cur = reduced;
  }
}

term theory::normalize(const term& t, int budget, rewrite_strategy strategy) const {
  if (t->has_choice) throw std::invalid_argument("normalize on a choice term");
  int b = budget;
  return strategy == rewrite_strategy::innermost ? normalize_innermost(t, b)
                                                 : normalize_outermost(t, b);
}

std::optional<term> theory::compute(const term& t, int budget) const {
  term nf = normalize(t, budget);
  if (!nf->message) return std::nullopt;
  return nf;
}

bool theory::computes(const term& t, int budget) const {
  return compute(t, budget).has_value();
}

bool theory::msg_equal(const term& u, const term& v, int budget) const {
  return equal(normalize(u, budget), normalize(v, budget));
}

std::optional<substitution> theory::match_pattern(const term& pattern, const term& t) const {
  term nf = normalize(t);
  substitution s;
  if (!match(sig_, pattern, nf, s)) return std::nullopt;
  // pσ must rewrite back to the normal form (destructors inside patterns are
  // not allowed, so applying σ suffices).
  if (!equal(normalize(s.apply(sig_, pattern)), nf)) return std::nullopt;
  return s;
}

// ---------------------------------------------------------------------------
// Critical pair probe

namespace {

term rename_vars(const signature& sig, const term& t, const std::string& suffix) {
  switch (t->kind) {
    case term_kind::var:
      return mk_var(atoms::display(term_kind::var, t->id) + suffix);
    case term_kind::app: {
      std::vector<term> args;
      args.reserve(t->args.size());
      for (const auto& a : t->args) args.push_back(rename_vars(sig, a, suffix));
      return mk_app(sig, t->id, std::move(args));
    }
    default:
      return t;
  }
}

void positions(const term& t, std::vector<std::vector<int>>& out, std::vector<int>& cur) {
  if (t->kind == term_kind::app) {
    out.push_back(cur);
    for (size_t i = 0; i < t->args.size(); ++i) {
      cur.push_back(static_cast<int>(i));
      positions(t->args[i], out, cur);
      cur.pop_back();
    }
  }
}

term subterm_at(const term& t, const std::vector<int>& pos) {
  term cur = t;
  for (int i : pos) cur = cur->args[static_cast<size_t>(i)];
  return cur;
}

term replace_at(const signature& sig, const term& t, const std::vector<int>& pos,
                size_t idx, const term& repl) {
  if (idx == pos.size()) return repl;
  std::vector<term> args = t->args;
  size_t k = static_cast<size_t>(pos[idx]);
  args[k] = replace_at(sig, t->args[k], pos, idx + 1, repl);
  return mk_app(sig, t->id, std::move(args));
}

// Ground instantiation with distinct fresh names so the peak can be joined by
// ordinary normalization.
term ground_out(const signature& sig, const term& t,
                std::unordered_map<int, term>& names) {
  if (t->kind == term_kind::var) {
    auto it = names.find(t->id);
    if (it == names.end()) {
      term n = mk_name(atoms::fresh_name("cp_" + atoms::display(term_kind::var, t->id)));
      it = names.emplace(t->id, n).first;
    }
    return it->second;
  }
  if (t->kind != term_kind::app) return t;
  std::vector<term> args;
  args.reserve(t->args.size());
  for (const auto& a : t->args) args.push_back(ground_out(sig, a, names));
  return mk_app(sig, t->id, std::move(args));
}

}  // namespace

std::vector<std::string> theory::critical_pair_probe(int size_bound) const {
  std::vector<std::string> warnings;
  for (size_t i = 0; i < rules_.size(); ++i) {
    for (size_t j = 0; j < rules_.size(); ++j) {
      term l1 = rename_vars(sig_, rules_[i].lhs, "@1");
      term r1 = rename_vars(sig_, rules_[i].rhs, "@1");
      term l2 = rename_vars(sig_, rules_[j].lhs, "@2");
      term r2 = rename_vars(sig_, rules_[j].rhs, "@2");
      std::vector<std::vector<int>> pos;
      std::vector<int> cur;
      positions(l1, pos, cur);
      for (const auto& p : pos) {
        if (p.empty() && j >= i) continue;  // each root-overlap pair once
        term sub = subterm_at(l1, p);
        auto mgu = unify(sig_, sub, l2);
        if (!mgu) continue;
        term peak = mgu->apply(sig_, l1);
        if (peak->size > size_bound) continue;
        term one = mgu->apply(sig_, replace_at(sig_, l1, p, 0, r2));
        term two = mgu->apply(sig_, r1);
        std::unordered_map<int, term> names;
        term gpeak_one = ground_out(sig_, one, names);
        term gpeak_two = ground_out(sig_, two, names);
        try {
          if (!equal(normalize(gpeak_one), normalize(gpeak_two))) {
            std::ostringstream os;
            os << "unjoinable critical pair from " << to_string(sig_, rules_[i].lhs)
               << " and " << to_string(sig_, rules_[j].lhs) << " at peak "
               << to_string(sig_, peak);
            warnings.push_back(os.str());
          }
        } catch (const budget_exceeded&) {
          warnings.push_back("nonterminating critical pair from " +
                             to_string(sig_, rules_[i].lhs));
        }
      }
    }
  }
  return warnings;
}

term idealise(const signature& sig, const term& recipe) {
  if (!recipe->has_xvar) return recipe;
  if (recipe->kind == term_kind::xvar) {
    const std::string& nm = atoms::display(term_kind::xvar, recipe->id);
    auto id = sig.find(nm);
    if (!id || !sig.at(*id).ideal)
      throw std::invalid_argument("no idealisation constant declared for " + nm);
    return mk_app(sig, *id, {});
  }
  if (recipe->kind != term_kind::app && recipe->kind != term_kind::choice) return recipe;
  std::vector<term> args;
  args.reserve(recipe->args.size());
  for (const auto& a : recipe->args) args.push_back(idealise(sig, a));
  if (recipe->kind == term_kind::choice) return mk_choice(args[0], args[1]);
  return mk_app(sig, recipe->id, std::move(args));
}

}  // namespace evsec
