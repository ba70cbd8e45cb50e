#include "evsec/deduce.hpp"

#include <algorithm>

namespace evsec {

namespace {

constexpr size_t max_dup_pairs = 50000;
constexpr size_t max_facts = 20000;

std::vector<int> public_constants(const signature& sig) {
  std::vector<int> out;
  for (int i = 0; i < sig.size(); ++i) {
    const symbol& s = sig.at(i);
    if (s.constructor && s.is_public && s.arity == 0) out.push_back(i);
  }
  return out;
}

}  // namespace

bool knowledge::better(const term& a, const term& b) const {
  if (a->size != b->size) return a->size < b->size;
  return to_string(th_.sig(), a) < to_string(th_.sig(), b);
}

void knowledge::add(const term& msg, const term& recipe, int depth) {
  auto it = by_msg_.find(msg->hash);
  if (it != by_msg_.end()) {
    for (int i : it->second) {
      if (equal(facts_[static_cast<size_t>(i)].msg, msg)) {
        if (dup_pairs_.size() < max_dup_pairs)
          dup_pairs_.emplace_back(facts_[static_cast<size_t>(i)].recipe, recipe);
        if (better(recipe, facts_[static_cast<size_t>(i)].recipe))
          facts_[static_cast<size_t>(i)].recipe = recipe;
        return;
      }
    }
  }
  if (facts_.size() >= max_facts) return;
  facts_.push_back({msg, recipe, depth});
  by_msg_[msg->hash].push_back(static_cast<int>(facts_.size()) - 1);
}

knowledge::knowledge(const frame& f, const theory& th, int max_depth)
    : th_(th), max_depth_(max_depth) {
  const signature& sig = th.sig();
  for (int c : public_constants(sig)) {
    term r = mk_app(sig, c, {});
    add(th.normalize(r), r, 0);
  }
  for (const auto& e : f.entries()) add(e.value, mk_handle_id(e.handle), 0);

  // Saturation rounds; each round only tries tuples touching a new fact.
  size_t old_lo = 0;
  bool first_round = true;
  while (old_lo < facts_.size()) {
    size_t old_hi = facts_.size();
    for (int s = 0; s < sig.size(); ++s) {
      const symbol& sym = sig.at(s);
      if (!sym.is_public || sym.arity == 0) continue;
      bool destructor = !sym.constructor;
      // Constructor applications only matter when a rule can fire on them.
      if (!destructor && th.rules_for(s).empty()) continue;
      std::vector<size_t> idx(static_cast<size_t>(sym.arity), 0);
      for (;;) {
        bool touches_new = first_round;
        int d = 0;
        for (size_t k : idx) {
          if (k >= old_lo) touches_new = true;
          d = std::max(d, facts_[k].depth);
        }
        ++d;
        if (touches_new && d <= max_depth_) {
          std::vector<term> margs, rargs;
          for (size_t k : idx) {
            margs.push_back(facts_[k].msg);
            rargs.push_back(facts_[k].recipe);
          }
          term applied = mk_app(sig, s, std::move(margs));
          try {
            term nf = th.normalize(applied);
            if ((destructor || !equal(nf, applied)) && nf->message)
              add(nf, mk_app(sig, s, std::move(rargs)), d);
          } catch (const budget_exceeded&) {
          }
        }
        size_t k = 0;
        for (; k < idx.size(); ++k) {
          if (++idx[k] < old_hi) break;
          idx[k] = 0;
        }
        if (k == idx.size()) break;
      }
    }
    old_lo = old_hi;
    first_round = false;
  }
}

std::optional<term> knowledge::synthesize(const term& msg) const {
  auto it = syn_cache_.find(msg->hash);
  if (it != syn_cache_.end()) return it->second;
  syn_cache_[msg->hash] = std::nullopt;  // cycle guard

  std::optional<term> best;
  auto mit = by_msg_.find(msg->hash);
  if (mit != by_msg_.end()) {
    for (int i : mit->second)
      if (equal(facts_[static_cast<size_t>(i)].msg, msg)) {
        best = facts_[static_cast<size_t>(i)].recipe;
        break;
      }
  }
  if (msg->kind == term_kind::app) {
    const symbol& s = th_.sig().at(msg->id);
    if (s.constructor && s.is_public) {
      std::vector<term> rargs;
      bool ok = true;
      for (const auto& a : msg->args) {
        auto r = synthesize(a);
        if (!r) {
          ok = false;
          break;
        }
        rargs.push_back(*r);
      }
      if (ok) {
        term composed = mk_app(th_.sig(), msg->id, std::move(rargs));
        if (!best || better(composed, *best)) best = composed;
      }
    }
  }
  syn_cache_[msg->hash] = best;
  return best;
}

std::optional<term> eval_recipe(const term& recipe, const frame& f, const theory& th) {
  std::function<std::optional<term>(const term&)> subst = [&](const term& t) -> std::optional<term> {
    switch (t->kind) {
      case term_kind::handle: {
        const term* v = f.lookup(t->id);
        if (!v) return std::nullopt;
        return *v;
      }
      case term_kind::app: {
        std::vector<term> args;
        args.reserve(t->args.size());
        for (const auto& a : t->args) {
          auto b = subst(a);
          if (!b) return std::nullopt;
          args.push_back(std::move(*b));
        }
        return mk_app(th.sig(), t->id, std::move(args));
      }
      default:
        return std::nullopt;  // recipes contain only handles and public symbols
    }
  };
  auto grounded = subst(recipe);
  if (!grounded) return std::nullopt;
  try {
    return th.compute(*grounded);
  } catch (const budget_exceeded&) {
    return std::nullopt;
  }
}

namespace {

struct level_entry {
  term recipe;
  std::optional<term> msg;
};

}  // namespace

void enumerate_recipes(const frame& f, const theory& th, int depth, recipe_mode mode,
                       const std::function<bool(const term&, const std::optional<term>&)>& visit) {
  const signature& sig = th.sig();

  // Depth-0 atoms: public constants first (declaration order), then handles.
  std::vector<level_entry> atoms_level;
  for (int c : public_constants(sig)) {
    term r = mk_app(sig, c, {});
    atoms_level.push_back({r, th.normalize(r)});
  }
  for (const auto& e : f.entries())
    atoms_level.push_back({mk_handle_id(e.handle), e.value});

  if (mode == recipe_mode::all) {
    std::vector<level_entry> all = atoms_level;
    for (const auto& a : all)
      if (!visit(a.recipe, a.msg)) return;
    std::vector<level_entry> prev = all;
    for (int d = 1; d <= depth; ++d) {
      std::vector<level_entry> next;
      for (int s = 0; s < sig.size(); ++s) {
        const symbol& sym = sig.at(s);
        if (!sym.is_public || sym.arity == 0) continue;
        std::vector<size_t> idx(static_cast<size_t>(sym.arity), 0);
        for (;;) {
          std::vector<term> rargs;
          int maxd = 0;
          for (size_t k = 0; k < idx.size(); ++k) {
            rargs.push_back(prev[idx[k]].recipe);
            maxd = std::max(maxd, prev[idx[k]].recipe->depth);
          }
          if (maxd == d - 1) {  // ensure depth exactly d once
            term r = mk_app(sig, s, rargs);
            auto m = eval_recipe(r, f, th);
            if (!visit(r, m)) return;
            next.push_back({r, m});
          }
          size_t k = 0;
          for (; k < idx.size(); ++k) {
            if (++idx[k] < prev.size()) break;
            idx[k] = 0;
          }
          if (k == idx.size()) break;
        }
      }
      for (const auto& e : next) prev.push_back(e);
    }
    return;
  }

  // canonical / canonical_args: arguments range over canonical representatives.
  std::vector<level_entry> reps;
  std::unordered_map<std::size_t, std::vector<int>> seen;
  auto known = [&](const term& msg) -> bool {
    auto it = seen.find(msg->hash);
    if (it == seen.end()) return false;
    for (int i : it->second)
      if (equal(*reps[static_cast<size_t>(i)].msg, msg)) return true;
    return false;
  };
  auto remember = [&](const term& recipe, const term& msg) {
    seen[msg->hash].push_back(static_cast<int>(reps.size()));
    reps.push_back({recipe, msg});
  };

  for (const auto& a : atoms_level) {
    bool fresh = !known(*a.msg);
    if (fresh) remember(a.recipe, *a.msg);
    if (mode == recipe_mode::canonical_args || fresh)
      if (!visit(a.recipe, a.msg)) return;
  }

  size_t lo = 0;
  for (int d = 1; d <= depth; ++d) {
    size_t hi = reps.size();
    if (lo == hi && d > 1) break;
    for (int s = 0; s < sig.size(); ++s) {
      const symbol& sym = sig.at(s);
      if (!sym.is_public || sym.arity == 0) continue;
      std::vector<size_t> idx(static_cast<size_t>(sym.arity), 0);
      for (;;) {
        bool touches_new = false;
        for (size_t k : idx)
          if (k >= lo) touches_new = true;
        if (touches_new || d == 1) {
          std::vector<term> rargs;
          for (size_t k : idx) rargs.push_back(reps[k].recipe);
          term r = mk_app(sig, s, rargs);
          auto m = eval_recipe(r, f, th);
          bool fresh = m && !known(*m);
          if (fresh) remember(r, *m);
          if (mode == recipe_mode::canonical_args || fresh || !m)
            if (!visit(r, m)) return;
        }
        size_t k = 0;
        for (; k < idx.size(); ++k) {
          if (++idx[k] < hi) break;
          idx[k] = 0;
        }
        if (k == idx.size()) break;
      }
    }
    lo = hi;
  }
}

}  // namespace evsec
