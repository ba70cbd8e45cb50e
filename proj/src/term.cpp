#include "evsec/term.hpp"

#include <atomic>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace evsec {

int signature::add(symbol s) {
  if (s.name.empty()) throw std::invalid_argument("empty symbol name");
  if (s.arity < 0) throw std::invalid_argument("negative arity: " + s.name);
  if (index_.count(s.name)) throw std::invalid_argument("duplicate symbol: " + s.name);
  int id = static_cast<int>(syms_.size());
  index_[s.name] = id;
  syms_.push_back(std::move(s));
  return id;
}

int signature::add_constructor(const std::string& name, int arity, bool pub) {
  return add(symbol{name, arity, true, pub});
}

int signature::add_destructor(const std::string& name, int arity, bool pub) {
  return add(symbol{name, arity, false, pub});
}

std::optional<int> signature::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int signature::require(const std::string& name) const {
  auto id = find(name);
  if (!id) throw std::invalid_argument("unknown symbol: " + name);
  return *id;
}

bool signature::has_ac_symbol() const {
  for (const auto& s : syms_)
    if (s.ac) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Atom tables. One interner per atom kind; the fresh-name counter is the only
// mutated global and is guarded together with the tables.

namespace {

struct atom_table {
  std::vector<std::string> display;
  std::unordered_map<std::string, int> index;

  int intern(const std::string& s) {
    auto it = index.find(s);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(display.size());
    display.push_back(s);
    index[s] = id;
    return id;
  }
};

struct atom_state {
  std::mutex mu;
  atom_table names, vars, handles, xvars;
  std::uint64_t fresh_counter = 0;
};

atom_state& state() {
  static atom_state s;
  return s;
}

atom_table& table_for(atom_state& s, term_kind k) {
  switch (k) {
    case term_kind::name: return s.names;
    case term_kind::var: return s.vars;
    case term_kind::handle: return s.handles;
    case term_kind::xvar: return s.xvars;
    default: throw std::logic_error("not an atom kind");
  }
}

}  // namespace

int atoms::name(const std::string& display) {
  auto& s = state();
  std::lock_guard<std::mutex> g(s.mu);
  return s.names.intern(display);
}

int atoms::fresh_name(const std::string& base) {
  auto& s = state();
  std::lock_guard<std::mutex> g(s.mu);
  for (;;) {
    std::string candidate = base + "#" + std::to_string(++s.fresh_counter);
    if (!s.names.index.count(candidate)) return s.names.intern(candidate);
  }
}

int atoms::var(const std::string& display) {
  auto& s = state();
  std::lock_guard<std::mutex> g(s.mu);
  return s.vars.intern(display);
}

int atoms::handle(const std::string& display) {
  auto& s = state();
  std::lock_guard<std::mutex> g(s.mu);
  return s.handles.intern(display);
}

int atoms::xvar(const std::string& display) {
  auto& s = state();
  std::lock_guard<std::mutex> g(s.mu);
  return s.xvars.intern(display);
}

const std::string& atoms::display(term_kind k, int id) {
  auto& s = state();
  std::lock_guard<std::mutex> g(s.mu);
  return table_for(s, k).display.at(static_cast<size_t>(id));
}

void atoms::reset_fresh_counter() {
  auto& s = state();
  std::lock_guard<std::mutex> g(s.mu);
  s.fresh_counter = 0;
}

// ---------------------------------------------------------------------------
// Term construction

namespace {

std::size_t hash_combine(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
}

term finish(std::shared_ptr<term_node> n) {
  std::size_t h = hash_combine(static_cast<std::size_t>(n->kind) * 0x9e37u,
                               static_cast<std::size_t>(n->id));
  for (const auto& a : n->args) h = hash_combine(h, a->hash);
  n->hash = h;
  return n;
}

term mk_atom(term_kind k, int id) {
  auto n = std::make_shared<term_node>();
  n->kind = k;
  n->id = id;
  n->ground = (k == term_kind::name || k == term_kind::handle);
  n->has_handle = (k == term_kind::handle);
  n->has_xvar = (k == term_kind::xvar);
  n->message = (k == term_kind::name);
  return finish(std::move(n));
}

}  // namespace

term mk_name(int name_id) { return mk_atom(term_kind::name, name_id); }
term mk_handle_id(int handle_id) { return mk_atom(term_kind::handle, handle_id); }
term mk_named(const std::string& d) { return mk_atom(term_kind::name, atoms::name(d)); }
term mk_var(const std::string& d) { return mk_atom(term_kind::var, atoms::var(d)); }
term mk_handle(const std::string& d) { return mk_atom(term_kind::handle, atoms::handle(d)); }
term mk_xvar(const std::string& d) { return mk_atom(term_kind::xvar, atoms::xvar(d)); }

term mk_app(const signature& sig, int symbol_id, std::vector<term> args) {
  const symbol& s = sig.at(symbol_id);
  if (static_cast<int>(args.size()) != s.arity)
    throw std::invalid_argument("arity mismatch applying " + s.name);
  auto n = std::make_shared<term_node>();
  n->kind = term_kind::app;
  n->id = symbol_id;
  n->args = std::move(args);
  n->ground = true;
  n->message = s.constructor;
  for (const auto& a : n->args) {
    n->size += a->size;
    n->depth = std::max(n->depth, a->depth + 1);
    n->ground = n->ground && a->ground;
    n->has_handle = n->has_handle || a->has_handle;
    n->has_xvar = n->has_xvar || a->has_xvar;
    n->has_choice = n->has_choice || a->has_choice;
    n->message = n->message && a->message;
  }
  return finish(std::move(n));
}

term mk_app(const signature& sig, const std::string& name, std::vector<term> args) {
  return mk_app(sig, sig.require(name), std::move(args));
}

term mk_const(const signature& sig, const std::string& name) {
  return mk_app(sig, sig.require(name), {});
}

term mk_choice(term left, term right) {
  auto n = std::make_shared<term_node>();
  n->kind = term_kind::choice;
  n->args = {std::move(left), std::move(right)};
  n->has_choice = true;
  n->message = false;
  for (const auto& a : n->args) {
    n->size += a->size;
    n->depth = std::max(n->depth, a->depth + 1);
    n->ground = n->ground && a->ground;
    n->has_handle = n->has_handle || a->has_handle;
    n->has_xvar = n->has_xvar || a->has_xvar;
  }
  n->ground = n->args[0]->ground && n->args[1]->ground;
  return finish(std::move(n));
}

bool equal(const term& a, const term& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->hash != b->hash || a->kind != b->kind || a->id != b->id ||
      a->args.size() != b->args.size())
    return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!equal(a->args[i], b->args[i])) return false;
  return true;
}

std::string to_string(const signature& sig, const term& t) {
  if (!t) return "<null>";
  switch (t->kind) {
    case term_kind::name:
    case term_kind::var:
    case term_kind::handle:
      return atoms::display(t->kind, t->id);
    case term_kind::xvar:
      return "?" + atoms::display(t->kind, t->id);
    case term_kind::choice:
      return "choice[" + to_string(sig, t->args[0]) + "," + to_string(sig, t->args[1]) + "]";
    case term_kind::app: {
      const symbol& s = sig.at(t->id);
      if (t->args.empty()) return s.name;
      std::ostringstream os;
      os << s.name << "(";
      for (size_t i = 0; i < t->args.size(); ++i) {
        if (i) os << ",";
        os << to_string(sig, t->args[i]);
      }
      os << ")";
      return os.str();
    }
  }
  return "<bad>";
}

term project(const signature& sig, const term& t, side s) {
  if (!t->has_choice) return t;
  if (t->kind == term_kind::choice)
    return project(sig, t->args[s == side::left ? 0 : 1], s);
  std::vector<term> args;
  args.reserve(t->args.size());
  for (const auto& a : t->args) args.push_back(project(sig, a, s));
  return mk_app(sig, t->id, std::move(args));
}

// ---------------------------------------------------------------------------
// Substitution

void substitution::bind(term_kind k, int id, term value) {
  map_[{k, id}] = std::move(value);
}

void substitution::bind_var(const std::string& name, term value) {
  bind(term_kind::var, atoms::var(name), std::move(value));
}

const term* substitution::lookup(term_kind k, int id) const {
  auto it = map_.find({k, id});
  return it == map_.end() ? nullptr : &it->second;
}

term substitution::apply(const signature& sig, const term& t) const {
  if (map_.empty()) return t;
  switch (t->kind) {
    case term_kind::app: {
      if (t->args.empty()) return t;
      bool changed = false;
      std::vector<term> args;
      args.reserve(t->args.size());
      for (const auto& a : t->args) {
        term b = apply(sig, a);
        changed = changed || b.get() != a.get();
        args.push_back(std::move(b));
      }
      return changed ? mk_app(sig, t->id, std::move(args)) : t;
    }
    case term_kind::choice: {
      term l = apply(sig, t->args[0]);
      term r = apply(sig, t->args[1]);
      if (l.get() == t->args[0].get() && r.get() == t->args[1].get()) return t;
      return mk_choice(std::move(l), std::move(r));
    }
    default: {
      const term* v = lookup(t->kind, t->id);
      return v ? *v : t;
    }
  }
}

bool match(const signature& sig, const term& pattern, const term& t, substitution& out) {
  if (pattern->kind == term_kind::var || pattern->kind == term_kind::xvar) {
    const term* bound = out.lookup(pattern->kind, pattern->id);
    if (bound) return equal(*bound, t);
    out.bind(pattern->kind, pattern->id, t);
    return true;
  }
  if (pattern->kind != t->kind || pattern->id != t->id) return false;
  if (pattern->args.size() != t->args.size()) return false;
  for (size_t i = 0; i < pattern->args.size(); ++i)
    if (!match(sig, pattern->args[i], t->args[i], out)) return false;
  return true;
}

namespace {

term walk(const signature& sig, const substitution& s, const term& t) {
  return s.apply(sig, t);
}

bool occurs(const term& needle_kind_id, const term& in) {
  if (in->kind == needle_kind_id->kind && in->id == needle_kind_id->id &&
      in->args.empty())
    return true;
  for (const auto& a : in->args)
    if (occurs(needle_kind_id, a)) return true;
  return false;
}

bool unify_rec(const signature& sig, term a, term b, substitution& s) {
  a = walk(sig, s, a);
  b = walk(sig, s, b);
  if (equal(a, b)) return true;
  if (a->kind == term_kind::var) {
    if (occurs(a, b)) return false;
    s.bind(a->kind, a->id, b);
    return true;
  }
  if (b->kind == term_kind::var) return unify_rec(sig, b, a, s);
  if (a->kind != b->kind || a->id != b->id || a->args.size() != b->args.size())
    return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!unify_rec(sig, a->args[i], b->args[i], s)) return false;
  return true;
}

}  // namespace

std::optional<substitution> unify(const signature& sig, const term& a, const term& b) {
  substitution s;
  if (!unify_rec(sig, a, b, s)) return std::nullopt;
  return s;
}

}  // namespace evsec
