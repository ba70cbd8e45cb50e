#pragma once

// Terms, signatures and substitutions.
//
// A term is an immutable tree over four atom kinds plus applications:
//   - names      (nonce/key material, globally fresh via a serial counter)
//   - variables  (protocol variables bound by inputs and lets)
//   - handles    (frame entries, the attacker's pointers to learned data)
//   - xvars      (second-order variables standing for unknown recipes)
// Biprocess terms may additionally contain choice nodes carrying a left
// and a right arm.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace evsec {

enum class term_kind : std::uint8_t { name, var, handle, xvar, app, choice };

struct symbol {
  std::string name;
  int arity = 0;
  bool constructor = true;
  bool is_public = true;
  bool ideal = false;  // idealisation constant C_Y (implies constructor/0-ary)
  bool ac = false;     // declared AC; rewriting treats it as free, the
                       // condition compiler rejects such theories
};

// Function symbols of a protocol. Symbol ids are indices into the table.
class signature {
 public:
  int add(symbol s);
  int add_constructor(const std::string& name, int arity, bool pub = true);
  int add_destructor(const std::string& name, int arity, bool pub = true);

  const symbol& at(int id) const { return syms_.at(static_cast<size_t>(id)); }
  std::optional<int> find(const std::string& name) const;
  int require(const std::string& name) const;
  int size() const { return static_cast<int>(syms_.size()); }

  bool has_ac_symbol() const;

 private:
  std::vector<symbol> syms_;
  std::unordered_map<std::string, int> index_;
};

// Global atom tables. Names carry a display string; fresh names are minted
// from a monotone counter so replayed runs are bit-identical.
class atoms {
 public:
  static int name(const std::string& display);       // stable, idempotent
  static int fresh_name(const std::string& base);    // "base#serial"
  static int var(const std::string& display);
  static int handle(const std::string& display);
  static int xvar(const std::string& display);
  static const std::string& display(term_kind k, int id);
  static void reset_fresh_counter();  // test support only
};

struct term_node;
using term = std::shared_ptr<const term_node>;

struct term_node {
  term_kind kind;
  std::int32_t id = -1;  // symbol id (app) or atom id (name/var/handle/xvar)
  std::vector<term> args;

  std::size_t hash = 0;
  std::int32_t size = 1;    // node count
  std::int32_t depth = 0;   // atom depth 0
  bool ground = true;       // no var/xvar (handles do not count as variables here)
  bool has_handle = false;
  bool has_xvar = false;
  bool has_choice = false;
  bool message = false;     // ground constructor term over names only
};

// Construction. Application checks arity and computes cached flags.
term mk_name(int name_id);
term mk_named(const std::string& display);
term mk_var(const std::string& display);
term mk_handle(const std::string& display);
term mk_handle_id(int handle_id);
term mk_xvar(const std::string& display);
term mk_app(const signature& sig, int symbol_id, std::vector<term> args);
term mk_app(const signature& sig, const std::string& name, std::vector<term> args);
term mk_const(const signature& sig, const std::string& name);
term mk_choice(term left, term right);

bool equal(const term& a, const term& b);
std::string to_string(const signature& sig, const term& t);

// choice[l,r] resolution; identity on plain terms.
enum class side : std::uint8_t { left, right };
term project(const signature& sig, const term& t, side s);

// Substitution over atoms (vars, handles, xvars and names).
class substitution {
 public:
  using key = std::pair<term_kind, std::int32_t>;

  void bind(term_kind k, int id, term value);
  void bind_var(const std::string& name, term value);
  const term* lookup(term_kind k, int id) const;
  bool empty() const { return map_.empty(); }
  std::size_t size() const { return map_.size(); }

  term apply(const signature& sig, const term& t) const;

  struct key_hash {
    std::size_t operator()(const key& k) const {
      return std::hash<int>()(static_cast<int>(k.first)) * 1000003u ^
             std::hash<std::int32_t>()(k.second);
    }
  };
  const std::unordered_map<key, term, key_hash>& entries() const { return map_; }

 private:
  std::unordered_map<key, term, key_hash> map_;
};

// Syntactic matching of a pattern (vars as wildcards, non-linear allowed)
// against a term. Extends `out`; returns false without rollback on failure,
// so callers pass a scratch substitution.
bool match(const signature& sig, const term& pattern, const term& t, substitution& out);

// Syntactic unification, used by the critical-pair probe.
std::optional<substitution> unify(const signature& sig, const term& a, const term& b);

}  // namespace evsec
