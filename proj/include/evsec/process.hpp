#pragma once

// Process AST with biprocess choice-pairs, annotations, configurations and
// traces. Configurations hold phase-guarded processes only; biprocesses carry
// a left and a right frame that coincide for plain configurations.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "evsec/frame.hpp"
#include "evsec/term.hpp"

namespace evsec {

enum class proc_kind : std::uint8_t {
  null,
  input,
  output,
  let_,
  parallel,
  new_,
  repl,
  phase
};

struct process_node;
using process = std::shared_ptr<const process_node>;

struct process_node {
  proc_kind kind = proc_kind::null;
  int chan = -1;      // input / output
  int var = -1;       // input / let binder (var atom id)
  term payload;       // output / let bi-term
  process cont;       // continuation, then-branch, or left parallel component
  process alt;        // else-branch or right parallel component
  int name_id = -1;   // new_: bound name atom
  int phase = 0;      // phase guard index
  // Input nodes remember their role position so explorers can seed the
  // recipe pool with the honest message for the session at hand.
  int hint_role = -1;
  int hint_index = -1;

  std::size_t hash = 0;
  bool has_choice = false;
};

process p_null();
process p_in(int chan, int var, process cont, int hint_role = -1, int hint_index = -1);
process p_out(int chan, term payload, process cont);
process p_let(int var, term payload, process then_p, process else_p);
process p_par(process left, process right);
process p_new(int name_id, process cont);
process p_repl(process body);
process p_phase(int phase, process body);

bool equal(const process& a, const process& b);
std::string to_string(const signature& sig, const process& p);

// Substitution over a process; input/let binders shadow variables, new
// binders shadow names.
process subst_process(const signature& sig, const process& p, const substitution& s);
process project_process(const signature& sig, const process& p, side sd);
bool process_has_choice(const process& p);

// Channel names are interned globally, like atoms.
class channels {
 public:
  static int intern(const std::string& name);
  static const std::string& display(int id);
};

// -- annotations -------------------------------------------------------------

struct annotation {
  enum class kind : std::uint8_t { none, voter, session } k = kind::none;
  std::string id, vote;  // voter
  std::string role;      // session
  int serial = 0;        // session

  static annotation voter(std::string id, std::string vote) {
    annotation a;
    a.k = kind::voter;
    a.id = std::move(id);
    a.vote = std::move(vote);
    return a;
  }
  static annotation session(std::string role, int serial) {
    annotation a;
    a.k = kind::session;
    a.role = std::move(role);
    a.serial = serial;
    return a;
  }
  bool operator==(const annotation& o) const {
    return k == o.k && id == o.id && vote == o.vote && role == o.role && serial == o.serial;
  }
  bool operator<(const annotation& o) const {
    return std::tie(k, id, vote, role, serial) < std::tie(o.k, o.id, o.vote, o.role, o.serial);
  }
  std::string str() const;
};

// -- actions and traces ------------------------------------------------------

struct action {
  enum class kind : std::uint8_t { in, out, phase_jump, tau, tau_then, tau_else } k;
  int chan = -1;
  term recipe;     // in
  int handle = -1; // out
  int target = 0;  // phase_jump
  annotation who;

  bool observable() const {
    return k == kind::in || k == kind::out || k == kind::phase_jump;
  }
};

using trace = std::vector<action>;

trace obs(const trace& tr);
bool same_observable(const action& a, const action& b);
std::string to_string(const signature& sig, const action& a, bool with_annotation = false);
std::string to_string(const signature& sig, const trace& tr, bool with_annotations = false);

// -- configurations ----------------------------------------------------------

struct aproc {
  process p;          // always phase-guarded
  annotation ann;
  int repl_budget = -1;  // remaining unfolds when the body is a replication
};

struct config {
  std::vector<aproc> procs;  // insertion order
  frame fl, fr;              // right frame equals left for plain configurations
  int phase = 1;
  int next_handle = 1;
  int next_serial = 1;

  bool plain() const;
  void push(process p, annotation ann, int repl_budget = -1);
  int fresh_handle();

  // Canonical serialization: multiset-sorted, fresh names de-bruijnized.
  // Two configs with equal keys are interchangeable for exploration.
  std::string key(const signature& sig) const;
};

config project_config(const signature& sig, const config& k, side sd);

// Canonical fresh-name-insensitive key of a frame pair, for caching
// static-equivalence verdicts and saturations.
std::string frame_pair_key(const signature& sig, const frame& fl, const frame& fr);

// Canonical term rendering with fresh names numbered through `rename`; the
// building block behind config and frame keys.
void canonical_term_key(const signature& sig, const term& t, std::map<int, int>& rename,
                        std::string& out);
void config_key_into(const signature& sig, const config& k, std::map<int, int>& rename,
                     std::string& out);

}  // namespace evsec
