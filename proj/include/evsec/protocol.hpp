#pragma once

// The e-voting protocol class: elaborated roles, bulletin board and tally
// evaluation, honest traces, honest-interaction and fairness predicates, and
// the direct bounded ballot-secrecy checker.

#include "evsec/equiv.hpp"
#include "evsec/specfile.hpp"

namespace evsec {

struct honest_trace {
  trace symbolic;   // recipes may contain second-order variables
  trace idealised;  // the same trace with xvars fixed to their constants
  frame final_frame;
  int k_f = 1;
  bool has_xvars = false;
};

struct proto_role {
  std::string name;
  bool voter = false;
  bool ballotbox = false;
  process body;                     // phase-guarded; id/v appear as free vars
  std::vector<term> expects;        // honest input message templates, in order
  std::vector<int> session_names;   // name atoms created by this role
  int first_phase = 1;
};

class evoting_protocol {
 public:
  std::string name;
  theory th;
  std::vector<proto_role> roles;
  std::vector<term> votes;        // at least two public free constants
  frame phi0;
  term psi, extract;              // hole terms
  bool honest_voters_explicit = false;
  int chan_ballot = -1, chan_oracle = -1;
  std::set<int> public_chans;
  std::vector<int> phases;        // declared phase indices, ascending
  int k_f = 1;
  honest_trace htr;               // filled by extract_honest_trace
  std::vector<label_override> label_overrides;
  bounds default_bounds;

  const proto_role& voter() const;
  const proto_role& ballotbox() const;

  semantics_ctx ctx() const;
  term vote0() const { return votes.at(0); }
  term vote1() const { return votes.at(1); }
  term id_A() const { return mk_app(th.sig(), "A", {}); }
  term id_B() const { return mk_app(th.sig(), "B", {}); }

  // One session of a role; session names are wrapped in new-binders under the
  // leading phase guard.
  process instantiate(const proto_role& r, const term& id, const term& vote) const;

  // (V(id,v)} |+| R_o; phi0; 1) -- the honest execution configuration.
  config honest_config() const;
  substitution honest_name_subst() const;
  // S = (!R) |+| {V(A,v0), V(B,v1)}; swapped gives S_r.
  config voting_system(bool swapped) const;
  annotation voter_ann(bool is_b, bool swapped) const;

  bool psi_holds(const term& ballot) const;
  std::optional<term> extract_vote(const term& ballot) const;  // vote or bot

  // Recipe-pool extension: honest expected messages synthesized per session.
  void extend_pool_hints(const config& K, const knowledge& kl, const knowledge& kr,
                         std::vector<term>& out) const;
  explore_env make_env(const bounds& b, bool fairness_voters, bool swapped = false) const;
};

// Elaboration from a parsed spec file; structural errors are diagnostics.
struct load_result {
  evoting_protocol proto;
  std::vector<diagnostic> diags;
  bool ok() const { return diags.empty(); }
};
load_result load_protocol(const spec_file& f);

// -- Definition 1-4 well-formedness -------------------------------------------

struct finding {
  std::string clause;  // e.g. "Def. 3"
  std::string detail;
};
std::vector<finding> validate(const evoting_protocol& p);

// -- bulletin board and tally ---------------------------------------------------

// Messages output on the ballot channel whose public test computes.
std::vector<term> bulletin_board(const trace& tr, const frame& phi,
                                 const evoting_protocol& p);
// Multiset of votes extracted from the board, bot dropped.
std::vector<term> tally_result(const trace& tr, const frame& phi,
                               const evoting_protocol& p);
bool same_multiset(const signature& sig, std::vector<term> a, std::vector<term> b);

struct cast_info {
  int handle = -1;
  bool valid = false;
};
std::optional<cast_info> casts_ballot(const trace& tr, const frame& phi,
                                      const annotation& voter, const evoting_protocol& p);

// -- honest interactions ---------------------------------------------------------

struct follow_witness {
  std::map<int, int> handle_bijection;  // honest-trace handle -> trace handle
  std::map<int, term> xvar_assignment;  // second-order variable -> message
};

// Does `sub` (actions of one voter, its sessions, and the phase markers)
// follow the honest trace, truncated at the jump to `up_to_phase` when given?
std::optional<follow_witness> follows(const trace& sub, const frame& phi,
                                      const honest_trace& ht,
                                      std::optional<int> up_to_phase,
                                      const evoting_protocol& p);

struct interaction_witness {
  std::vector<annotation> sessions;
  follow_witness fw;
};
std::optional<interaction_witness> honest_interaction(
    const trace& tr, const frame& phi, const annotation& voter,
    std::optional<int> up_to_phase, const evoting_protocol& p,
    const std::vector<annotation>& excluded_sessions = {});

// Definition 6 over recorded snapshots: clause (i) on the configurations right
// after each jump, clause (ii) on cast parity.
bool is_fair(const trace& tr, const std::vector<config>& jump_snapshots,
             const std::vector<annotation>& voters, const frame& final_phi,
             const evoting_protocol& p);

// -- the direct checker -----------------------------------------------------------

verdict ballot_secrecy_direct(const evoting_protocol& p, const bounds& b);
std::vector<term> state_tally(const xstate& s, const evoting_protocol& p);

// Reconstructs the honest trace from the role annotations by replaying the
// honest system with a deterministic schedule. False on extraction failure.
bool extract_honest_trace(evoting_protocol& p, std::vector<diagnostic>& diags);

// Parse + load + extract in one step; diagnostics collected across stages.
struct open_result {
  evoting_protocol proto;
  spec_file file;
  std::vector<diagnostic> diags;
  bool ok() const { return diags.empty(); }
};
open_result open_protocol_text(const std::string& text);
open_result open_protocol_path(const std::string& path);

}  // namespace evsec
