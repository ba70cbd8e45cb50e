#pragma once

// The protocol-specification DSL (.evp): a constructor/destructor theory,
// channels, votes, the initial frame, ballot test and extraction terms, and
// one biprocess per role. The left side of a role is the real process; input
// annotations (`in(c, x : m)`) and explicit choice arms carry the idealised
// execution on the right side.
//
// Reserved, auto-declared vocabulary: public constants ok, bot, A, B; the
// public destructor eq/2 with rule eq(x,x) -> ok (used by the `if` sugar).
// The hole of psi/extract is written `#`.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "evsec/theory.hpp"

namespace evsec {

struct diagnostic {
  int line = 0, col = 0;
  std::string msg;
  std::string hint;
};

enum class fkind : std::uint8_t { nil, fphase, fout, fin, flet, fcond, frepl, fpar };

struct fnode;
using fproc = std::shared_ptr<const fnode>;

struct fnode {
  fkind k = fkind::nil;
  int line = 0, col = 0;
  int phase = 0;       // fphase
  std::string chan;    // fout / fin
  std::string var;     // fin / flet binder
  term t1;             // fout payload, flet payload, fcond lhs
  term t2;             // fcond rhs
  term expect;         // fin: honest-execution message (null if absent)
  fproc a, b;          // continuation / then / else / parallel arms
};

fproc f_nil();
fproc f_phase(int phase, fproc cont);
fproc f_out(std::string chan, term payload, fproc cont);
fproc f_in(std::string chan, std::string var, term expect, fproc cont);
fproc f_let(std::string var, term payload, fproc then_p, fproc else_p);
fproc f_cond(term lhs, term rhs, fproc then_p, fproc else_p);
fproc f_repl(fproc body);
fproc f_par(fproc left, fproc right);
bool equal(const fproc& a, const fproc& b);

struct spec_channel {
  std::string name;
  bool is_public = true;
  bool ballot = false;
  bool oracle = false;
};

struct spec_role {
  std::string name;
  bool voter = false;
  bool ballotbox = false;
  fproc body;
};

struct label_override {
  bool is_phase = false;
  int phase = 0;
  std::string name;
  bool id_leaking = false;
};

struct spec_file {
  std::string protocol_name;

  signature sig;
  std::vector<rewrite_rule> rules;
  // declaration order, for the printer
  std::vector<int> decl_symbols;
  std::vector<size_t> decl_reducs, decl_equations;

  std::vector<std::string> global_names;   // names { ... }
  std::vector<std::string> session_names;  // fresh { ... }
  std::vector<spec_channel> chans;
  std::vector<std::string> votes;
  std::vector<std::pair<std::string, term>> frame0;
  term psi, extract;  // terms over the hole variable
  bool honest_voters_explicit = false;  // threat model without dishonest voters

  std::vector<spec_role> roles;
  std::vector<label_override> labels;
  std::optional<int> b_depth, b_repl, b_len, b_rewrite;

  theory make_theory() const { return theory(sig, rules); }
  const spec_role* voter_role() const;
  const spec_role* ballotbox_role() const;
};

// The hole of psi/extract.
term hole_var();
term fill_hole(const signature& sig, const term& with_hole, const term& value);

struct parse_result {
  spec_file file;
  std::vector<diagnostic> diags;
  bool ok() const { return diags.empty(); }
};

parse_result parse_spec(const std::string& text);
parse_result parse_spec_file(const std::string& path);

std::string print_spec(const spec_file& f);
bool same_spec(const spec_file& a, const spec_file& b);

}  // namespace evsec
