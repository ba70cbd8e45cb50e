#include <fstream>
#include <set>
#include <sstream>

#include "evsec/lexer.hpp"

namespace evsec {

// -- frontend process nodes ---------------------------------------------------

namespace {
fproc mk(fkind k) {
  auto n = std::make_shared<fnode>();
  n->k = k;
  return n;
}
}  // namespace

fproc f_nil() { return mk(fkind::nil); }

fproc f_phase(int phase, fproc cont) {
  auto n = std::make_shared<fnode>();
  n->k = fkind::fphase;
  n->phase = phase;
  n->a = std::move(cont);
  return n;
}

fproc f_out(std::string chan, term payload, fproc cont) {
  auto n = std::make_shared<fnode>();
  n->k = fkind::fout;
  n->chan = std::move(chan);
  n->t1 = std::move(payload);
  n->a = std::move(cont);
  return n;
}

fproc f_in(std::string chan, std::string var, term expect, fproc cont) {
  auto n = std::make_shared<fnode>();
  n->k = fkind::fin;
  n->chan = std::move(chan);
  n->var = std::move(var);
  n->expect = std::move(expect);
  n->a = std::move(cont);
  return n;
}

fproc f_let(std::string var, term payload, fproc then_p, fproc else_p) {
  auto n = std::make_shared<fnode>();
  n->k = fkind::flet;
  n->var = std::move(var);
  n->t1 = std::move(payload);
  n->a = std::move(then_p);
  n->b = std::move(else_p);
  return n;
}

fproc f_cond(term lhs, term rhs, fproc then_p, fproc else_p) {
  auto n = std::make_shared<fnode>();
  n->k = fkind::fcond;
  n->t1 = std::move(lhs);
  n->t2 = std::move(rhs);
  n->a = std::move(then_p);
  n->b = std::move(else_p);
  return n;
}

fproc f_repl(fproc body) {
  auto n = std::make_shared<fnode>();
  n->k = fkind::frepl;
  n->a = std::move(body);
  return n;
}

fproc f_par(fproc left, fproc right) {
  auto n = std::make_shared<fnode>();
  n->k = fkind::fpar;
  n->a = std::move(left);
  n->b = std::move(right);
  return n;
}

bool equal(const fproc& a, const fproc& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->k != b->k || a->phase != b->phase || a->chan != b->chan || a->var != b->var)
    return false;
  auto teq = [](const term& x, const term& y) {
    if ((x != nullptr) != (y != nullptr)) return false;
    return !x || equal(x, y);
  };
  if (!teq(a->t1, b->t1) || !teq(a->t2, b->t2) || !teq(a->expect, b->expect)) return false;
  return equal(a->a, b->a) && equal(a->b, b->b);
}

const spec_role* spec_file::voter_role() const {
  for (const auto& r : roles)
    if (r.voter) return &r;
  return nullptr;
}

const spec_role* spec_file::ballotbox_role() const {
  for (const auto& r : roles)
    if (r.ballotbox) return &r;
  return nullptr;
}

term hole_var() { return mk_var("#hole"); }

term fill_hole(const signature& sig, const term& with_hole, const term& value) {
  substitution s;
  s.bind(term_kind::var, atoms::var("#hole"), value);
  return s.apply(sig, with_hole);
}

// -- parser --------------------------------------------------------------------

namespace {

struct parser {
  std::vector<token> toks;
  size_t pos = 0;
  spec_file f;
  std::vector<diagnostic>& diags;
  std::set<std::string> bound_names;  // global + session names
  bool in_role = false;
  std::set<std::string> role_vars;

  explicit parser(std::vector<diagnostic>& d) : diags(d) {}

  const token& cur() const { return toks[pos]; }
  bool at_end() const { return cur().k == token::kind::eof; }
  bool is_punct(const char* p) const {
    return cur().k == token::kind::punct && cur().text == p;
  }
  bool is_ident(const char* s) const {
    return cur().k == token::kind::ident && cur().text == s;
  }
  void advance() {
    if (!at_end()) ++pos;
  }
  void error(const std::string& msg, const std::string& hint = "") {
    diags.push_back({cur().line, cur().col, msg, hint});
  }
  bool expect_punct(const char* p, const std::string& hint = "") {
    if (is_punct(p)) {
      advance();
      return true;
    }
    error(std::string("expected '") + p + "'", hint);
    return false;
  }
  bool expect_arrow(const std::string& hint = "") {
    if (cur().k == token::kind::arrow) {
      advance();
      return true;
    }
    error("expected '->'", hint);
    return false;
  }
  std::string expect_ident(const std::string& what) {
    if (cur().k == token::kind::ident) {
      std::string s = cur().text;
      advance();
      return s;
    }
    error("expected " + what);
    return "";
  }
  int expect_number(const std::string& what) {
    if (cur().k == token::kind::number) {
      int v = std::stoi(cur().text);
      advance();
      return v;
    }
    error("expected " + what);
    return 0;
  }
  // Error recovery: skip to the next '.' (consumed) or a closing brace.
  void recover() {
    while (!at_end() && !is_punct(".") && !is_punct("}")) advance();
    if (is_punct(".")) advance();
  }

  void reserved_vocabulary() {
    f.sig.add_constructor("ok", 0);
    f.sig.add_constructor("bot", 0);
    f.sig.add_constructor("A", 0);
    f.sig.add_constructor("B", 0);
    for (const char* n : {"ok", "bot", "A", "B"})
      f.decl_symbols.push_back(*f.sig.find(n));
    int eq = f.sig.add_destructor("eq", 2);
    f.decl_symbols.push_back(eq);
    term x = mk_var("x");
    f.rules.push_back({mk_app(f.sig, "eq", {x, x}), mk_const(f.sig, "ok"), true});
  }

  bool known_symbol(const std::string& s) const { return f.sig.find(s).has_value(); }

  // Terms. Identifiers resolve against, in order: declared symbols, bound
  // names, the reserved role parameters id/v, and in-scope process variables.
  term parse_term(bool allow_choice, bool allow_hole) {
    if (is_ident("choice")) {
      advance();
      if (!allow_choice) error("choice is not allowed here");
      expect_punct("[");
      term l = parse_term(true, allow_hole);
      if (!is_punct(",")) {
        error("unbalanced choice arms", "write choice[left,right]");
        expect_punct("]");
        return l ? l : mk_var("_err");
      }
      advance();
      term r = parse_term(true, allow_hole);
      expect_punct("]");
      if (!l || !r) return mk_var("_err");
      return mk_choice(l, r);
    }
    if (is_punct("#")) {
      advance();
      if (!allow_hole) error("the hole # is only allowed in psi/extract");
      return hole_var();
    }
    if (cur().k != token::kind::ident) {
      error("expected a term");
      advance();
      return mk_var("_err");
    }
    std::string id = cur().text;
    int line = cur().line, col = cur().col;
    advance();
    if (is_punct("(")) {
      advance();
      std::vector<term> args;
      if (!is_punct(")")) {
        for (;;) {
          args.push_back(parse_term(allow_choice, allow_hole));
          if (is_punct(",")) {
            advance();
            continue;
          }
          break;
        }
      }
      expect_punct(")");
      auto sid = f.sig.find(id);
      if (!sid) {
        diags.push_back({line, col, "unknown function symbol " + id,
                         "declare it in the theory block"});
        return mk_var("_err");
      }
      if (f.sig.at(*sid).arity != static_cast<int>(args.size())) {
        diags.push_back({line, col, "arity mismatch for " + id});
        return mk_var("_err");
      }
      for (auto& a : args)
        if (!a) a = mk_var("_err");
      return mk_app(f.sig, *sid, std::move(args));
    }
    auto sid = f.sig.find(id);
    if (sid) {
      if (f.sig.at(*sid).arity != 0) {
        diags.push_back({line, col, id + " expects arguments"});
        return mk_var("_err");
      }
      return mk_app(f.sig, *sid, {});
    }
    if (bound_names.count(id)) return mk_named(id);
    if (in_role && (id == "id" || id == "v")) return mk_var(id);
    if (in_role && role_vars.count(id)) return mk_var(id);
    diags.push_back({line, col, "unknown identifier " + id,
                     "declare it as a symbol, name, or fresh name"});
    return mk_var("_err");
  }

  void parse_theory_item() {
    if (is_ident("fun") || is_ident("const")) {
      bool is_const = is_ident("const");
      advance();
      std::string nm = expect_ident("symbol name");
      int arity = 0;
      if (!is_const) {
        expect_punct("/");
        arity = expect_number("arity");
      }
      symbol s{nm, arity, true, true};
      while (cur().k == token::kind::ident) {
        if (is_ident("private")) s.is_public = false;
        else if (is_ident("ac")) s.ac = true;
        else break;
        advance();
      }
      expect_punct(".");
      if (known_symbol(nm)) {
        error("duplicate symbol " + nm);
        return;
      }
      f.decl_symbols.push_back(f.sig.add(s));
    } else if (is_ident("ideal")) {
      advance();
      std::string nm = expect_ident("idealisation constant name");
      expect_punct(".");
      if (known_symbol(nm)) {
        error("duplicate symbol " + nm);
        return;
      }
      f.decl_symbols.push_back(f.sig.add(symbol{nm, 0, true, true, /*ideal=*/true}));
    } else if (is_ident("destructor")) {
      advance();
      std::string nm = expect_ident("destructor name");
      expect_punct("/");
      int arity = expect_number("arity");
      symbol s{nm, arity, false, true};
      if (is_ident("private")) {
        s.is_public = false;
        advance();
      }
      expect_punct(".");
      if (known_symbol(nm)) {
        error("duplicate symbol " + nm);
        return;
      }
      f.decl_symbols.push_back(f.sig.add(s));
    } else if (is_ident("reduc") || is_ident("equation")) {
      bool is_reduc = is_ident("reduc");
      advance();
      term lhs = parse_term(false, false);
      bool okp = is_reduc ? expect_arrow("reduc lhs -> rhs")
                          : expect_punct("=", "equation lhs = rhs");
      term rhs = parse_term(false, false);
      expect_punct(".");
      if (!okp || !lhs || !rhs) return;
      if (is_reduc)
        f.decl_reducs.push_back(f.rules.size());
      else
        f.decl_equations.push_back(f.rules.size());
      f.rules.push_back({lhs, rhs, is_reduc});
    } else {
      error("expected a theory item (fun, const, ideal, destructor, reduc, equation)");
      recover();
    }
  }

  std::vector<std::string> parse_ident_list() {
    std::vector<std::string> out;
    for (;;) {
      if (cur().k != token::kind::ident) break;
      out.push_back(cur().text);
      advance();
      if (is_punct(",")) {
        advance();
        continue;
      }
      break;
    }
    return out;
  }

  fproc parse_proc() {
    if (is_punct("{")) {
      advance();
      fproc p = parse_proc();
      expect_punct("}");
      return p;
    }
    if (cur().k == token::kind::number && cur().text == "0") {
      advance();
      return f_nil();
    }
    if (is_punct("!")) {
      advance();
      return f_repl(parse_proc());
    }
    if (is_punct("(")) {
      advance();
      fproc l = parse_proc();
      expect_punct("|", "parallel composition is written (P | Q)");
      fproc r = parse_proc();
      expect_punct(")");
      return f_par(l, r);
    }
    if (is_ident("phase")) {
      advance();
      int ph = expect_number("phase index");
      expect_punct(".");
      return f_phase(ph, parse_proc_opt());
    }
    if (is_ident("out")) {
      advance();
      expect_punct("(");
      std::string ch = expect_ident("channel");
      expect_punct(",");
      term payload = parse_term(true, false);
      expect_punct(")");
      return f_out(ch, payload, parse_dot_cont());
    }
    if (is_ident("in")) {
      advance();
      expect_punct("(");
      std::string ch = expect_ident("channel");
      expect_punct(",");
      std::string var = expect_ident("input variable");
      if (var == "id" || var == "v")
        error("id and v are reserved role parameters");
      term expect_t;
      if (is_punct(":")) {
        advance();
        expect_t = parse_term(false, false);
      }
      expect_punct(")");
      role_vars.insert(var);
      return f_in(ch, var, expect_t, parse_dot_cont());
    }
    if (is_ident("let")) {
      advance();
      std::string var = expect_ident("let variable");
      if (var == "id" || var == "v")
        error("id and v are reserved role parameters");
      expect_punct("=");
      term payload = parse_term(true, false);
      if (!is_ident("in")) {
        error("expected 'in'");
        return f_nil();
      }
      advance();
      role_vars.insert(var);
      fproc then_p = parse_proc();
      fproc else_p = f_nil();
      if (is_ident("else")) {
        advance();
        else_p = parse_proc();
      }
      return f_let(var, payload, then_p, else_p);
    }
    if (is_ident("if")) {
      advance();
      term lhs = parse_term(true, false);
      expect_punct("=");
      term rhs = parse_term(true, false);
      if (!is_ident("then")) {
        error("expected 'then'");
        return f_nil();
      }
      advance();
      fproc then_p = parse_proc();
      fproc else_p = f_nil();
      if (is_ident("else")) {
        advance();
        else_p = parse_proc();
      }
      return f_cond(lhs, rhs, then_p, else_p);
    }
    error("expected a process");
    recover();
    return f_nil();
  }

  // After out/in: optional ". continuation".
  fproc parse_dot_cont() {
    if (is_punct(".")) {
      advance();
      return parse_proc_opt();
    }
    return f_nil();
  }

  // A continuation that may be empty (end of block).
  fproc parse_proc_opt() {
    if (is_punct("}") || at_end()) return f_nil();
    return parse_proc();
  }

  void parse_section() {
    if (is_ident("protocol")) {
      advance();
      f.protocol_name = expect_ident("protocol name");
      expect_punct(".");
    } else if (is_ident("theory")) {
      advance();
      expect_punct("{");
      while (!is_punct("}") && !at_end()) parse_theory_item();
      expect_punct("}");
    } else if (is_ident("names") || is_ident("fresh")) {
      bool session = is_ident("fresh");
      advance();
      expect_punct("{");
      for (const auto& n : parse_ident_list()) {
        if (bound_names.count(n) || known_symbol(n)) {
          error("duplicate name " + n);
          continue;
        }
        bound_names.insert(n);
        (session ? f.session_names : f.global_names).push_back(n);
      }
      expect_punct("}");
    } else if (is_ident("channels")) {
      advance();
      expect_punct("{");
      while (!is_punct("}") && !at_end()) {
        spec_channel sc;
        if (is_ident("public")) {
          advance();
        } else if (is_ident("private")) {
          sc.is_public = false;
          advance();
        } else if (is_ident("ballot")) {
          sc.ballot = true;
          advance();
        } else if (is_ident("oracle")) {
          sc.oracle = true;
          advance();
        } else {
          error("expected public, private, ballot, or oracle");
          recover();
          continue;
        }
        for (const auto& n : parse_ident_list()) {
          spec_channel c = sc;
          c.name = n;
          f.chans.push_back(c);
        }
        expect_punct(".");
      }
      expect_punct("}");
    } else if (is_ident("votes")) {
      advance();
      expect_punct("{");
      for (const auto& n : parse_ident_list()) {
        if (known_symbol(n)) {
          error("vote " + n + " clashes with a declared symbol");
          continue;
        }
        f.votes.push_back(n);
        f.decl_symbols.push_back(f.sig.add_constructor(n, 0));
      }
      expect_punct("}");
    } else if (is_ident("frame")) {
      advance();
      expect_punct("{");
      while (!is_punct("}") && !at_end()) {
        std::string h = expect_ident("frame handle");
        if (h.empty()) {
          recover();
          continue;
        }
        expect_arrow("frame entries are written w -> term.");
        term t = parse_term(false, false);
        expect_punct(".");
        f.frame0.emplace_back(h, t);
      }
      expect_punct("}");
    } else if (is_ident("psi")) {
      advance();
      f.psi = parse_term(false, true);
      expect_punct(".");
    } else if (is_ident("extract")) {
      advance();
      f.extract = parse_term(false, true);
      expect_punct(".");
    } else if (is_ident("voters")) {
      advance();
      if (is_ident("honest")) {
        f.honest_voters_explicit = true;
        advance();
      } else if (is_ident("dishonest")) {
        advance();
      } else {
        error("expected 'voters honest.' or 'voters dishonest.'");
      }
      expect_punct(".");
    } else if (is_ident("labels")) {
      advance();
      expect_punct("{");
      while (!is_punct("}") && !at_end()) {
        label_override lo;
        if (is_ident("phase")) {
          advance();
          lo.is_phase = true;
          lo.phase = expect_number("phase index");
        } else if (is_ident("name")) {
          advance();
          lo.name = expect_ident("name");
        } else {
          error("expected 'phase N = id|vote.' or 'name n = id|vote.'");
          recover();
          continue;
        }
        expect_punct("=");
        if (is_ident("id")) {
          lo.id_leaking = true;
          advance();
        } else if (is_ident("vote")) {
          advance();
        } else {
          error("expected id or vote");
        }
        expect_punct(".");
        f.labels.push_back(lo);
      }
      expect_punct("}");
    } else if (is_ident("bounds")) {
      advance();
      expect_punct("{");
      while (!is_punct("}") && !at_end()) {
        if (is_ident("depth")) {
          advance();
          f.b_depth = expect_number("depth");
        } else if (is_ident("repl")) {
          advance();
          f.b_repl = expect_number("replication budget");
        } else if (is_ident("len")) {
          advance();
          f.b_len = expect_number("trace length");
        } else if (is_ident("rewrite")) {
          advance();
          f.b_rewrite = expect_number("rewrite budget");
        } else {
          error("expected depth, repl, len, or rewrite");
          recover();
          continue;
        }
        expect_punct(".");
      }
      expect_punct("}");
    } else if (is_ident("role")) {
      advance();
      spec_role r;
      r.name = expect_ident("role name");
      while (cur().k == token::kind::ident && (is_ident("voter") || is_ident("ballotbox"))) {
        if (is_ident("voter")) r.voter = true;
        if (is_ident("ballotbox")) r.ballotbox = true;
        advance();
      }
      expect_punct("{");
      in_role = true;
      role_vars.clear();
      r.body = parse_proc_opt();
      in_role = false;
      expect_punct("}");
      f.roles.push_back(std::move(r));
    } else {
      error("unknown section " + cur().text);
      recover();
      if (is_punct("{")) {  // skip a whole block
        int depth = 0;
        while (!at_end()) {
          if (is_punct("{")) ++depth;
          if (is_punct("}") && --depth == 0) {
            advance();
            break;
          }
          advance();
        }
      }
    }
  }

  void structural_checks() {
    int ballots = 0, voters = 0, oracles = 0;
    for (const auto& c : f.chans) {
      if (c.ballot) ++ballots;
      if (c.oracle) ++oracles;
    }
    for (const auto& r : f.roles) voters += r.voter ? 1 : 0;
    int boxes = 0;
    for (const auto& r : f.roles) boxes += r.ballotbox ? 1 : 0;
    if (voters != 1)
      diags.push_back({1, 1, "exactly one role must be marked voter",
                       "add `role V voter { ... }`"});
    if (boxes != 1)
      diags.push_back({1, 1, "exactly one role must be marked ballotbox",
                       "roles must include one for the ballot box role"});
    if (ballots != 1)
      diags.push_back({1, 1, "declare exactly one ballot channel",
                       "add `ballot cb.` to the channels block"});
    if (oracles != 1)
      diags.push_back({1, 1, "declare exactly one oracle channel",
                       "add `oracle cu.` to the channels block"});
    if (f.votes.size() < 2)
      diags.push_back({1, 1, "declare at least two votes"});
    if (!f.psi) diags.push_back({1, 1, "missing psi declaration"});
    if (!f.extract) diags.push_back({1, 1, "missing extract declaration"});
  }
};

}  // namespace

parse_result parse_spec(const std::string& text) {
  parse_result res;
  auto toks = lex(text, res.diags);
  parser p(res.diags);
  p.toks = std::move(toks);
  p.reserved_vocabulary();
  while (!p.at_end()) p.parse_section();
  p.structural_checks();
  res.file = std::move(p.f);
  return res;
}

parse_result parse_spec_file(const std::string& path) {
  std::ifstream in(path);
  parse_result res;
  if (!in) {
    res.diags.push_back({0, 0, "cannot open " + path, ""});
    return res;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

}  // namespace evsec
