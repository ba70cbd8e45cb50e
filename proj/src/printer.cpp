#include <sstream>

#include "evsec/specfile.hpp"

namespace evsec {

namespace {

void print_term(const signature& sig, const term& t, std::ostream& os) {
  switch (t->kind) {
    case term_kind::name:
      os << atoms::display(term_kind::name, t->id);
      return;
    case term_kind::var: {
      const std::string& d = atoms::display(term_kind::var, t->id);
      os << (d == "#hole" ? "#" : d);
      return;
    }
    case term_kind::handle:
      os << atoms::display(term_kind::handle, t->id);
      return;
    case term_kind::xvar:
      os << atoms::display(term_kind::xvar, t->id);
      return;
    case term_kind::choice:
      os << "choice[";
      print_term(sig, t->args[0], os);
      os << ",";
      print_term(sig, t->args[1], os);
      os << "]";
      return;
    case term_kind::app: {
      os << sig.at(t->id).name;
      if (t->args.empty()) return;
      os << "(";
      for (size_t i = 0; i < t->args.size(); ++i) {
        if (i) os << ",";
        print_term(sig, t->args[i], os);
      }
      os << ")";
      return;
    }
  }
}

std::string term_str(const signature& sig, const term& t) {
  std::ostringstream os;
  print_term(sig, t, os);
  return os.str();
}

void indent(std::ostream& os, int n) {
  for (int i = 0; i < n; ++i) os << "  ";
}

void print_proc(const signature& sig, const fproc& p, std::ostream& os, int ind) {
  if (!p || p->k == fkind::nil) return;
  switch (p->k) {
    case fkind::fphase:
      indent(os, ind);
      os << "phase " << p->phase << ".\n";
      print_proc(sig, p->a, os, ind);
      return;
    case fkind::fout:
      indent(os, ind);
      os << "out(" << p->chan << ", " << term_str(sig, p->t1) << ")";
      if (p->a && p->a->k != fkind::nil) {
        os << ".\n";
        print_proc(sig, p->a, os, ind);
      } else {
        os << "\n";
      }
      return;
    case fkind::fin:
      indent(os, ind);
      os << "in(" << p->chan << ", " << p->var;
      if (p->expect) os << " : " << term_str(sig, p->expect);
      os << ")";
      if (p->a && p->a->k != fkind::nil) {
        os << ".\n";
        print_proc(sig, p->a, os, ind);
      } else {
        os << "\n";
      }
      return;
    case fkind::flet:
    case fkind::fcond: {
      indent(os, ind);
      if (p->k == fkind::flet)
        os << "let " << p->var << " = " << term_str(sig, p->t1) << " in {\n";
      else
        os << "if " << term_str(sig, p->t1) << " = " << term_str(sig, p->t2)
           << " then {\n";
      print_proc(sig, p->a, os, ind + 1);
      indent(os, ind);
      os << "}";
      if (p->b && p->b->k != fkind::nil) {
        os << " else {\n";
        print_proc(sig, p->b, os, ind + 1);
        indent(os, ind);
        os << "}";
      }
      os << "\n";
      return;
    }
    case fkind::frepl:
      indent(os, ind);
      os << "!{\n";
      print_proc(sig, p->a, os, ind + 1);
      indent(os, ind);
      os << "}\n";
      return;
    case fkind::fpar:
      indent(os, ind);
      os << "({\n";
      print_proc(sig, p->a, os, ind + 1);
      indent(os, ind);
      os << "} | {\n";
      print_proc(sig, p->b, os, ind + 1);
      indent(os, ind);
      os << "})\n";
      return;
    default:
      return;
  }
}

}  // namespace

std::string print_spec(const spec_file& f) {
  std::ostringstream os;
  if (!f.protocol_name.empty()) os << "protocol " << f.protocol_name << ".\n\n";

  os << "theory {\n";
  for (int sid : f.decl_symbols) {
    const symbol& s = f.sig.at(sid);
    if (s.name == "ok" || s.name == "bot" || s.name == "A" || s.name == "B" ||
        s.name == "eq")
      continue;  // reserved vocabulary is implicit
    os << "  ";
    if (s.ideal)
      os << "ideal " << s.name;
    else if (s.constructor && s.arity == 0)
      os << "const " << s.name;
    else if (s.constructor)
      os << "fun " << s.name << "/" << s.arity;
    else
      os << "destructor " << s.name << "/" << s.arity;
    if (!s.is_public) os << " private";
    if (s.ac) os << " ac";
    os << ".\n";
  }
  for (size_t ri : f.decl_reducs) {
    const auto& r = f.rules[ri];
    os << "  reduc " << term_str(f.sig, r.lhs) << " -> " << term_str(f.sig, r.rhs)
       << ".\n";
  }
  for (size_t ri : f.decl_equations) {
    const auto& r = f.rules[ri];
    os << "  equation " << term_str(f.sig, r.lhs) << " = " << term_str(f.sig, r.rhs)
       << ".\n";
  }
  os << "}\n\n";

  auto ident_block = [&](const char* kw, const std::vector<std::string>& xs) {
    if (xs.empty()) return;
    os << kw << " { ";
    for (size_t i = 0; i < xs.size(); ++i) os << (i ? ", " : "") << xs[i];
    os << " }\n";
  };
  ident_block("names", f.global_names);
  ident_block("fresh", f.session_names);

  os << "channels {\n";
  for (const auto& c : f.chans) {
    os << "  ";
    if (c.ballot)
      os << "ballot";
    else if (c.oracle)
      os << "oracle";
    else
      os << (c.is_public ? "public" : "private");
    os << " " << c.name << ".\n";
  }
  os << "}\n";

  ident_block("votes", f.votes);
  os << "\n";

  if (!f.frame0.empty()) {
    os << "frame {\n";
    for (const auto& [h, t] : f.frame0)
      os << "  " << h << " -> " << term_str(f.sig, t) << ".\n";
    os << "}\n";
  }
  if (f.psi) os << "psi " << term_str(f.sig, f.psi) << ".\n";
  if (f.extract) os << "extract " << term_str(f.sig, f.extract) << ".\n";
  if (f.honest_voters_explicit) os << "voters honest.\n";

  if (!f.labels.empty()) {
    os << "\nlabels {\n";
    for (const auto& lo : f.labels) {
      os << "  ";
      if (lo.is_phase)
        os << "phase " << lo.phase;
      else
        os << "name " << lo.name;
      os << " = " << (lo.id_leaking ? "id" : "vote") << ".\n";
    }
    os << "}\n";
  }
  if (f.b_depth || f.b_repl || f.b_len || f.b_rewrite) {
    os << "\nbounds {\n";
    if (f.b_depth) os << "  depth " << *f.b_depth << ".\n";
    if (f.b_repl) os << "  repl " << *f.b_repl << ".\n";
    if (f.b_len) os << "  len " << *f.b_len << ".\n";
    if (f.b_rewrite) os << "  rewrite " << *f.b_rewrite << ".\n";
    os << "}\n";
  }

  for (const auto& r : f.roles) {
    os << "\nrole " << r.name;
    if (r.voter) os << " voter";
    if (r.ballotbox) os << " ballotbox";
    os << " {\n";
    print_proc(f.sig, r.body, os, 1);
    os << "}\n";
  }
  return os.str();
}

namespace {

bool same_sig(const signature& a, const signature& b) {
  if (a.size() != b.size()) return false;
  for (int i = 0; i < a.size(); ++i) {
    const symbol &x = a.at(i), &y = b.at(i);
    if (x.name != y.name || x.arity != y.arity || x.constructor != y.constructor ||
        x.is_public != y.is_public || x.ideal != y.ideal || x.ac != y.ac)
      return false;
  }
  return true;
}

}  // namespace

bool same_spec(const spec_file& a, const spec_file& b) {
  if (!same_sig(a.sig, b.sig)) return false;
  if (a.protocol_name != b.protocol_name) return false;
  if (a.rules.size() != b.rules.size()) return false;
  for (size_t i = 0; i < a.rules.size(); ++i)
    if (!equal(a.rules[i].lhs, b.rules[i].lhs) || !equal(a.rules[i].rhs, b.rules[i].rhs) ||
        a.rules[i].destructor_rule != b.rules[i].destructor_rule)
      return false;
  if (a.global_names != b.global_names || a.session_names != b.session_names) return false;
  if (a.votes != b.votes) return false;
  if (a.chans.size() != b.chans.size()) return false;
  for (size_t i = 0; i < a.chans.size(); ++i) {
    const auto &x = a.chans[i], &y = b.chans[i];
    if (x.name != y.name || x.is_public != y.is_public || x.ballot != y.ballot ||
        x.oracle != y.oracle)
      return false;
  }
  if (a.frame0.size() != b.frame0.size()) return false;
  for (size_t i = 0; i < a.frame0.size(); ++i)
    if (a.frame0[i].first != b.frame0[i].first ||
        !equal(a.frame0[i].second, b.frame0[i].second))
      return false;
  auto teq = [](const term& x, const term& y) {
    if ((x != nullptr) != (y != nullptr)) return false;
    return !x || equal(x, y);
  };
  if (!teq(a.psi, b.psi) || !teq(a.extract, b.extract)) return false;
  if (a.honest_voters_explicit != b.honest_voters_explicit) return false;
  if (a.labels.size() != b.labels.size()) return false;
  for (size_t i = 0; i < a.labels.size(); ++i) {
    const auto &x = a.labels[i], &y = b.labels[i];
    if (x.is_phase != y.is_phase || x.phase != y.phase || x.name != y.name ||
        x.id_leaking != y.id_leaking)
      return false;
  }
  if (a.b_depth != b.b_depth || a.b_repl != b.b_repl || a.b_len != b.b_len ||
      a.b_rewrite != b.b_rewrite)
    return false;
  if (a.roles.size() != b.roles.size()) return false;
  for (size_t i = 0; i < a.roles.size(); ++i) {
    const auto &x = a.roles[i], &y = b.roles[i];
    if (x.name != y.name || x.voter != y.voter || x.ballotbox != y.ballotbox) return false;
    if (!equal(x.body, y.body)) return false;
  }
  return true;
}

}  // namespace evsec
