#include "evsec/protocol.hpp"
#include <fstream>

#include <algorithm>
#include <functional>
#include <random>
#include <sstream>

namespace evsec {

namespace {

void collect_phases(const process& p, std::set<int>& out) {
  if (!p) return;
  if (p->kind == proc_kind::phase) out.insert(p->phase);
  collect_phases(p->cont, out);
  collect_phases(p->alt, out);
}

void collect_names(const term& t, std::set<int>& out) {
  if (t->kind == term_kind::name) out.insert(t->id);
  for (const auto& a : t->args) collect_names(a, out);
}

void collect_proc_names(const process& p, std::set<int>& out) {
  if (!p) return;
  if (p->payload) collect_names(p->payload, out);
  collect_proc_names(p->cont, out);
  collect_proc_names(p->alt, out);
}

void collect_free_vars(const process& p, std::set<int> bound, std::set<int>& out) {
  if (!p) return;
  std::function<void(const term&)> scan = [&](const term& t) {
    if (t->kind == term_kind::var && !bound.count(t->id)) out.insert(t->id);
    for (const auto& a : t->args) scan(a);
  };
  switch (p->kind) {
    case proc_kind::input: {
      auto b2 = bound;
      b2.insert(p->var);
      collect_free_vars(p->cont, b2, out);
      return;
    }
    case proc_kind::let_: {
      if (p->payload) scan(p->payload);
      auto b2 = bound;
      b2.insert(p->var);
      collect_free_vars(p->cont, b2, out);
      collect_free_vars(p->alt, bound, out);
      return;
    }
    default:
      if (p->payload) scan(p->payload);
      collect_free_vars(p->cont, bound, out);
      collect_free_vars(p->alt, bound, out);
  }
}

bool contains_kind(const process& p, proc_kind k) {
  if (!p) return false;
  if (p->kind == k) return true;
  return contains_kind(p->cont, k) || contains_kind(p->alt, k);
}

bool has_output_on(const process& p, int chan) {
  if (!p) return false;
  if (p->kind == proc_kind::output && p->chan == chan) return true;
  return has_output_on(p->cont, chan) || has_output_on(p->alt, chan);
}

}  // namespace

const proto_role& evoting_protocol::voter() const {
  for (const auto& r : roles)
    if (r.voter) return r;
  throw std::logic_error("no voter role");
}

const proto_role& evoting_protocol::ballotbox() const {
  for (const auto& r : roles)
    if (r.ballotbox) return r;
  throw std::logic_error("no ballot box role");
}

semantics_ctx evoting_protocol::ctx() const {
  semantics_ctx cx;
  cx.th = &th;
  cx.public_chans = public_chans;
  cx.phase_targets = phases;
  return cx;
}

process evoting_protocol::instantiate(const proto_role& r, const term& id,
                                      const term& vote) const {
  substitution s;
  s.bind(term_kind::var, atoms::var("id"), id);
  s.bind(term_kind::var, atoms::var("v"), vote);
  process body = subst_process(th.sig(), r.body, s);
  if (body->kind != proc_kind::phase) return body;
  process inner = body->cont;
  for (auto it = r.session_names.rbegin(); it != r.session_names.rend(); ++it)
    inner = p_new(*it, inner);
  return p_phase(body->phase, inner);
}

// The honest system uses deterministic session names (n@h) instead of
// new-binders, so the extracted trace replays against it verbatim.
config evoting_protocol::honest_config() const {
  config K;
  K.fl = phi0;
  K.fr = phi0;
  substitution names = honest_name_subst();
  auto flat = [&](const proto_role& r) {
    substitution s = names;
    s.bind(term_kind::var, atoms::var("id"), id_A());
    s.bind(term_kind::var, atoms::var("v"), vote0());
    return subst_process(th.sig(), r.body, s);
  };
  K.push(flat(voter()), annotation::voter("A", th.sig().at(vote0()->id).name));
  int serial = 1;
  for (const auto& r : roles) {
    if (r.voter) continue;
    K.push(flat(r), annotation::session(r.name, serial++));
  }
  K.next_serial = serial;
  return K;
}

substitution evoting_protocol::honest_name_subst() const {
  substitution s;
  for (const auto& r : roles)
    for (int n : r.session_names)
      s.bind(term_kind::name, n,
             mk_name(atoms::name(atoms::display(term_kind::name, n) + "@h")));
  return s;
}

annotation evoting_protocol::voter_ann(bool is_b, bool swapped) const {
  const term& va = (is_b == swapped) ? vote0() : vote1();
  return annotation::voter(is_b ? "B" : "A", th.sig().at(va->id).name);
}

config evoting_protocol::voting_system(bool swapped) const {
  config K;
  K.fl = phi0;
  K.fr = phi0;
  K.push(instantiate(voter(), id_A(), swapped ? vote1() : vote0()),
         voter_ann(false, swapped));
  K.push(instantiate(voter(), id_B(), swapped ? vote0() : vote1()),
         voter_ann(true, swapped));
  // !R: replicated honest voters (when the threat model has none dishonest)
  // followed by the replicated other roles.
  if (honest_voters_explicit) {
    const proto_role& v = voter();
    for (const auto& vt : votes) {
      int idn = atoms::name("idv");
      substitution s;
      s.bind(term_kind::var, atoms::var("id"), mk_name(idn));
      s.bind(term_kind::var, atoms::var("v"), vt);
      process body = subst_process(th.sig(), v.body, s);
      process inner = body->cont;
      for (auto it = v.session_names.rbegin(); it != v.session_names.rend(); ++it)
        inner = p_new(*it, inner);
      inner = p_new(idn, inner);
      K.push(p_phase(body->phase, p_repl(p_phase(body->phase, inner))),
             annotation::session("V!" + th.sig().at(vt->id).name, 0));
    }
  }
  for (const auto& r : roles) {
    if (r.voter) continue;
    process inst = instantiate(r, id_A(), vote0());
    K.push(p_phase(r.first_phase, p_repl(inst)), annotation::session(r.name, 0));
  }
  return K;
}

bool evoting_protocol::psi_holds(const term& ballot) const {
  try {
    return th.computes(fill_hole(th.sig(), psi, ballot));
  } catch (const budget_exceeded&) {
    return false;
  }
}

std::optional<term> evoting_protocol::extract_vote(const term& ballot) const {
  try {
    return th.compute(fill_hole(th.sig(), extract, ballot));
  } catch (const budget_exceeded&) {
    return std::nullopt;
  }
}

void evoting_protocol::extend_pool_hints(const config& K, const knowledge& kl,
                                         const knowledge& kr,
                                         std::vector<term>& out) const {
  // Contexts: the identity, vote and session-name instantiation of every
  // voter annotation present in the configuration.
  struct hint_ctx {
    term id, vote;
    std::string ann_str;
  };
  std::vector<hint_ctx> ctxs;
  std::set<std::string> seen_ann;
  for (const auto& ap : K.procs) {
    if (ap.ann.k != annotation::kind::voter) continue;
    if (!seen_ann.insert(ap.ann.str()).second) continue;
    auto ids = th.sig().find(ap.ann.id);
    auto vs = th.sig().find(ap.ann.vote);
    if (!ids || !vs) continue;
    ctxs.push_back({mk_app(th.sig(), *ids, {}), mk_app(th.sig(), *vs, {}), ap.ann.str()});
  }

  for (const auto& ap : K.procs) {
    if (ap.p->phase != K.phase) continue;
    const process& body = ap.p->cont;
    if (body->kind != proc_kind::input || body->hint_role < 0) continue;
    const proto_role& r = roles.at(static_cast<size_t>(body->hint_role));
    if (body->hint_index >= static_cast<int>(r.expects.size())) continue;
    const term& tmpl = r.expects[static_cast<size_t>(body->hint_index)];
    if (!tmpl) continue;
    // The receiving session's own context first, then every voter context.
    std::vector<hint_ctx> local = ctxs;
    if (ap.ann.k == annotation::kind::voter) {
      // move the receiver's own context to the front
      std::stable_sort(local.begin(), local.end(), [&](const hint_ctx& a, const hint_ctx& b) {
        return (a.ann_str == ap.ann.str()) > (b.ann_str == ap.ann.str());
      });
    }
    for (const auto& hc : local) {
      substitution s;
      s.bind(term_kind::var, atoms::var("id"), hc.id);
      s.bind(term_kind::var, atoms::var("v"), hc.vote);
      std::set<int> nms;
      collect_names(tmpl, nms);
      for (int n : nms) {
        const std::string& d = atoms::display(term_kind::name, n);
        bool session_name = false;
        for (const auto& role : roles)
          for (int sn : role.session_names)
            if (sn == n) session_name = true;
        if (session_name)
          s.bind(term_kind::name, n, mk_name(atoms::name(d + "@" + hc.ann_str)));
      }
      term goal = s.apply(th.sig(), tmpl);
      if (!goal->ground || goal->has_choice) continue;
      term nf;
      try {
        nf = th.normalize(goal);
      } catch (const budget_exceeded&) {
        continue;
      }
      if (!nf->message) continue;
      if (auto rec = kl.synthesize(nf)) out.push_back(*rec);
      if (auto rec = kr.synthesize(nf)) out.push_back(*rec);
    }
  }

  // Idealised honest recipes, verbatim.
  for (const auto& a : htr.idealised)
    if (a.k == action::kind::in && a.recipe) out.push_back(a.recipe);
}

explore_env evoting_protocol::make_env(const bounds& b, bool fairness_voters,
                                       bool swapped) const {
  explore_env env;
  env.sem = ctx();
  env.b = b;
  env.ballot_chan = chan_ballot;
  env.ballot_valid = [this](const term& m) { return psi_holds(m); };
  env.extend_pool = [this](const config& K, const knowledge& kl, const knowledge& kr,
                           std::vector<term>& out) {
    extend_pool_hints(K, kl, kr, out);
  };
  if (fairness_voters) {
    env.fairness = true;
    env.voters = {annotation::voter("A", ""), annotation::voter("B", "")};
  }
  (void)swapped;
  return env;
}

// ---------------------------------------------------------------------------
// Loading

load_result load_protocol(const spec_file& f) {
  load_result res;
  evoting_protocol& p = res.proto;
  p.name = f.protocol_name.empty() ? "unnamed" : f.protocol_name;
  p.th = f.make_theory();
  for (const auto& w : p.th.load_findings()) res.diags.push_back({0, 0, w, ""});

  for (const auto& c : f.chans) {
    int id = channels::intern(c.name);
    if (c.is_public || c.ballot || c.oracle) p.public_chans.insert(id);
    if (c.ballot) p.chan_ballot = id;
    if (c.oracle) p.chan_oracle = id;
  }
  for (const auto& v : f.votes) p.votes.push_back(mk_const(p.th.sig(), v));
  for (const auto& [h, t] : f.frame0) {
    try {
      term nf = p.th.normalize(t);
      p.phi0.add(h, nf);
      if (!nf->message)
        res.diags.push_back({0, 0, "initial frame entry " + h + " is not a message", ""});
    } catch (const budget_exceeded&) {
      res.diags.push_back({0, 0, "initial frame entry " + h + " does not normalize", ""});
    }
  }
  p.psi = f.psi;
  p.extract = f.extract;
  p.honest_voters_explicit = f.honest_voters_explicit;
  p.label_overrides = f.labels;
  if (f.b_depth) p.default_bounds.depth = *f.b_depth;
  if (f.b_repl) p.default_bounds.repl = *f.b_repl;
  if (f.b_len) p.default_bounds.max_trace = *f.b_len;
  if (f.b_rewrite) p.default_bounds.rewrite = *f.b_rewrite;

  std::set<int> session_name_ids;
  for (const auto& n : f.session_names) session_name_ids.insert(atoms::name(n));

  for (size_t ri = 0; ri < f.roles.size(); ++ri) {
    const spec_role& sr = f.roles[ri];
    proto_role r;
    r.name = sr.name;
    r.voter = sr.voter;
    r.ballotbox = sr.ballotbox;
    int cond_counter = 0;
    int input_counter = 0;
    std::function<process(const fproc&)> lower = [&](const fproc& n) -> process {
      if (!n || n->k == fkind::nil) return p_null();
      switch (n->k) {
        case fkind::fphase:
          return p_phase(n->phase, lower(n->a));
        case fkind::fout: {
          int ch = channels::intern(n->chan);
          return p_out(ch, n->t1, lower(n->a));
        }
        case fkind::fin: {
          int ch = channels::intern(n->chan);
          r.expects.push_back(n->expect);
          int idx = input_counter++;
          return p_in(ch, atoms::var(n->var), lower(n->a), static_cast<int>(ri), idx);
        }
        case fkind::flet:
          return p_let(atoms::var(n->var), n->t1, lower(n->a), lower(n->b));
        case fkind::fcond: {
          term test = mk_app(p.th.sig(), "eq", {n->t1, n->t2});
          int cv = atoms::var("#c" + std::to_string(cond_counter++));
          return p_let(cv, test, lower(n->a), lower(n->b));
        }
        case fkind::frepl:
          return p_repl(lower(n->a));
        case fkind::fpar:
          return p_par(lower(n->a), lower(n->b));
        default:
          return p_null();
      }
    };
    r.body = lower(sr.body);
    if (r.body->kind == proc_kind::phase) {
      r.first_phase = r.body->phase;
    } else {
      res.diags.push_back({0, 0, "role " + r.name + " must start with a phase guard",
                           "begin the role with `phase 1.`"});
      r.body = p_phase(1, r.body);
    }
    std::set<int> used;
    collect_proc_names(r.body, used);
    for (const auto& rr : p.roles)
      for (int sn : rr.session_names)
        if (used.count(sn))
          res.diags.push_back(
              {0, 0, "fresh name " + atoms::display(term_kind::name, sn) +
                         " is used by two role processes", ""});
    for (const auto& nm : f.session_names) {
      int id = atoms::name(nm);
      if (used.count(id)) r.session_names.push_back(id);
    }
    p.roles.push_back(std::move(r));
  }

  std::set<int> ph;
  for (const auto& r : p.roles) collect_phases(r.body, ph);
  ph.insert(1);
  p.phases.assign(ph.begin(), ph.end());
  p.k_f = *ph.rbegin();
  return res;
}

// ---------------------------------------------------------------------------
// Definition 1-4 checks

std::vector<finding> validate(const evoting_protocol& p) {
  std::vector<finding> out;
  const signature& sig = p.th.sig();

  for (const auto& w : p.th.load_findings()) out.push_back({"Def. 2", w});

  int voters = 0, boxes = 0;
  for (const auto& r : p.roles) {
    voters += r.voter;
    boxes += r.ballotbox;
    if (contains_kind(r.body, proc_kind::parallel))
      out.push_back({"Def. 1", "role " + r.name + " contains parallel composition"});
    if (contains_kind(r.body, proc_kind::repl))
      out.push_back({"Def. 1", "role " + r.name + " contains replication"});
    if (contains_kind(r.body, proc_kind::new_))
      out.push_back({"Def. 1", "role " + r.name + " creates names below the top level"});
    std::set<int> fv;
    collect_free_vars(r.body, {atoms::var("id"), atoms::var("v")}, fv);
    if (!fv.empty())
      out.push_back({"Def. 1", "role " + r.name + " has free variables"});
  }
  if (voters != 1) out.push_back({"Def. 1", "exactly one voter role is required"});
  if (boxes != 1)
    out.push_back({"Def. 1", "one role for the ballot box role is required"});
  if (boxes == 1 && !has_output_on(p.ballotbox().body, p.chan_ballot))
    out.push_back({"Def. 1", "the ballot box must output on the ballot channel"});

  // Votes: free public constants, not touched by the equations.
  for (const auto& v : p.votes) {
    const symbol& s = sig.at(v->id);
    if (!s.is_public || !s.constructor || s.arity != 0)
      out.push_back({"Def. 4", "vote " + s.name + " must be a public constant"});
    for (const auto& rule : p.th.rules()) {
      if (rule.destructor_rule) continue;
      std::set<int> syms;
      std::function<void(const term&)> scan = [&](const term& t) {
        if (t->kind == term_kind::app) syms.insert(t->id);
        for (const auto& a : t->args) scan(a);
      };
      scan(rule.lhs);
      scan(rule.rhs);
      if (syms.count(v->id))
        out.push_back({"Def. 4", "vote " + s.name + " occurs in an equation"});
    }
  }

  // Psi_b uses public symbols only.
  if (p.psi) {
    std::function<void(const term&)> scan = [&](const term& t) {
      if (t->kind == term_kind::app && !sig.at(t->id).is_public)
        out.push_back({"Def. 2", "psi uses private symbol " + sig.at(t->id).name});
      for (const auto& a : t->args) scan(a);
    };
    scan(p.psi);
  }

  // Extract computes a vote or bot on a generated message corpus.
  if (p.extract) {
    std::mt19937 rng(12345);
    std::vector<term> atoms_pool = {mk_const(sig, "ok"), mk_const(sig, "bot"),
                                    mk_named("chk1"), mk_named("chk2")};
    for (const auto& v : p.votes) atoms_pool.push_back(v);
    std::vector<int> ctors;
    for (int i = 0; i < sig.size(); ++i)
      if (sig.at(i).constructor && sig.at(i).arity > 0) ctors.push_back(i);
    std::function<term(int)> gen = [&](int budget) -> term {
      if (budget <= 1 || ctors.empty() || rng() % 3 == 0)
        return atoms_pool[rng() % atoms_pool.size()];
      int s = ctors[rng() % ctors.size()];
      std::vector<term> args;
      for (int i = 0; i < sig.at(s).arity; ++i)
        args.push_back(gen(budget / sig.at(s).arity));
      return mk_app(sig, s, std::move(args));
    };
    for (int i = 0; i < 200; ++i) {
      term m = gen(5);
      auto r = p.extract_vote(m);
      bool okv = false;
      if (r) {
        for (const auto& v : p.votes)
          if (equal(*r, v)) okv = true;
        if (equal(*r, mk_const(sig, "bot"))) okv = true;
      }
      if (!okv) {
        out.push_back({"Def. 2", "Extract must compute u in V or bot; failed on " +
                                     to_string(sig, m)});
        break;
      }
    }
  }

  // Def. 3: the honest trace ends with a ballot cast and skips no phase.
  if (!p.htr.symbolic.empty()) {
    const action& last = p.htr.symbolic.back();
    if (last.k != action::kind::out || last.chan != p.chan_ballot)
      out.push_back({"Def. 3", "honest trace does not end with out(c_b, .)"});
    std::set<int> seen;
    for (const auto& a : p.htr.symbolic)
      if (a.k == action::kind::phase_jump) seen.insert(a.target);
    for (int k = 2; k <= p.k_f; ++k)
      if (!seen.count(k))
        out.push_back({"Def. 3", "honest trace skips phase " + std::to_string(k)});
    // The idealised instantiation must replay against the honest system.
    try {
      config end = replay(p.honest_config(), p.ctx(), p.htr.idealised);
      if (!(end.fl == p.htr.final_frame))
        out.push_back({"Def. 3", "idealised trace replay does not reproduce the frame"});
    } catch (const replay_mismatch& e) {
      out.push_back({"Def. 3", std::string("idealised trace does not replay: ") + e.what()});
    }
  } else {
    out.push_back({"Def. 3", "no honest trace"});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Board, tally, casting

std::vector<term> bulletin_board(const trace& tr, const frame& phi,
                                 const evoting_protocol& p) {
  std::vector<term> board;
  for (const auto& a : tr) {
    if (a.k != action::kind::out || a.chan != p.chan_ballot) continue;
    const term* v = phi.lookup(a.handle);
    if (v && p.psi_holds(*v)) board.push_back(*v);
  }
  return board;
}

std::vector<term> tally_result(const trace& tr, const frame& phi,
                               const evoting_protocol& p) {
  std::vector<term> votes;
  for (const auto& ba : bulletin_board(tr, phi, p)) {
    auto v = p.extract_vote(ba);
    if (!v) continue;
    for (const auto& cand : p.votes)
      if (equal(*v, cand)) votes.push_back(*v);
  }
  return votes;
}

bool same_multiset(const signature& sig, std::vector<term> a, std::vector<term> b) {
  auto key = [&](const term& t) { return to_string(sig, t); };
  std::vector<std::string> ka, kb;
  for (const auto& t : a) ka.push_back(key(t));
  for (const auto& t : b) kb.push_back(key(t));
  std::sort(ka.begin(), ka.end());
  std::sort(kb.begin(), kb.end());
  return ka == kb;
}

std::optional<cast_info> casts_ballot(const trace& tr, const frame& phi,
                                      const annotation& voter, const evoting_protocol& p) {
  // Find a c_b output of a ballot-box session whose input computed the same
  // message, on the same channel, as an output of the voter.
  for (size_t i = 0; i < tr.size(); ++i) {
    const action& cast = tr[i];
    if (cast.k != action::kind::out || cast.chan != p.chan_ballot) continue;
    if (cast.who.k != annotation::kind::session) continue;
    // the session's input before the cast
    for (size_t j = 0; j < i; ++j) {
      const action& in = tr[j];
      if (in.k != action::kind::in || !(in.who == cast.who)) continue;
      auto m = eval_recipe(in.recipe, phi, p.th);
      if (!m) continue;
      for (size_t l = 0; l < tr.size(); ++l) {
        const action& vout = tr[l];
        if (vout.k != action::kind::out || !(vout.who == voter)) continue;
        if (vout.chan != in.chan) continue;
        const term* wv = phi.lookup(vout.handle);
        if (!wv || !equal(*wv, *m)) continue;
        cast_info ci;
        ci.handle = cast.handle;
        const term* bv = phi.lookup(cast.handle);
        ci.valid = bv && p.psi_holds(*bv);
        return ci;
      }
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// follows / honest interactions

namespace {

// in, out, phase and the conditional dichotomy are compared; structural taus
// are noise from name creation and guard unwrapping.
bool relevant(const action& a) {
  return a.k == action::kind::in || a.k == action::kind::out ||
         a.k == action::kind::phase_jump || a.k == action::kind::tau_then ||
         a.k == action::kind::tau_else;
}

// Match an honest-trace recipe (over honest handles and xvars) against the
// message computed in the actual trace.
bool match_recipe(const evoting_protocol& p, const term& href, const frame& phi,
                  const std::map<int, int>& rho, const term& actual,
                  std::map<int, term>& xassign) {
  if (href->kind == term_kind::xvar) {
    auto it = xassign.find(href->id);
    if (it != xassign.end()) return equal(it->second, actual);
    xassign.emplace(href->id, actual);
    return true;
  }
  if (!href->has_xvar) {
    // fully concrete: remap handles and evaluate
    std::function<term(const term&)> remap = [&](const term& t) -> term {
      if (t->kind == term_kind::handle) {
        auto it = rho.find(t->id);
        return mk_handle_id(it == rho.end() ? t->id : it->second);
      }
      if (t->args.empty()) return t;
      std::vector<term> args;
      for (const auto& a : t->args) args.push_back(remap(a));
      return t->kind == term_kind::choice ? mk_choice(args[0], args[1])
                                          : mk_app(p.th.sig(), t->id, std::move(args));
    };
    auto m = eval_recipe(remap(href), phi, p.th);
    return m && equal(*m, actual);
  }
  // constructor application above an unknown part: decompose
  if (href->kind == term_kind::app && actual->kind == term_kind::app &&
      href->id == actual->id && p.th.sig().at(href->id).constructor) {
    for (size_t i = 0; i < href->args.size(); ++i)
      if (!match_recipe(p, href->args[i], phi, rho, actual->args[i], xassign))
        return false;
    return true;
  }
  return false;
}

}  // namespace

std::optional<follow_witness> follows(const trace& sub, const frame& phi,
                                      const honest_trace& ht,
                                      std::optional<int> up_to_phase,
                                      const evoting_protocol& p) {
  // Truncate the honest trace at the jump to the given phase.
  trace href;
  for (const auto& a : ht.symbolic) {
    if (up_to_phase && a.k == action::kind::phase_jump && a.target >= *up_to_phase) break;
    if (relevant(a)) href.push_back(a);
  }
  trace actual;
  for (const auto& a : sub)
    if (relevant(a)) actual.push_back(a);
  if (actual.size() != href.size()) return std::nullopt;

  // Annotation correspondence: the voter maps to the voter; sessions must be
  // consistently renamed.
  std::map<std::string, std::string> annmap;
  follow_witness fw;
  std::map<int, term> xassign;
  for (size_t i = 0; i < href.size(); ++i) {
    const action& h = href[i];
    const action& a = actual[i];
    if (h.k != a.k) return std::nullopt;
    if (h.k == action::kind::phase_jump) {
      if (h.target != a.target) return std::nullopt;
      continue;
    }
    // participant correspondence
    std::string hwho = h.who.str(), awho = a.who.str();
    bool hv = h.who.k == annotation::kind::voter, av = a.who.k == annotation::kind::voter;
    if (hv != av) return std::nullopt;
    auto it = annmap.find(hwho);
    if (it == annmap.end()) {
      for (const auto& [k2, v2] : annmap)
        if (v2 == awho) return std::nullopt;  // not injective
      annmap[hwho] = awho;
    } else if (it->second != awho) {
      return std::nullopt;
    }
    switch (h.k) {
      case action::kind::out: {
        if (h.chan != a.chan) return std::nullopt;
        fw.handle_bijection[h.handle] = a.handle;
        break;
      }
      case action::kind::in: {
        if (h.chan != a.chan) return std::nullopt;
        auto m = eval_recipe(a.recipe, phi, p.th);
        if (!m) return std::nullopt;
        if (!match_recipe(p, h.recipe, phi, fw.handle_bijection, *m, xassign))
          return std::nullopt;
        break;
      }
      default:
        break;  // tau_then / tau_else: kind equality suffices
    }
  }
  fw.xvar_assignment = std::move(xassign);
  return fw;
}

std::optional<interaction_witness> honest_interaction(
    const trace& tr, const frame& phi, const annotation& voter,
    std::optional<int> up_to_phase, const evoting_protocol& p,
    const std::vector<annotation>& excluded_sessions) {
  std::vector<annotation> sessions;
  std::set<std::string> seen;
  for (const auto& a : tr) {
    if (a.who.k != annotation::kind::session) continue;
    bool excluded = false;
    for (const auto& e : excluded_sessions)
      if (e == a.who) excluded = true;
    if (excluded) continue;
    if (seen.insert(a.who.str()).second) sessions.push_back(a.who);
  }

  auto try_set = [&](const std::vector<annotation>& set)
      -> std::optional<interaction_witness> {
    trace sub;
    for (const auto& a : tr) {
      bool mine = a.k == action::kind::phase_jump || a.who == voter;
      for (const auto& s : set)
        if (a.who == s) mine = true;
      if (mine) sub.push_back(a);
    }
    auto fw = follows(sub, phi, p.htr, up_to_phase, p);
    if (!fw) return std::nullopt;
    interaction_witness iw;
    iw.sessions = set;
    iw.fw = *fw;
    return iw;
  };

  // smallest session sets first
  if (auto w = try_set({})) return w;
  for (const auto& s : sessions)
    if (auto w = try_set({s})) return w;
  for (size_t i = 0; i < sessions.size(); ++i)
    for (size_t j = i + 1; j < sessions.size(); ++j)
      if (auto w = try_set({sessions[i], sessions[j]})) return w;
  return std::nullopt;
}

open_result open_protocol_text(const std::string& text) {
  open_result out;
  parse_result pr = parse_spec(text);
  out.diags = pr.diags;
  out.file = std::move(pr.file);
  if (!out.diags.empty()) return out;
  load_result lr = load_protocol(out.file);
  out.proto = std::move(lr.proto);
  for (auto& d : lr.diags) out.diags.push_back(d);
  if (!out.diags.empty()) return out;
  extract_honest_trace(out.proto, out.diags);
  return out;
}

open_result open_protocol_path(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    open_result out;
    out.diags.push_back({0, 0, "cannot open " + path, ""});
    return out;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return open_protocol_text(ss.str());
}

bool is_fair(const trace& tr, const std::vector<config>& jump_snapshots,
             const std::vector<annotation>& voters, const frame& final_phi,
             const evoting_protocol& p) {
  size_t snap = 0;
  for (const auto& a : tr) {
    if (a.k != action::kind::phase_jump) continue;
    if (snap >= jump_snapshots.size()) return false;
    const config& K = jump_snapshots[snap++];
    for (const auto& v : voters) {
      bool present = false;
      for (const auto& ap : K.procs)
        if (ap.ann.k == annotation::kind::voter && ap.ann.id == v.id &&
            ap.p->phase == a.target)
          present = true;
      if (!present) return false;
    }
  }
  bool a_casts = casts_ballot(tr, final_phi, voters.at(0), p).has_value();
  bool b_casts = casts_ballot(tr, final_phi, voters.at(1), p).has_value();
  return a_casts == b_casts;
}

}  // namespace evsec
