#pragma once

// Shared programmatic fixtures: the blind-signature/commitment theory used
// across the term and equivalence tests.

#include <random>
#include <vector>

#include "evsec/deduce.hpp"
#include "evsec/frame.hpp"
#include "evsec/semantics.hpp"
#include "evsec/theory.hpp"

namespace evsec::test {

struct foo_theory {
  signature sig;
  theory th;

  foo_theory() {
    sig.add_constructor("ok", 0);
    sig.add_constructor("bot", 0);
    sig.add_constructor("v1", 0);
    sig.add_constructor("v2", 0);
    sig.add_constructor("idA", 0);
    sig.add(symbol{"CX", 0, true, true, /*ideal=*/true});
    sig.add_constructor("pair", 2);
    sig.add_constructor("sign", 2);
    sig.add_constructor("pk", 1);
    sig.add_constructor("blind", 2);
    sig.add_constructor("unblind", 2);
    sig.add_constructor("commit", 2);
    sig.add_constructor("key", 1, /*pub=*/false);
    sig.add_destructor("proj1", 1);
    sig.add_destructor("proj2", 1);
    sig.add_destructor("verSign", 2);
    sig.add_destructor("open", 2);
    sig.add_destructor("eq", 2);
    sig.add_destructor("andt", 2);

    auto x = mk_var("x"), y = mk_var("y"), z = mk_var("z");
    std::vector<rewrite_rule> rules;
    rules.push_back({mk_app(sig, "proj1", {mk_app(sig, "pair", {x, y})}), x, true});
    rules.push_back({mk_app(sig, "proj2", {mk_app(sig, "pair", {x, y})}), y, true});
    rules.push_back({mk_app(sig, "verSign",
                            {mk_app(sig, "sign", {x, z}), mk_app(sig, "pk", {z})}),
                     x, true});
    rules.push_back({mk_app(sig, "open", {mk_app(sig, "commit", {x, y}), y}), x, true});
    rules.push_back({mk_app(sig, "eq", {x, x}), mk_const(sig, "ok"), true});
    rules.push_back({mk_app(sig, "andt", {x, y}), mk_const(sig, "ok"), true});
    // oriented equations of the blind signature
    rules.push_back(
        {mk_app(sig, "unblind",
                {mk_app(sig, "sign", {mk_app(sig, "blind", {x, y}), z}), y}),
         mk_app(sig, "sign", {x, z}), false});
    rules.push_back({mk_app(sig, "unblind", {mk_app(sig, "blind", {x, y}), y}), x, false});
    th = theory(sig, std::move(rules));
  }

  term c(const std::string& n) const { return mk_const(sig, n); }
  term app(const std::string& f, std::vector<term> a) const {
    return mk_app(sig, f, std::move(a));
  }
};

// Random ground terms over the fixture signature (destructors included).
inline term random_ground_term(const foo_theory& f, std::mt19937& rng, int max_size) {
  std::vector<term> atoms = {f.c("ok"), f.c("v1"), f.c("v2"), mk_named("n1"),
                             mk_named("n2"), mk_named("k1")};
  std::vector<std::string> unary = {"pk", "proj1", "proj2", "key"};
  std::vector<std::string> binary = {"pair", "sign", "blind", "unblind",
                                     "commit", "open", "verSign", "eq"};
  std::function<term(int)> gen = [&](int budget) -> term {
    std::uniform_int_distribution<int> pick(0, 9);
    int roll = pick(rng);
    if (budget <= 1 || roll < 3)
      return atoms[static_cast<size_t>(rng() % atoms.size())];
    if (roll < 6) {
      const auto& s = unary[static_cast<size_t>(rng() % unary.size())];
      return f.app(s, {gen(budget - 1)});
    }
    const auto& s = binary[static_cast<size_t>(rng() % binary.size())];
    int left = 1 + static_cast<int>(rng() % static_cast<unsigned>(budget - 1));
    return f.app(s, {gen(left), gen(budget - left)});
  };
  return gen(max_size);
}

// Runtime process fixtures for the blind-signature voting session of the
// equivalence and semantics tests. kR is a shared global name.
struct foo_processes {
  foo_theory f;
  int c, u, cb;
  term kR = mk_named("kR");
  int k_name = atoms::name("k");
  int kp_name = atoms::name("kp");

  foo_processes()
      : c(channels::intern("c")), u(channels::intern("u")), cb(channels::intern("cb")) {}

  term app(const std::string& s, std::vector<term> a) const {
    return mk_app(f.sig, s, std::move(a));
  }

  // phase1 new k. new kp. out(c, <pk(key(id)), sign(blind(commit(v,k),kp), key(id))>).
  // in(c,x). if verSign(x,pk(kR)) = blind(commit(v,k),kp) then
  // phase2 out(c, unblind(x,kp)). in(c,y). let y1 = proj1(y) in
  // if proj2(y) = unblind(x,kp) then out(c, <y1, <commit(v,k), k>>)
  process voter(const term& id, const term& v) const {
    term k = mk_name(k_name), kp = mk_name(kp_name);
    term keyid = app("key", {id});
    term M = app("commit", {v, k});
    term e = app("blind", {M, kp});
    term s = app("sign", {e, keyid});
    term x = mk_var("x"), y = mk_var("y"), y1 = mk_var("y1");
    process last = p_out(c, app("pair", {y1, app("pair", {M, k})}), p_null());
    process guard2 =
        p_let(atoms::var("eq2"),
              app("eq", {app("proj2", {y}), app("unblind", {x, kp})}), last, p_null());
    process bind_y1 = p_let(atoms::var("y1"), app("proj1", {y}), guard2, p_null());
    process phase2 = p_phase(
        2, p_out(c, app("unblind", {x, kp}), p_in(c, atoms::var("y"), bind_y1)));
    process guard1 = p_let(
        atoms::var("eq1"), app("eq", {app("verSign", {x, app("pk", {kR})}), e}),
        phase2, p_null());
    process body = p_out(c, app("pair", {app("pk", {keyid}), s}),
                         p_in(c, atoms::var("x"), guard1));
    return p_phase(1, p_new(k_name, p_new(kp_name, body)));
  }

  // phase2 in(u,xb). out(cb,xb)
  process ballot_box() const {
    return p_phase(2, p_in(u, atoms::var("xb"), p_out(cb, mk_var("xb"), p_null())));
  }

  semantics_ctx ctx() const {
    semantics_ctx cx;
    cx.th = &f.th;
    cx.public_chans = {c, u, cb};
    cx.phase_targets = {2};
    return cx;
  }

  config k1(const std::string& vote = "v1") const {
    config K;
    K.fl.add("wR", kR);
    K.fr = K.fl;
    K.push(voter(f.c("idA"), f.c(vote)), annotation::voter("idA", vote));
    return K;
  }

  // The expected honest trace of k1 (recipes concrete, CX for the request tag).
  trace honest_trace() const {
    const annotation va = annotation::voter("idA", "v1");
    term w1 = mk_handle("w1"), wR = mk_handle("wR"), w2 = mk_handle("w2");
    term r1 = app("sign", {app("verSign", {app("proj2", {w1}), app("proj1", {w1})}), wR});
    trace tr;
    auto tau = [&](action::kind kk) {
      action a{kk, -1, nullptr, -1, 0, va};
      return a;
    };
    tr.push_back(tau(action::kind::tau));  // new k
    tr.push_back(tau(action::kind::tau));  // new kp
    tr.push_back({action::kind::out, c, nullptr, -1, 0, va});
    tr.push_back({action::kind::in, c, r1, -1, 0, va});
    tr.push_back(tau(action::kind::tau_then));
    tr.push_back(tau(action::kind::tau));  // phase unwrap
    action pj{action::kind::phase_jump, -1, nullptr, -1, 2, annotation{}};
    tr.push_back(pj);
    tr.push_back({action::kind::out, c, nullptr, -1, 0, va});
    tr.push_back({action::kind::in, c, app("pair", {f.c("CX"), w2}), -1, 0, va});
    tr.push_back(tau(action::kind::tau_then));
    tr.push_back(tau(action::kind::tau_then));
    tr.push_back({action::kind::out, c, nullptr, -1, 0, va});
    return tr;
  }
};

// Random small messages (constructor-only), for frame generation.
inline term random_message(const foo_theory& f, std::mt19937& rng, int max_size) {
  std::vector<term> atoms = {f.c("ok"), f.c("v1"), f.c("v2"), mk_named("m1"),
                             mk_named("m2")};
  std::function<term(int)> gen = [&](int budget) -> term {
    if (budget <= 1 || rng() % 3 == 0)
      return atoms[static_cast<size_t>(rng() % atoms.size())];
    switch (rng() % 4) {
      case 0: return f.app("pk", {gen(budget - 1)});
      case 1: return f.app("pair", {gen(budget / 2), gen(budget / 2)});
      case 2: return f.app("commit", {gen(budget / 2), gen(budget / 2)});
      default: return f.app("sign", {gen(budget / 2), gen(budget / 2)});
    }
  };
  return gen(max_size);
}

}  // namespace evsec::test
