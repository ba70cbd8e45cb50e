#include <random>

#include "doctest.h"
#include "support/fixtures.hpp"

#include "evsec/equiv.hpp"

using namespace evsec;
using evsec::test::foo_processes;
using evsec::test::foo_theory;

namespace {

frame example2_frame(const foo_processes& fx, const std::string& vote) {
  term k = mk_named("k_ex2"), kp = mk_named("kp_ex2");
  term keyA = fx.app("key", {fx.f.c("idA")});
  term M = fx.app("commit", {fx.f.c(vote), k});
  frame phi;
  phi.add("wR", fx.kR);
  phi.add("w1", fx.app("pair", {fx.app("pk", {keyA}),
                                fx.app("sign", {fx.app("blind", {M, kp}), keyA})}));
  phi.add("w2", fx.app("sign", {M, fx.kR}));
  phi.add("w3", fx.app("pair", {fx.f.c("CX"), fx.app("pair", {M, k})}));
  return phi;
}

}  // namespace

TEST_CASE("static_equiv: vote swap in the final frame is caught at depth 3") {
  foo_processes fx;
  bounds b;
  frame phi = example2_frame(fx, "v1");
  frame phi2 = example2_frame(fx, "v2");

  verdict v = static_equiv(phi, phi2, fx.f.th, b);
  REQUIRE_FALSE(v.pass);
  REQUIRE(v.recipe1);
  // The returned witness genuinely separates the frames.
  auto l1 = eval_recipe(v.recipe1, phi, fx.f.th);
  auto r1 = eval_recipe(v.recipe1, phi2, fx.f.th);
  if (v.recipe2) {
    auto l2 = eval_recipe(v.recipe2, phi, fx.f.th);
    auto r2 = eval_recipe(v.recipe2, phi2, fx.f.th);
    REQUIRE(l1.has_value());
    REQUIRE(l2.has_value());
    CHECK(equal(*l1, *l2));
    CHECK((!r1 || !r2 || !equal(*r1, *r2)));
  } else {
    CHECK(l1.has_value() != r1.has_value());
  }
}

TEST_CASE("static_equiv: empty frames and hidden commitments pass") {
  foo_processes fx;
  bounds b;
  frame e1, e2;
  CHECK(static_equiv(e1, e2, fx.f.th, b).pass);

  term k = mk_named("khidden");
  frame c1, c2;
  c1.add("w", fx.app("commit", {fx.f.c("v1"), k}));
  c2.add("w", fx.app("commit", {fx.f.c("v2"), k}));
  CHECK(static_equiv(c1, c2, fx.f.th, b).pass);

  // Independent brute-force check at depth 2: success sets and equalities
  // coincide on both frames.
  std::vector<std::pair<term, bool>> results1, results2;
  enumerate_recipes(c1, fx.f.th, 2, recipe_mode::canonical_args,
                    [&](const term& r, const std::optional<term>& m) {
                      results1.emplace_back(r, m.has_value());
                      return true;
                    });
  for (const auto& [r, ok1] : results1) {
    bool ok2 = eval_recipe(r, c2, fx.f.th).has_value();
    REQUIRE(ok1 == ok2);
  }
  (void)results2;
}

TEST_CASE("static_equiv: domain mismatch is an immediate violation") {
  foo_processes fx;
  frame a, b2;
  a.add("w", fx.f.c("ok"));
  CHECK_FALSE(static_equiv(a, b2, fx.f.th, bounds{}).pass);
}

TEST_CASE("property: static_equiv is an equivalence relation on random frames") {
  foo_processes fx;
  bounds b;
  b.depth = 2;
  std::mt19937 rng(41);
  std::vector<frame> frames;
  for (int i = 0; i < 10; ++i) {
    frame f;
    int n = 1 + static_cast<int>(rng() % 2u);
    for (int j = 0; j < n; ++j)
      f.add("w" + std::to_string(j + 1),
            fx.f.th.normalize(test::random_message(fx.f, rng, 4)));
    frames.push_back(f);
  }
  for (const auto& f : frames) CHECK(static_equiv(f, f, fx.f.th, b).pass);
  for (size_t i = 0; i < frames.size(); ++i)
    for (size_t j = 0; j < frames.size(); ++j) {
      bool ij = static_equiv(frames[i], frames[j], fx.f.th, b).pass;
      bool ji = static_equiv(frames[j], frames[i], fx.f.th, b).pass;
      CHECK(ij == ji);
    }
  for (size_t i = 0; i < frames.size(); ++i)
    for (size_t j = 0; j < frames.size(); ++j)
      for (size_t l = 0; l < frames.size(); ++l) {
        bool ij = static_equiv(frames[i], frames[j], fx.f.th, b).pass;
        bool jl = static_equiv(frames[j], frames[l], fx.f.th, b).pass;
        bool il = static_equiv(frames[i], frames[l], fx.f.th, b).pass;
        if (ij && jl) CHECK(il);
      }
}

namespace {

explore_env foo_env(const foo_processes& fx) {
  explore_env env;
  env.sem = fx.ctx();
  env.b = bounds{};
  env.b.max_trace = 24;
  // Honest-session recipes: the re-signed blinded commitment and the opening
  // request; both are handle-relative and name-free.
  term w1 = mk_handle("w1"), wR = mk_handle("wR"), w2 = mk_handle("w2");
  term r1 = mk_app(fx.f.sig, "sign",
                   {mk_app(fx.f.sig, "verSign",
                           {mk_app(fx.f.sig, "proj2", {w1}), mk_app(fx.f.sig, "proj1", {w1})}),
                    wR});
  term req = mk_app(fx.f.sig, "pair", {mk_const(fx.f.sig, "CX"), w2});
  env.extend_pool = [r1, req](const config&, const knowledge&, const knowledge&,
                              std::vector<term>& out) {
    out.push_back(r1);
    out.push_back(req);
  };
  return env;
}

}  // namespace

TEST_CASE("trace_equiv: a single voter leaks its vote through the opening") {
  foo_processes fx;
  explore_env env = foo_env(fx);
  verdict v = trace_equiv_check(fx.k1("v1"), fx.k1("v2"), env);
  CHECK_FALSE(v.pass);

  // Reflexivity.
  verdict same = trace_equiv_check(fx.k1("v1"), fx.k1("v1"), env);
  CHECK(same.pass);
}

TEST_CASE("trace_equiv: channel mismatch is observable") {
  foo_processes fx;
  explore_env env;
  env.sem = fx.ctx();
  env.b = bounds{};
  config K1, K2;
  K1.push(p_phase(1, p_out(fx.c, fx.f.c("ok"), p_null())), annotation{});
  K2.push(p_phase(1, p_out(fx.u, fx.f.c("ok"), p_null())), annotation{});
  verdict v = trace_equiv_check(K1, K2, env);
  CHECK_FALSE(v.pass);
}

TEST_CASE("diff_equiv: identical and distinct constant outputs") {
  foo_processes fx;
  explore_env env;
  env.sem = fx.ctx();
  env.b = bounds{};

  config K;
  K.push(p_phase(1, p_out(fx.c, mk_choice(fx.f.c("v1"), fx.f.c("v1")), p_null())),
         annotation{});
  CHECK(diff_equiv_check(K, env).pass);

  config K2;
  K2.push(p_phase(1, p_out(fx.c, mk_choice(fx.f.c("v1"), fx.f.c("v2")), p_null())),
          annotation{});
  verdict v = diff_equiv_check(K2, env);
  REQUIRE_FALSE(v.pass);

  // The witness bi-trace replays and the final frames are inequivalent.
  semantics_ctx cx = fx.ctx();
  config end = replay(K2, cx, v.witness);
  CHECK_FALSE(static_equiv(end.fl, end.fr, fx.f.th, env.b).pass);
}

TEST_CASE("diff_equiv: diverging conditional is reported") {
  foo_processes fx;
  explore_env env;
  env.sem = fx.ctx();
  env.b = bounds{};
  term k = mk_named("dk"), k2 = mk_named("dk2");
  term good = fx.app("open", {fx.app("commit", {fx.f.c("v1"), k}), k});
  term bad = fx.app("open", {fx.app("commit", {fx.f.c("v1"), k}), k2});
  config K;
  K.push(p_phase(1, p_let(atoms::var("z"), mk_choice(good, bad),
                          p_out(fx.c, fx.f.c("ok"), p_null()), p_null())),
         annotation{});
  verdict v = diff_equiv_check(K, env);
  REQUIRE_FALSE(v.pass);
  CHECK(v.reason.find("diverges") != std::string::npos);
}

TEST_CASE("diff_equiv: monotone in the bounds on a violating biprocess") {
  foo_processes fx;
  explore_env env;
  env.sem = fx.ctx();
  env.b = bounds{};
  env.b.depth = 1;
  config K2;
  K2.push(p_phase(1, p_out(fx.c, mk_choice(fx.f.c("v1"), fx.f.c("v2")), p_null())),
          annotation{});
  CHECK_FALSE(diff_equiv_check(K2, env).pass);
  env.b.depth = 3;
  env.b.max_trace = 60;
  CHECK_FALSE(diff_equiv_check(K2, env).pass);
}

TEST_CASE("explorer: fairness pruning keeps voters alive across jumps") {
  foo_processes fx;
  // Two one-output toy voters in phase 1 followed by a phase-2 output.
  auto toy_voter = [&](const term& id, const term& v) {
    return p_phase(1, p_out(fx.c, id, p_phase(2, p_out(fx.c, v, p_null()))));
  };
  config S;
  S.push(toy_voter(fx.f.c("idA"), fx.f.c("v1")), annotation::voter("idA", "v1"));
  S.push(toy_voter(fx.f.c("CX"), fx.f.c("v2")), annotation::voter("CX", "v2"));

  explore_env env;
  env.sem = fx.ctx();
  env.b = bounds{};
  env.fairness = true;
  env.voters = {annotation::voter("idA", "v1"), annotation::voter("CX", "v2")};
  explorer ex(S, env, nullptr);
  int early_jump = 0;
  ex.run([&](const xstate& s) {
    // No reachable state may be in phase 2 with a voter still guarded at 1.
    if (s.K.phase == 2)
      for (const auto& ap : s.K.procs)
        if (ap.p->phase == 1) ++early_jump;
    return true;
  });
  CHECK(early_jump == 0);
}
