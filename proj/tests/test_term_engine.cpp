#include <functional>
#include <random>
#include <set>

#include "doctest.h"
#include "support/fixtures.hpp"

using namespace evsec;
using evsec::test::foo_theory;

TEST_CASE("normalize: blind signature equations") {
  foo_theory f;
  term m = mk_named("m"), k = mk_named("k"), kp = mk_named("kp"), sk = mk_named("sk");

  CHECK(equal(f.th.normalize(f.app("unblind", {f.app("blind", {m, k}), k})), m));
  CHECK(equal(f.th.normalize(f.c("ok")), f.c("ok")));
  term u = f.app("unblind", {f.app("sign", {f.app("blind", {m, kp}), sk}), kp});
  CHECK(equal(f.th.normalize(u), f.app("sign", {m, sk})));
}

TEST_CASE("compute: destructor evaluation") {
  foo_theory f;
  term k = mk_named("k"), k2 = mk_named("k2"), kc = mk_named("kc"),
       kb = mk_named("kb"), skA = mk_named("skA"), v = f.c("v1"), v0 = f.c("v1");

  auto r = f.th.compute(f.app("open", {f.app("commit", {v0, k}), k}));
  REQUIRE(r.has_value());
  CHECK(equal(*r, v0));

  // Blindly-signed committed vote, unblinded then verified then opened.
  term t = f.app("unblind",
                 {f.app("sign", {f.app("blind", {f.app("commit", {v, kc}), kb}), skA}), kb});
  term probe = f.app("open", {f.app("verSign", {t, f.app("pk", {skA})}), kc});
  auto r2 = f.th.compute(probe);
  REQUIRE(r2.has_value());
  CHECK(equal(*r2, v));

  CHECK_FALSE(f.th.compute(f.app("open", {f.app("commit", {v0, k}), k2})).has_value());

  term a = mk_named("a"), b = mk_named("b");
  auto r3 = f.th.compute(f.app("andt", {f.app("eq", {a, a}), f.app("eq", {b, b})}));
  REQUIRE(r3.has_value());
  CHECK(equal(*r3, f.c("ok")));
  CHECK_FALSE(f.th.compute(f.app("andt", {f.app("eq", {a, b}), f.app("eq", {b, b})}))
                  .has_value());
}

TEST_CASE("msg_equal") {
  foo_theory f;
  term m = mk_named("m"), k = mk_named("k");
  CHECK(f.th.msg_equal(f.app("unblind", {f.app("blind", {m, k}), k}), m));
  CHECK(f.th.msg_equal(m, m));
  CHECK_FALSE(f.th.msg_equal(f.c("v1"), f.c("v2")));
}

TEST_CASE("match_pattern") {
  foo_theory f;
  term n = mk_named("n"), m = mk_named("m"), k = mk_named("k");
  term x = mk_var("px"), y1 = mk_var("py");

  auto s1 = f.th.match_pattern(f.app("pair", {y1, x}), f.app("pair", {n, m}));
  REQUIRE(s1.has_value());
  CHECK(equal(*s1->lookup(term_kind::var, atoms::var("py")), n));
  CHECK(equal(*s1->lookup(term_kind::var, atoms::var("px")), m));

  auto s2 = f.th.match_pattern(f.app("commit", {x, k}), f.app("commit", {f.c("v1"), k}));
  REQUIRE(s2.has_value());
  CHECK(equal(*s2->lookup(term_kind::var, atoms::var("px")), f.c("v1")));

  CHECK_FALSE(f.th.match_pattern(f.app("commit", {x, k}), f.app("sign", {f.c("v1"), k}))
                  .has_value());
}

TEST_CASE("budget exceeded on a looping theory") {
  signature sig;
  sig.add_constructor("ok", 0);
  sig.add_constructor("f", 1);
  sig.add_destructor("g", 1);
  auto x = mk_var("x");
  std::vector<rewrite_rule> rules;
  // f(x) -> f(f(x)) as an oriented equation: grows forever.
  rules.push_back({mk_app(sig, "f", {x}), mk_app(sig, "f", {mk_app(sig, "f", {x})}), false});
  rules.push_back({mk_app(sig, "g", {x}), x, true});
  theory th(sig, std::move(rules));
  CHECK_THROWS_AS(th.normalize(mk_app(sig, "f", {mk_const(sig, "ok")}), 100), budget_exceeded);
}

TEST_CASE("enumerate_recipes: small frames") {
  foo_theory f;
  frame phi;
  term a = mk_named("a"), b = mk_named("b");
  phi.add("w", f.app("pair", {a, b}));

  bool found = false;
  enumerate_recipes(phi, f.th, 1, recipe_mode::all,
                    [&](const term& r, const std::optional<term>& m) {
                      if (m && equal(*m, a) && r->kind == term_kind::app &&
                          f.sig.at(r->id).name == "proj1")
                        found = true;
                      return true;
                    });
  CHECK(found);

  // Empty frame at depth 0: exactly the public constants.
  frame empty;
  std::set<std::string> seen;
  enumerate_recipes(empty, f.th, 0, recipe_mode::all,
                    [&](const term& r, const std::optional<term>&) {
                      seen.insert(to_string(f.sig, r));
                      return true;
                    });
  CHECK(seen == std::set<std::string>{"ok", "bot", "v1", "v2", "idA", "CX"});
}

TEST_CASE("enumerate_recipes: depth-3 extraction from the committed-vote triple") {
  foo_theory f;
  // Final frame of the blind-signature voting session.
  term k = mk_named("kex"), kp = mk_named("kpex"), kR = mk_named("kRex");
  term keyA = f.app("key", {f.c("idA")});
  term M = f.app("commit", {f.c("v1"), k});
  term s = f.app("sign", {f.app("blind", {M, kp}), keyA});
  frame phi;
  phi.add("wR", kR);
  phi.add("w1", f.app("pair", {f.app("pk", {keyA}), s}));
  phi.add("w2", f.app("sign", {M, kR}));
  phi.add("w3", f.app("pair", {f.c("CX"), f.app("pair", {M, k})}));

  std::function<bool(const term&)> mentions_w3 = [&](const term& t) {
    if (t->kind == term_kind::handle && atoms::display(term_kind::handle, t->id) == "w3")
      return true;
    for (const auto& aa : t->args)
      if (mentions_w3(aa)) return true;
    return false;
  };
  bool found = false;
  enumerate_recipes(phi, f.th, 3, recipe_mode::canonical_args,
                    [&](const term& r, const std::optional<term>& m) {
                      if (m && equal(*m, f.c("v1")) && mentions_w3(r)) {
                        found = true;
                        return false;
                      }
                      return true;
                    });
  CHECK(found);
}

TEST_CASE("idealise") {
  foo_theory f;
  term w2 = mk_handle("w2"), w1 = mk_handle("w1");
  term X = mk_xvar("CX");

  term r1 = f.app("pair", {X, w2});
  CHECK(to_string(f.sig, idealise(f.sig, r1)) == "pair(CX,w2)");
  CHECK(equal(idealise(f.sig, w1), w1));

  signature sig2;
  sig2.add_constructor("sign", 2);
  sig2.add(symbol{"CA", 0, true, true, true});
  sig2.add(symbol{"CB", 0, true, true, true});
  term r2 = mk_app(sig2, "sign", {mk_xvar("CA"), mk_xvar("CB")});
  CHECK(to_string(sig2, idealise(sig2, r2)) == "sign(CA,CB)");

  // Pure function: equal inputs, identical outputs.
  CHECK(equal(idealise(f.sig, r1), idealise(f.sig, r1)));
}

TEST_CASE("critical pair probe") {
  foo_theory f;
  CHECK(f.th.critical_pair_probe().empty());

  signature sig;
  sig.add_constructor("a", 0);
  sig.add_constructor("b", 0);
  sig.add_constructor("c", 0);
  sig.add_destructor("f", 1);
  std::vector<rewrite_rule> rules;
  rules.push_back({mk_app(sig, "f", {mk_const(sig, "a")}), mk_const(sig, "b"), true});
  rules.push_back({mk_app(sig, "f", {mk_const(sig, "a")}), mk_const(sig, "c"), true});
  theory th(sig, std::move(rules));
  CHECK(th.critical_pair_probe().size() == 1);

  signature sig3;
  sig3.add_constructor("z", 0);
  theory empty_th(sig3, {});
  CHECK(empty_th.critical_pair_probe().empty());
}

TEST_CASE("theory load findings") {
  foo_theory f;
  CHECK(f.th.load_findings().empty());

  signature sig;
  sig.add_constructor("okc", 0);
  sig.add_destructor("d", 1);
  sig.add_destructor("undefined_d", 1);
  auto x = mk_var("x"), y = mk_var("y");
  std::vector<rewrite_rule> rules;
  rules.push_back({mk_app(sig, "d", {x}), y, true});  // rhs var unbound
  theory th(sig, std::move(rules));
  CHECK(th.load_findings().size() == 2);
}

TEST_CASE("property: innermost and outermost normalization agree on small terms") {
  foo_theory f;
  std::mt19937 rng(7);
  for (int i = 0; i < 4000; ++i) {
    term t = test::random_ground_term(f, rng, 6);
    term a = f.th.normalize(t, default_rewrite_budget, rewrite_strategy::innermost);
    term b = f.th.normalize(t, default_rewrite_budget, rewrite_strategy::outermost);
    CAPTURE(to_string(f.sig, t));
    REQUIRE(equal(a, b));
  }
}

TEST_CASE("property: computation is a function") {
  foo_theory f;
  std::mt19937 rng(11);
  for (int i = 0; i < 2000; ++i) {
    term t = test::random_ground_term(f, rng, 8);
    auto r1 = f.th.compute(t);
    term nf = f.th.normalize(t, default_rewrite_budget, rewrite_strategy::outermost);
    if (r1) CHECK(equal(*r1, nf));
  }
}

TEST_CASE("property: enumerated recipes compute their reported message") {
  foo_theory f;
  std::mt19937 rng(23);
  for (int round = 0; round < 30; ++round) {
    frame phi;
    int n = 1 + static_cast<int>(rng() % 3u);
    for (int i = 0; i < n; ++i)
      phi.add("w" + std::to_string(i + 1), f.th.normalize(test::random_message(f, rng, 5)));
    enumerate_recipes(phi, f.th, 2, recipe_mode::canonical,
                      [&](const term& r, const std::optional<term>& m) {
                        auto direct = eval_recipe(r, phi, f.th);
                        if (m) {
                          REQUIRE(direct.has_value());
                          REQUIRE(equal(*direct, *m));
                        } else {
                          REQUIRE_FALSE(direct.has_value());
                        }
                        return true;
                      });
  }
}

TEST_CASE("property: knowledge synthesis produces sound smallest-first recipes") {
  foo_theory f;
  std::mt19937 rng(5);
  for (int round = 0; round < 40; ++round) {
    frame phi;
    int n = 1 + static_cast<int>(rng() % 3u);
    for (int i = 0; i < n; ++i)
      phi.add("w" + std::to_string(i + 1), f.th.normalize(test::random_message(f, rng, 6)));
    knowledge kb(phi, f.th, 3);
    for (const auto& fact : kb.facts()) {
      auto direct = eval_recipe(fact.recipe, phi, f.th);
      REQUIRE(direct.has_value());
      REQUIRE(equal(*direct, fact.msg));
      auto syn = kb.synthesize(fact.msg);
      REQUIRE(syn.has_value());
      auto syn_eval = eval_recipe(*syn, phi, f.th);
      REQUIRE(syn_eval.has_value());
      REQUIRE(equal(*syn_eval, fact.msg));
      REQUIRE((*syn)->size <= fact.recipe->size);
    }
  }
}
