#include <random>

#include "doctest.h"
#include "support/fixtures.hpp"

using namespace evsec;
using evsec::test::foo_processes;

namespace {

const step* find_step(const std::vector<step>& steps, action::kind k) {
  for (const auto& s : steps)
    if (s.act.k == k) return &s;
  return nullptr;
}

}  // namespace

TEST_CASE("enabled_steps: phase unwrap, output, phase jumps") {
  foo_processes fx;
  auto cx = fx.ctx();
  cx.phase_targets = {2, 3};

  // ({phase1 phase2 P}, phi, 1) has a tau successor ({phase2 P}, phi, 1).
  config K;
  K.push(p_phase(1, p_phase(2, p_out(fx.c, fx.f.c("ok"), p_null()))), annotation{});
  auto steps = enabled_steps(K, cx, {});
  const step* tau = find_step(steps, action::kind::tau);
  REQUIRE(tau != nullptr);
  CHECK(tau->next.phase == 1);
  CHECK(tau->next.procs.size() == 1);
  CHECK(tau->next.procs[0].p->phase == 2);

  // Output extends the frame.
  config K2;
  K2.push(p_phase(1, p_out(fx.c, fx.f.c("ok"), p_null())), annotation{});
  auto steps2 = enabled_steps(K2, cx, {});
  const step* outs = find_step(steps2, action::kind::out);
  REQUIRE(outs != nullptr);
  CHECK(outs->next.fl.size() == 1);
  CHECK(equal(outs->next.fl.entries()[0].value, fx.f.c("ok")));

  // A jump from phase 1 straight to 3 is offered when 3 is declared.
  bool jump3 = false;
  for (const auto& s : steps2)
    if (s.act.k == action::kind::phase_jump && s.act.target == 3) jump3 = true;
  CHECK(jump3);
}

TEST_CASE("replay: the honest blind-signature session reaches (empty; phi; 2)") {
  foo_processes fx;
  auto cx = fx.ctx();
  config K1 = fx.k1();
  trace out;
  config end = replay(K1, cx, fx.honest_trace(), &out);

  CHECK(end.procs.empty());
  CHECK(end.phase == 2);
  REQUIRE(end.fl.size() == 4);
  const auto& es = end.fl.entries();
  CHECK(atoms::display(term_kind::handle, es[0].handle) == "wR");
  CHECK(atoms::display(term_kind::handle, es[1].handle) == "w1");
  CHECK(atoms::display(term_kind::handle, es[2].handle) == "w2");
  CHECK(atoms::display(term_kind::handle, es[3].handle) == "w3");

  // w2 = sign(commit(v1,k), kR); w3 = pair(CX, pair(commit(v1,k), k)).
  term w2v = es[2].value;
  REQUIRE(w2v->kind == term_kind::app);
  CHECK(fx.f.sig.at(w2v->id).name == "sign");
  term w3v = es[3].value;
  CHECK(fx.f.sig.at(w3v->id).name == "pair");
  CHECK(equal(w3v->args[0], fx.f.c("CX")));
  CHECK(equal(w3v->args[1]->args[0], w2v->args[0]));

  // Empty trace leaves the configuration unchanged.
  config same = replay(K1, cx, {});
  CHECK(same.key(fx.f.sig) == K1.key(fx.f.sig));

  // Replacing the first input recipe with one that does not compute fails at
  // that position.
  trace bad = fx.honest_trace();
  bad[3].recipe = mk_app(fx.f.sig, "verSign", {mk_handle("wR"), mk_handle("wR")});
  CHECK_THROWS_AS(replay(K1, cx, bad), replay_mismatch);
}

TEST_CASE("replay determinism") {
  foo_processes fx;
  auto cx = fx.ctx();
  trace out1, out2;
  config a = replay(fx.k1(), cx, fx.honest_trace(), &out1);
  config b = replay(fx.k1(), cx, fx.honest_trace(), &out2);
  CHECK(a.key(fx.f.sig) == b.key(fx.f.sig));
  CHECK(to_string(fx.f.sig, out1, true) == to_string(fx.f.sig, out2, true));
}

TEST_CASE("project on processes and configurations") {
  foo_processes fx;
  term v0 = fx.f.c("v1"), v1 = fx.f.c("v2");
  process bi = p_phase(1, p_out(fx.c, mk_choice(v0, v1), p_null()));
  process l = project_process(fx.f.sig, bi, side::left);
  CHECK(equal(l->cont->payload, v0));
  process plain = p_phase(1, p_out(fx.c, v0, p_null()));
  CHECK(equal(project_process(fx.f.sig, plain, side::left), plain));
  CHECK(equal(project_process(fx.f.sig, plain, side::right), plain));

  // Nested choice inside a let payload resolves recursively.
  term nested = fx.app("pair", {mk_choice(v0, v1), fx.f.c("ok")});
  process pl = p_phase(1, p_let(atoms::var("z"), nested, p_null(), p_null()));
  process pr = project_process(fx.f.sig, pl, side::right);
  CHECK(equal(pr->cont->payload, fx.app("pair", {v1, fx.f.c("ok")})));
}

TEST_CASE("bi_enabled_steps: joint let evaluation and outputs") {
  foo_processes fx;
  auto cx = fx.ctx();
  term v0 = fx.f.c("v1"), v1 = fx.f.c("v2");
  term k = mk_named("bk"), k2 = mk_named("bk2");

  // Divergent let: left opens, right fails; the biprocess blocks.
  term good = fx.app("open", {fx.app("commit", {v0, k}), k});
  term bad = fx.app("open", {fx.app("commit", {v0, k}), k2});
  config K;
  K.push(p_phase(1, p_let(atoms::var("z"), mk_choice(good, bad), p_null(), p_null())),
         annotation{});
  auto steps = bi_enabled_steps(K, cx, {});
  CHECK(find_step(steps, action::kind::tau_then) == nullptr);
  CHECK(find_step(steps, action::kind::tau_else) == nullptr);

  // Identical-arm choice outputs fire exactly once.
  config K2;
  K2.push(p_phase(1, p_out(fx.c, mk_choice(v0, v0), p_null())), annotation{});
  auto steps2 = bi_enabled_steps(K2, cx, {});
  REQUIRE(find_step(steps2, action::kind::out) != nullptr);
  CHECK(equal(find_step(steps2, action::kind::out)->next.fl.entries()[0].value,
              find_step(steps2, action::kind::out)->next.fr.entries()[0].value));

  // Distinct-arm outputs still fire; distinguishing them is the frame
  // checker's job.
  config K3;
  K3.push(p_phase(1, p_out(fx.c, mk_choice(v0, v1), p_null())), annotation{});
  auto steps3 = bi_enabled_steps(K3, cx, {});
  const step* os = find_step(steps3, action::kind::out);
  REQUIRE(os != nullptr);
  CHECK(equal(os->next.fl.entries()[0].value, v0));
  CHECK(equal(os->next.fr.entries()[0].value, v1));
}

TEST_CASE("obs filters silent actions") {
  foo_processes fx;
  auto cx = fx.ctx();
  trace replayed;
  replay(fx.k1(), cx, fx.honest_trace(), &replayed);
  trace o = obs(replayed);
  CHECK(o.size() == 6);
  CHECK(to_string(fx.f.sig, o) ==
        "out(c,w1).in(c,sign(verSign(proj2(w1),proj1(w1)),wR)).phase(2)."
        "out(c,w2).in(c,pair(CX,w2)).out(c,w3)");

  trace taus(3, action{action::kind::tau, -1, nullptr, -1, 0, annotation{}});
  CHECK(obs(taus).empty());
  CHECK(obs(trace{}).empty());
}

TEST_CASE("property: phase and frame monotonicity, guardedness along random walks") {
  foo_processes fx;
  auto cx = fx.ctx();
  std::mt19937 rng(31);
  std::vector<term> pool = {fx.f.c("ok"), fx.f.c("v1"),
                            mk_handle("wR"), mk_handle("w1")};
  for (int walk = 0; walk < 200; ++walk) {
    config K = fx.k1();
    K.push(fx.ballot_box(), annotation::session("Ab", 0));
    int phase = K.phase;
    size_t frame_size = K.fl.size();
    for (int d = 0; d < 12; ++d) {
      auto steps = enabled_steps(K, cx, pool);
      if (steps.empty()) break;
      const step& s = steps[rng() % steps.size()];
      CHECK(s.next.phase >= phase);
      if (s.act.k == action::kind::phase_jump) CHECK(s.next.phase > phase);
      CHECK(s.next.fl.size() >= frame_size);
      for (size_t i = 0; i < frame_size; ++i)
        CHECK(equal(s.next.fl.entries()[i].value, K.fl.entries()[i].value));
      for (const auto& ap : s.next.procs) CHECK(ap.p->kind == proc_kind::phase);
      phase = s.next.phase;
      frame_size = s.next.fl.size();
      K = s.next;
    }
  }
}

TEST_CASE("property: projection commutes with bi-steps") {
  foo_processes fx;
  auto cx = fx.ctx();
  std::mt19937 rng(17);
  std::vector<term> pool = {fx.f.c("ok"), fx.f.c("v1")};

  auto random_biproc = [&](int len) {
    process p = p_null();
    for (int i = 0; i < len; ++i) {
      term tl = test::random_message(fx.f, rng, 3);
      term tr_ = rng() % 2 ? tl : test::random_message(fx.f, rng, 3);
      term payload = equal(tl, tr_) ? tl : mk_choice(tl, tr_);
      switch (rng() % 3) {
        case 0: p = p_out(fx.c, payload, p); break;
        case 1:
          p = p_let(atoms::var("z" + std::to_string(i)),
                    rng() % 2 ? payload
                              : mk_app(fx.f.sig, "proj1", {payload}),
                    p, p_null());
          break;
        default: p = p_in(fx.c, atoms::var("x" + std::to_string(i)), p); break;
      }
    }
    return p_phase(1, p);
  };

  for (int round = 0; round < 300; ++round) {
    config K;
    K.push(random_biproc(1 + static_cast<int>(rng() % 3u)), annotation{});
    K.push(random_biproc(1 + static_cast<int>(rng() % 2u)), annotation::session("Q", 1));
    for (int d = 0; d < 4; ++d) {
      auto bsteps = bi_enabled_steps(K, cx, pool);
      if (bsteps.empty()) break;
      for (side sd : {side::left, side::right}) {
        config proj = project_config(fx.f.sig, K, sd);
        auto psteps = enabled_steps(proj, cx, pool);
        for (const auto& bs : bsteps) {
          config bproj = project_config(fx.f.sig, bs.next, sd);
          bool matched = false;
          for (const auto& ps : psteps) {
            if (ps.act.k != bs.act.k || ps.act.target != bs.act.target) continue;
            if (ps.act.k == action::kind::in && !equal(ps.act.recipe, bs.act.recipe))
              continue;
            if (!(ps.act.who == bs.act.who)) continue;
            if (ps.next.key(fx.f.sig) == bproj.key(fx.f.sig)) {
              matched = true;
              break;
            }
          }
          CAPTURE(to_string(fx.f.sig, bs.act, true));
          CHECK(matched);
        }
      }
      K = bsteps[rng() % bsteps.size()].next;
    }
  }
}
