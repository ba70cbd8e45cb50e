#include "evsec/protocol.hpp"

namespace evsec {

std::vector<term> state_tally(const xstate& s, const evoting_protocol& p) {
  std::vector<term> votes;
  for (int h : s.bb) {
    const term* v = s.K.fl.lookup(h);
    if (!v || !p.psi_holds(*v)) continue;
    auto e = p.extract_vote(*v);
    if (!e) continue;
    for (const auto& cand : p.votes)
      if (equal(*e, cand)) votes.push_back(*e);
  }
  return votes;
}

// Definition of ballot secrecy, decided directly at the bound: every fair
// execution of S must be matched by a fair execution of S_r with the same
// observables, statically equivalent frames and the same tally outcome, and
// symmetrically.
verdict ballot_secrecy_direct(const evoting_protocol& p, const bounds& b) {
  explore_env env = p.make_env(b, /*fairness_voters=*/true);
  config S = p.voting_system(false);
  config Sr = p.voting_system(true);

  auto res_match = [&p](const xstate& s, const xstate& c) {
    return same_multiset(p.th.sig(), state_tally(s, p), state_tally(c, p));
  };
  verdict v = trace_equiv_check(S, Sr, env, {}, res_match);
  if (!v.pass && v.reason.find("unmatched") != std::string::npos)
    v.reason = "fair execution with no observably equal fair counterpart (" + v.reason + ")";
  return v;
}

}  // namespace evsec
