#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "caucb/engine.hpp"
#include "caucb/experiments.hpp"
#include "caucb/metrics.hpp"
#include "test_support.hpp"

using namespace caucb;

namespace {

Market globally_ranked(int n, int l, Rng& rng) {
  const Market base = gen_uniform(n, l, rng);
  std::vector<PlayerId> order(n);
  std::iota(order.begin(), order.end(), 0);
  return Market(base.mean_rewards(), std::vector<std::vector<PlayerId>>(l, order));
}

}  // namespace

TEST_CASE("plausible sets") {
  const Market m = example1_market();
  // p1 pulled a1 at t-1, p2 lost.
  const Eigen::VectorXi pulls = vec({0, kNoArm});
  CHECK(plausible_set(m, 1, pulls) == std::vector<ArmId>{1});
  CHECK(plausible_set(m, 0, pulls) == std::vector<ArmId>{0, 1});
  CHECK(plausible_set(m, 1, Eigen::VectorXi()) == std::vector<ArmId>{0, 1});

  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const Market g = globally_ranked(4, 5, rng);
    Eigen::VectorXi prev(4);
    for (PlayerId p = 0; p < 4; ++p) prev(p) = uniform_index(rng, 5);
    prev = resolve_conflicts(g, prev);
    CHECK(plausible_set(g, 0, prev).size() == 5u);
  }
}

TEST_CASE("plausible set matches its definition") {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const Market m = gen_uniform(4, 5, rng);
    AttemptProfile attempts(4);
    for (PlayerId p = 0; p < 4; ++p) attempts(p) = uniform_index(rng, 5);
    const Eigen::VectorXi pulls = resolve_conflicts(m, attempts);
    for (PlayerId p = 0; p < 4; ++p) {
      const auto s = plausible_set(m, p, pulls);
      CHECK(!s.empty());
      for (ArmId a = 0; a < 5; ++a) {
        bool ok = true;
        for (PlayerId q = 0; q < 4; ++q) {
          if (q != p && pulls(q) == a && oracle::position(m.arm_prefs()[a], q) < oracle::position(m.arm_prefs()[a], p)) ok = false;
        }
        CHECK(ok == (std::find(s.begin(), s.end(), a) != s.end()));
      }
    }
  }
}

TEST_CASE("decide") {
  const Market m = example3_market();
  PlayerBanditState state(3);
  state.record_success(0, 5.0);
  state.record_success(1, 5.0);
  const std::vector<ArmId> all{0, 1, 2};

  CHECK(decide(AgentPolicy::ca_ucb(), {m, 0, all, 1, 0, 10, state}) == 0);
  CHECK(decide(AgentPolicy::oracle_rank(), {m, 0, all, 1, 1, 10, state}) == 1);
  CHECK(decide(AgentPolicy::ca_ucb(), {m, 0, all, 0, 0, 10, state}) == 2);

  const std::vector<ArmId> two{1, 2};
  CHECK(decide(AgentPolicy::oracle_rank(), {m, 0, two, 0, 0, 10, state}) == 2);
  CHECK(decide(AgentPolicy::fixed(1), {m, 0, two, 0, 0, 10, state}) == 1);
  CHECK(decide(AgentPolicy::scripted_deviator(), {m, 2, two, 0, 2, 3, state}) == 0);

  // Two unsampled arms tie at +inf.
  PlayerBanditState fresh(3);
  CHECK(decide(AgentPolicy::ca_ucb(), {m, 0, two, 0, 0, 2, fresh}) == 1);
  CHECK(decide(AgentPolicy::ca_ucb(), {m, 0, two, 0, 0, 2, fresh, TieBreak::kHighestIndex}) == 2);

  const std::vector<ArmId> none;
  CHECK_THROWS_AS(decide(AgentPolicy::ca_ucb(), {m, 0, none, 0, 0, 2, fresh}), std::logic_error);
}

TEST_CASE("deviator action sequence") {
  CHECK(deviator_action(1, 0) == 1);
  CHECK(deviator_action(2, 0) == 2);
  CHECK(deviator_action(2, 1) == 1);
  CHECK(deviator_action(3, 0) == 0);
  CHECK(deviator_action(3, 1) == 0);
  for (long m = 1; m < 50; ++m) {
    CHECK(deviator_action(3 * m - 2, 1) == 1);
    CHECK(deviator_action(3 * m - 1, 0) == 2);
    CHECK(deviator_action(3 * m, 0) == 0);
  }
}

TEST_CASE("conflict resolution") {
  const Market m = example1_market();
  CHECK(resolve_conflicts(m, vec({0, 0})) == vec({0, kNoArm}));
  CHECK(resolve_conflicts(m, vec({1, 0})) == vec({1, 0}));

  Eigen::MatrixXd means(3, 3);
  means << 1, 2, 3,
           1, 2, 3,
           1, 2, 3;
  const Market three(means, {{1, 2, 0}, {0, 1, 2}, {2, 0, 1}});
  CHECK(resolve_conflicts(three, vec({0, 0, 0})) == vec({kNoArm, 0, kNoArm}));
  CHECK(count_conflicts(three, vec({0, 0, 0})) == 1);
  CHECK(count_conflicts(three, vec({0, 1, 2})) == 0);
}

TEST_CASE("example1 step at t = 2") {
  const Market m = example1_market();
  SimulationConfig cfg;
  cfg.initial_attempts = vec({0, 0});
  const std::vector<AgentPolicy> pol(2, AgentPolicy::ca_ucb());
  std::vector<PlayerBanditState> states(2, PlayerBanditState(2));
  RunStreams streams(0, 2);
  const RoundRecord r1 = step(m, pol, cfg, states, nullptr, 1, streams);
  CHECK(r1.pulls == vec({0, kNoArm}));
  const RoundRecord r2 = step(m, pol, cfg, states, &r1, 2, streams);
  CHECK(r2.attempts == vec({1, 1}));
  CHECK(r2.pulls == vec({kNoArm, 1}));
  CHECK(ucb_value(states[0], 1, 3) == kInfiniteUcb);
}

TEST_CASE("example1 alternates forever without delays") {
  const auto spec = preset("example1");
  SimulationConfig cfg = spec.cells[0].config;
  cfg.horizon = 400;
  const Trace trace = run(example1_market(), spec.cells[0].policies, cfg);
  for (const RoundRecord& rec : trace.rounds) {
    const int arm = rec.t % 2 == 1 ? 0 : 1;
    CHECK(rec.attempts == vec({arm, arm}));
  }
}

TEST_CASE("example3 cycle reproduces the documented pattern") {
  const auto spec = preset("example3");
  const Trace trace = run(example3_market(), spec.cells[0].policies, spec.cells[0].config);
  REQUIRE(trace.rounds.size() == 100u);
  // t: p1, p3 on a2 (p1 wins), p2 on a1.
  CHECK(trace.rounds[0].attempts == vec({1, 0, 1}));
  CHECK(trace.rounds[0].pulls == vec({1, 0, kNoArm}));
  // t+1: p3 takes a1 from p2, p1 moves to the free a3.
  CHECK(trace.rounds[1].attempts == vec({2, 0, 0}));
  CHECK(trace.rounds[1].pulls == vec({2, kNoArm, 0}));
  // t+2: p2 takes a3 from p1, p3 moves to the free a2.
  CHECK(trace.rounds[2].attempts == vec({2, 2, 1}));
  CHECK(trace.rounds[2].pulls == vec({kNoArm, 2, 1}));
  for (std::size_t r = 3; r < trace.rounds.size(); ++r) CHECK(trace.rounds[r].attempts == trace.rounds[r - 3].attempts);
  CHECK((conflicts_per_round(trace, example3_market()).array() == 1).all());
}

TEST_CASE("run is deterministic and respects delays") {
  Rng rng(77);
  const Market m = gen_uniform(4, 5, rng);
  SimulationConfig cfg;
  cfg.lambda = 0.3;
  cfg.horizon = 300;
  cfg.seed = 9;
  const std::vector<AgentPolicy> pol(4, AgentPolicy::ca_ucb());
  const Trace a = run(m, pol, cfg);
  const Trace b = run(m, pol, cfg);
  CHECK(a == b);
  cfg.seed = 10;
  CHECK_FALSE(a == run(m, pol, cfg));

  int delayed = 0;
  for (std::size_t r = 1; r < a.rounds.size(); ++r) {
    for (PlayerId p = 0; p < 4; ++p) {
      if (a.rounds[r].delays(p) == 1) {
        ++delayed;
        CHECK(a.rounds[r].attempts(p) == a.rounds[r - 1].attempts(p));
      }
    }
    CHECK(a.rounds[r].pulls == resolve_conflicts(m, a.rounds[r].attempts));
    CHECK(((a.rounds[r].pulls.array() == kNoArm) <= (a.rounds[r].rewards.array() == 0.0)).all());
  }
  CHECK((a.rounds[0].delays.array() == 0).all());
  // About 0.3 * 299 * 4 = 359 delays.
  CHECK(delayed > 280);
  CHECK(delayed < 440);
}

TEST_CASE("bandit states change only on wins") {
  Rng rng(78);
  const Market m = gen_uniform(5, 5, rng);
  SimulationConfig cfg;
  cfg.lambda = 0.1;
  cfg.seed = 3;
  const std::vector<AgentPolicy> pol(5, AgentPolicy::ca_ucb());
  std::vector<PlayerBanditState> states(5, PlayerBanditState(5));
  RunStreams streams(cfg.seed, 5);
  RoundRecord prev;
  for (long t = 1; t <= 300; ++t) {
    const auto before = states;
    RoundRecord rec = step(m, pol, cfg, states, t == 1 ? nullptr : &prev, t, streams);
    for (PlayerId p = 0; p < 5; ++p) {
      if (rec.pulls(p) == kNoArm) {
        CHECK(states[p].success_counts() == before[p].success_counts());
        CHECK(states[p].reward_sums() == before[p].reward_sums());
      } else {
        CHECK(states[p].success_counts().sum() == before[p].success_counts().sum() + 1);
        CHECK(states[p].success_counts()(rec.pulls(p)) == before[p].success_counts()(rec.pulls(p)) + 1);
      }
    }
    prev = std::move(rec);
  }
}

TEST_CASE("single player never conflicts and finds the best arm") {
  Eigen::MatrixXd means(1, 4);
  means << 1, 4, 2, 3;
  const Market m(means, {{0}, {0}, {0}, {0}});
  SimulationConfig cfg;
  cfg.horizon = 3000;
  cfg.seed = 5;
  const Trace trace = run(m, {AgentPolicy::ca_ucb()}, cfg);
  for (const auto& rec : trace.rounds) CHECK(rec.pulls(0) == rec.attempts(0));
  CHECK(trace.final_states[0].success_counts()(1) > 2500);
}

TEST_CASE("zero delay CA-UCB depends on the seed only through rewards and round 1") {
  Rng rng(90);
  const Market m = gen_uniform(3, 4, rng);
  SimulationConfig cfg;
  cfg.horizon = 200;
  cfg.noise_sigma = 0.0;
  cfg.initial_attempts = vec({0, 1, 2});
  const std::vector<AgentPolicy> pol(3, AgentPolicy::ca_ucb());
  cfg.seed = 1;
  const Trace a = run(m, pol, cfg);
  cfg.seed = 2;
  const Trace b = run(m, pol, cfg);
  CHECK(a == b);
}

TEST_CASE("stability is preserved under oracle ranking") {
  Rng rng(31);
  for (double lambda : {0.0, 0.1, 0.5}) {
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 2 + trial % 4;
      const Market m = gen_uniform(n, n, rng);
      SimulationConfig cfg;
      cfg.lambda = lambda;
      cfg.horizon = 1000;
      cfg.seed = static_cast<std::uint64_t>(trial);
      cfg.initial_attempts = trial % 2 ? deferred_acceptance(m, ProposingSide::kPlayers)
                                       : deferred_acceptance(m, ProposingSide::kArms);
      const Trace trace = run(m, std::vector<AgentPolicy>(n, AgentPolicy::oracle_rank()), cfg);
      bool unchanged = true;
      for (const auto& rec : trace.rounds) unchanged = unchanged && rec.attempts == *cfg.initial_attempts;
      CHECK(unchanged);
    }
  }
}

TEST_CASE("one designated blocking pair resolves with probability at least (1 - lambda) lambda^(N-1)") {
  Rng rng(55);
  constexpr int n = 3;
  constexpr double lambda = 0.5;
  Market m;
  AttemptProfile prev_attempts;
  std::vector<BlockingPair> pcs;
  do {
    m = gen_uniform(n, n, rng);
    prev_attempts = AttemptProfile(n);
    for (PlayerId p = 0; p < n; ++p) prev_attempts(p) = uniform_index(rng, n);
    pcs = player_consistent_blocking_pairs(m, induced_matching(m, prev_attempts));
  } while (is_stable(m, prev_attempts) || pcs.size() < 2);
  const BlockingPair target = pcs.front();

  RoundRecord prev;
  prev.t = 1;
  prev.attempts = prev_attempts;
  prev.pulls = resolve_conflicts(m, prev_attempts);
  prev.delays = Eigen::VectorXi::Zero(n);
  prev.rewards = Eigen::VectorXd::Zero(n);

  SimulationConfig cfg;
  cfg.lambda = lambda;
  const std::vector<AgentPolicy> pol(n, AgentPolicy::oracle_rank());
  constexpr int trials = 10000;
  int hits = 0;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<PlayerBanditState> states(n, PlayerBanditState(n));
    RunStreams streams(static_cast<std::uint64_t>(trial), n);
    const RoundRecord rec = step(m, pol, cfg, states, &prev, 2, streams);
    bool event = rec.attempts(target.player) == target.arm;
    for (PlayerId p = 0; p < n; ++p) {
      if (p != target.player) event = event && rec.attempts(p) == prev_attempts(p);
    }
    hits += event;
  }
  const double eps = (1.0 - lambda) * std::pow(lambda, n - 1);
  const double freq = hits / double(trials);
  const double se = std::sqrt(eps * (1.0 - eps) / trials);
  CHECK(freq >= eps - 3.0 * se);
}

TEST_CASE("run rejects bad inputs") {
  const Market m = example1_market();
  SimulationConfig cfg;
  cfg.lambda = 1.0;
  CHECK_THROWS_AS(run(m, {AgentPolicy::ca_ucb(), AgentPolicy::ca_ucb()}, cfg), std::invalid_argument);
  cfg.lambda = 0.0;
  CHECK_THROWS_AS(run(m, {AgentPolicy::ca_ucb()}, cfg), std::invalid_argument);
  cfg.initial_attempts = vec({0, 5});
  CHECK_THROWS_AS(run(m, {AgentPolicy::ca_ucb(), AgentPolicy::ca_ucb()}, cfg), std::invalid_argument);
}
