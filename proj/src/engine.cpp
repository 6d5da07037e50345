#include "caucb/engine.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace caucb {

void check_config(const Market& market, const SimulationConfig& config) {
  if (!(config.lambda >= 0.0 && config.lambda < 1.0)) {
    throw std::invalid_argument("lambda must lie in [0, 1), got " + std::to_string(config.lambda));
  }
  if (config.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!(config.noise_sigma >= 0.0) || !std::isfinite(config.noise_sigma)) {
    throw std::invalid_argument("noise sigma must be finite and >= 0");
  }
  if (config.initial_attempts) {
    const AttemptProfile& init = *config.initial_attempts;
    if (init.size() != market.n_players()) throw std::invalid_argument("initial attempts must cover every player");
    if ((init.array() < 0).any() || (init.array() >= market.n_arms()).any()) {
      throw std::invalid_argument("initial attempts reference an unknown arm");
    }
  }
}

std::vector<ArmId> plausible_set(const Market& market, PlayerId p, const Eigen::VectorXi& prev_pulls) {
  std::vector<ArmId> out;
  out.reserve(market.n_arms());
  if (prev_pulls.size() == 0) {
    for (ArmId a = 0; a < market.n_arms(); ++a) out.push_back(a);
    return out;
  }
  const Eigen::VectorXi holder = arm_holders(market, prev_pulls);
  for (ArmId a = 0; a < market.n_arms(); ++a) {
    const PlayerId h = holder(a);
    if (h < 0 || h == p || market.arm_prefers(a, p, h)) out.push_back(a);
  }
  return out;
}

ArmId deviator_action(long t, int delay) {
  if (t < 1) throw std::invalid_argument("deviator_action needs t >= 1");
  switch (t % 3) {
    case 1:
      return 1;
    case 2:
      return delay == 0 ? 2 : 1;
    default:
      return 0;
  }
}

namespace {

template <typename Score>
ArmId argmax_over(const std::vector<ArmId>& arms, TieBreak tie_break, Score score) {
  ArmId best = kNoArm;
  double best_score = -kInfiniteUcb;
  for (ArmId a : arms) {
    const double s = score(a);
    const bool better = best == kNoArm || s > best_score || (tie_break == TieBreak::kHighestIndex && s == best_score);
    if (better) {
      best = a;
      best_score = s;
    }
  }
  return best;
}

}  // namespace

ArmId decide(const AgentPolicy& policy, const DecisionContext& ctx) {
  switch (policy.kind) {
    case PolicyKind::kFixedAction:
      return policy.fixed_arm;
    case PolicyKind::kScriptedDeviator:
      return deviator_action(ctx.t, ctx.delay);
    case PolicyKind::kCaUcb:
    case PolicyKind::kOracleRank:
      break;
  }
  if (ctx.delay == 1 && ctx.prev_attempt != kNoArm) return ctx.prev_attempt;
  if (ctx.plausible.empty()) {
    throw std::logic_error("empty plausible set for player " + std::to_string(ctx.player) + " at t=" +
                           std::to_string(ctx.t));
  }
  if (policy.kind == PolicyKind::kOracleRank) {
    return argmax_over(ctx.plausible, ctx.tie_break, [&](ArmId a) { return ctx.market.mean(ctx.player, a); });
  }
  return argmax_over(ctx.plausible, ctx.tie_break, [&](ArmId a) { return ucb_value(ctx.state, a, ctx.t); });
}

int count_conflicts(const Market& market, const AttemptProfile& attempts) {
  Eigen::VectorXi tries = Eigen::VectorXi::Zero(market.n_arms());
  for (Eigen::Index p = 0; p < attempts.size(); ++p) {
    if (attempts(p) != kNoArm) ++tries(attempts(p));
  }
  return static_cast<int>((tries.array() >= 2).count());
}

RunStreams::RunStreams(std::uint64_t seed, int n_players) : environment(make_stream(seed, 0)) {
  players.reserve(n_players);
  for (int p = 0; p < n_players; ++p) players.push_back(make_stream(seed, 1 + static_cast<std::uint64_t>(p)));
}

RoundRecord step(const Market& market, const std::vector<AgentPolicy>& policies, const SimulationConfig& config,
                 std::vector<PlayerBanditState>& states, const RoundRecord* prev, long t, RunStreams& streams) {
  const int n = market.n_players();
  RoundRecord rec;
  rec.t = t;
  rec.attempts.resize(n);
  rec.delays = Eigen::VectorXi::Zero(n);
  rec.rewards = Eigen::VectorXd::Zero(n);

  if (prev == nullptr) {
    for (PlayerId p = 0; p < n; ++p) {
      if (config.initial_attempts) {
        rec.attempts(p) = (*config.initial_attempts)(p);
      } else if (policies[p].kind == PolicyKind::kScriptedDeviator || policies[p].kind == PolicyKind::kFixedAction) {
        const std::vector<ArmId> none;
        rec.attempts(p) = decide(policies[p], {market, p, none, 0, kNoArm, t, states[p], config.tie_break});
      } else {
        rec.attempts(p) = uniform_index(streams.environment, market.n_arms());
      }
    }
  } else {
    for (PlayerId p = 0; p < n; ++p) {
      rec.delays(p) = bernoulli(streams.players[p], config.lambda) ? 1 : 0;
      const std::vector<ArmId> plausible = plausible_set(market, p, prev->pulls);
      if (plausible.empty()) throw std::logic_error("empty plausible set at t=" + std::to_string(t));
      rec.attempts(p) = decide(policies[p], {market, p, plausible, rec.delays(p), prev->attempts(p), t, states[p],
                                             config.tie_break});
    }
  }

  rec.pulls = resolve_conflicts(market, rec.attempts);
  const RewardModel model{config.noise_sigma};
  for (PlayerId p = 0; p < n; ++p) {
    states[p].record_attempt(rec.attempts(p));
    const ArmId won = rec.pulls(p);
    if (won == kNoArm) continue;
    rec.rewards(p) = sample_reward(model, market.mean(p, won), streams.environment);
    states[p].record_success(won, rec.rewards(p));
  }
  return rec;
}

Trace run(const Market& market, const std::vector<AgentPolicy>& policies, const SimulationConfig& config) {
  if (const auto problems = validate(market); !problems.empty()) {
    throw std::invalid_argument("invalid market: " + problems.front());
  }
  check_config(market, config);
  if (static_cast<int>(policies.size()) != market.n_players()) {
    throw std::invalid_argument("need one policy per player");
  }
  for (const AgentPolicy& policy : policies) {
    if (policy.kind == PolicyKind::kFixedAction && (policy.fixed_arm < 0 || policy.fixed_arm >= market.n_arms())) {
      throw std::invalid_argument("fixed policy references an unknown arm");
    }
    if (policy.kind == PolicyKind::kScriptedDeviator && market.n_arms() < 3) {
      throw std::invalid_argument("scripted deviator needs at least three arms");
    }
  }

  Trace trace;
  trace.final_states.assign(market.n_players(), PlayerBanditState(market.n_arms()));
  trace.rounds.reserve(config.horizon);
  RunStreams streams(config.seed, market.n_players());
  for (long t = 1; t <= config.horizon; ++t) {
    const RoundRecord* prev = trace.rounds.empty() ? nullptr : &trace.rounds.back();
    trace.rounds.push_back(step(market, policies, config, trace.final_states, prev, t, streams));
  }
  return trace;
}

}  // namespace caucb
