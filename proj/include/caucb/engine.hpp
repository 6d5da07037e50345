#ifndef CAUCB_ENGINE_HPP
#define CAUCB_ENGINE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "caucb/bandit.hpp"
#include "caucb/market.hpp"
#include "caucb/rng.hpp"
#include "caucb/stable_matching.hpp"

namespace caucb {

enum class PolicyKind {
  kCaUcb,             // max UCB over the plausible set
  kOracleRank,        // max true mean over the plausible set
  kScriptedDeviator,  // fixed three-round cycle, ignores the protocol
  kFixedAction,       // always the same arm
};

struct AgentPolicy {
  PolicyKind kind = PolicyKind::kCaUcb;
  ArmId fixed_arm = 0;  // kFixedAction only

  static AgentPolicy ca_ucb() { return {PolicyKind::kCaUcb, 0}; }
  static AgentPolicy oracle_rank() { return {PolicyKind::kOracleRank, 0}; }
  static AgentPolicy scripted_deviator() { return {PolicyKind::kScriptedDeviator, 0}; }
  static AgentPolicy fixed(ArmId arm) { return {PolicyKind::kFixedAction, arm}; }

  bool operator==(const AgentPolicy&) const = default;
};

/// Resolution of equal maximal scores in the plausible set.
enum class TieBreak { kLowestIndex, kHighestIndex };

struct SimulationConfig {
  double lambda = 0.0;  // delay probability, in [0, 1)
  long horizon = 1;
  double noise_sigma = 1.0;
  std::uint64_t seed = 0;
  std::optional<AttemptProfile> initial_attempts;  // round-1 override
  TieBreak tie_break = TieBreak::kLowestIndex;
};

/// Throws std::invalid_argument on lambda outside [0,1), horizon < 1,
/// negative sigma, or a malformed initial profile.
void check_config(const Market& market, const SimulationConfig& config);

struct RoundRecord {
  long t = 0;
  AttemptProfile attempts;  // arm each player tried
  Eigen::VectorXi pulls;    // arm each player got, kNoArm after a lost conflict
  Eigen::VectorXi delays;   // 0/1 delay draws; always 0 at t = 1
  Eigen::VectorXd rewards;  // 0 for unmatched players

  bool operator==(const RoundRecord&) const = default;
};

struct Trace {
  std::vector<RoundRecord> rounds;
  std::vector<PlayerBanditState> final_states;

  bool operator==(const Trace&) const = default;
};

/// Arms player p may pull: those not taken at t-1 by a player the arm
/// strictly prefers to p. `prev_pulls` empty means round 1 (all arms).
std::vector<ArmId> plausible_set(const Market& market, PlayerId p, const Eigen::VectorXi& prev_pulls);

/// Player 3's action sequence in the three-player incentive example:
/// a2 at t = 3m-2, a3 (or a2 when delayed) at t = 3m-1, a1 at t = 3m.
ArmId deviator_action(long t, int delay);

/// Everything a policy may see when choosing an arm.
struct DecisionContext {
  const Market& market;
  PlayerId player;
  const std::vector<ArmId>& plausible;
  int delay;
  ArmId prev_attempt;
  long t;
  const PlayerBanditState& state;
  TieBreak tie_break = TieBreak::kLowestIndex;
};

ArmId decide(const AgentPolicy& policy, const DecisionContext& ctx);

/// Conflict resolution: every arm goes to its most-preferred attempter.
inline Eigen::VectorXi resolve_conflicts(const Market& market, const AttemptProfile& attempts) {
  return induced_matching(market, attempts);
}

/// Number of arms attempted by two or more players.
int count_conflicts(const Market& market, const AttemptProfile& attempts);

/// Per-run random streams: one per player (delays) plus an environment
/// stream (round-1 arms, rewards).
struct RunStreams {
  std::vector<Rng> players;
  Rng environment;

  RunStreams(std::uint64_t seed, int n_players);
};

/// Plays round t. `prev` is null at t = 1. Updates `states` in place
/// (attempt counts for everyone, reward statistics for winners only).
RoundRecord step(const Market& market, const std::vector<AgentPolicy>& policies, const SimulationConfig& config,
                 std::vector<PlayerBanditState>& states, const RoundRecord* prev, long t, RunStreams& streams);

/// Full simulation; identical inputs give identical traces. Throws
/// std::invalid_argument for an invalid market, config or policy list.
Trace run(const Market& market, const std::vector<AgentPolicy>& policies, const SimulationConfig& config);

}  // namespace caucb

#endif  // CAUCB_ENGINE_HPP
