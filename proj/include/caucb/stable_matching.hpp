#ifndef CAUCB_STABLE_MATCHING_HPP
#define CAUCB_STABLE_MATCHING_HPP

#include <vector>

#include <Eigen/Dense>

#include "caucb/market.hpp"

namespace caucb {

/// Player -> arm, kNoArm for unmatched. Injective on matched players.
using Matching = Eigen::VectorXi;

/// Player -> attempted arm. Total, not necessarily injective.
using AttemptProfile = Eigen::VectorXi;

struct BlockingPair {
  PlayerId player = 0;
  ArmId arm = 0;
  bool operator==(const BlockingPair&) const = default;
};

struct StableSet {
  std::vector<Matching> matchings;
  Matching optimal_match;   // per player, best arm over all stable matchings
  Matching pessimal_match;  // per player, worst arm over all stable matchings
};

enum class ProposingSide { kPlayers, kArms };

/// Which player holds each arm, kNoArm-style -1 if none.
Eigen::VectorXi arm_holders(const Market& market, const Matching& matching);

bool is_matching(const Market& market, const Matching& matching);

/// Each contested arm goes to the attempter it ranks highest; the other
/// attempters are left unmatched. This is also the engine's conflict rule.
Matching induced_matching(const Market& market, const AttemptProfile& profile);

/// All (player, arm) pairs where the player prefers the arm to its
/// current assignment and the arm is free or prefers the player to its
/// holder. Sorted by (player, arm).
std::vector<BlockingPair> blocking_pairs(const Market& market, const Matching& matching);

bool blocks(const Market& market, const Matching& matching, const BlockingPair& pair);

/// True iff the profile is injective and has no blocking pair.
bool is_stable(const Market& market, const AttemptProfile& profile);

Matching deferred_acceptance(const Market& market, ProposingSide side);

/// Largest n_arms accepted by enumerate_stable().
inline constexpr int kMaxEnumerationArms = 8;

/// Brute force over all injective player->arm maps. Throws
/// std::invalid_argument when n_arms > kMaxEnumerationArms.
StableSet enumerate_stable(const Market& market);

/// For each blocking player, its most-preferred blocking arm.
std::vector<BlockingPair> player_consistent_blocking_pairs(const Market& market, const Matching& matching);

/// Moves pair.player onto pair.arm, leaving everyone else in place.
/// Throws std::invalid_argument unless the pair blocks the matching
/// induced by `profile`.
AttemptProfile resolve_blocking_pair(const Market& market, const AttemptProfile& profile, const BlockingPair& pair);

}  // namespace caucb

#endif  // CAUCB_STABLE_MATCHING_HPP
