#include "caucb/stable_matching.hpp"

#include <deque>
#include <stdexcept>
#include <string>

namespace caucb {

Eigen::VectorXi arm_holders(const Market& market, const Matching& matching) {
  Eigen::VectorXi holder = Eigen::VectorXi::Constant(market.n_arms(), -1);
  for (PlayerId p = 0; p < matching.size(); ++p) {
    if (matching(p) != kNoArm) holder(matching(p)) = p;
  }
  return holder;
}

bool is_matching(const Market& market, const Matching& matching) {
  if (matching.size() != market.n_players()) return false;
  std::vector<bool> used(market.n_arms(), false);
  for (PlayerId p = 0; p < matching.size(); ++p) {
    const ArmId a = matching(p);
    if (a == kNoArm) continue;
    if (a < 0 || a >= market.n_arms() || used[a]) return false;
    used[a] = true;
  }
  return true;
}

Matching induced_matching(const Market& market, const AttemptProfile& profile) {
  Eigen::VectorXi winner = Eigen::VectorXi::Constant(market.n_arms(), -1);
  for (PlayerId p = 0; p < profile.size(); ++p) {
    const ArmId a = profile(p);
    if (a == kNoArm) continue;
    if (winner(a) < 0 || market.arm_prefers(a, p, winner(a))) winner(a) = p;
  }
  Matching out = Matching::Constant(profile.size(), kNoArm);
  for (ArmId a = 0; a < market.n_arms(); ++a) {
    if (winner(a) >= 0) out(winner(a)) = a;
  }
  return out;
}

namespace {

bool blocks_with_holders(const Market& market, const Matching& matching, const Eigen::VectorXi& holder, PlayerId p,
                         ArmId a) {
  if (matching(p) == a || !market.player_prefers(p, a, matching(p))) return false;
  return holder(a) < 0 || market.arm_prefers(a, p, holder(a));
}

}  // namespace

std::vector<BlockingPair> blocking_pairs(const Market& market, const Matching& matching) {
  const Eigen::VectorXi holder = arm_holders(market, matching);
  std::vector<BlockingPair> out;
  for (PlayerId p = 0; p < market.n_players(); ++p) {
    for (ArmId a = 0; a < market.n_arms(); ++a) {
      if (blocks_with_holders(market, matching, holder, p, a)) out.push_back({p, a});
    }
  }
  return out;
}

bool blocks(const Market& market, const Matching& matching, const BlockingPair& pair) {
  if (pair.player < 0 || pair.player >= market.n_players() || pair.arm < 0 || pair.arm >= market.n_arms()) return false;
  return blocks_with_holders(market, matching, arm_holders(market, matching), pair.player, pair.arm);
}

bool is_stable(const Market& market, const AttemptProfile& profile) {
  if (!is_matching(market, profile)) return false;
  const Eigen::VectorXi holder = arm_holders(market, profile);
  for (PlayerId p = 0; p < market.n_players(); ++p) {
    for (ArmId a = 0; a < market.n_arms(); ++a) {
      if (blocks_with_holders(market, profile, holder, p, a)) return false;
    }
  }
  return true;
}

Matching deferred_acceptance(const Market& market, ProposingSide side) {
  const int n = market.n_players();
  const int l = market.n_arms();
  Matching match = Matching::Constant(n, kNoArm);

  if (side == ProposingSide::kPlayers) {
    std::vector<std::vector<ArmId>> ranking(n);
    for (PlayerId p = 0; p < n; ++p) ranking[p] = player_ranking(market, p);
    std::vector<int> next(n, 0);
    Eigen::VectorXi holder = Eigen::VectorXi::Constant(l, -1);
    std::deque<PlayerId> free;
    for (PlayerId p = 0; p < n; ++p) free.push_back(p);
    while (!free.empty()) {
      const PlayerId p = free.front();
      free.pop_front();
      if (next[p] >= l) continue;
      const ArmId a = ranking[p][next[p]++];
      if (holder(a) < 0) {
        holder(a) = p;
      } else if (market.arm_prefers(a, p, holder(a))) {
        free.push_back(holder(a));
        holder(a) = p;
      } else {
        free.push_back(p);
      }
    }
    for (ArmId a = 0; a < l; ++a) {
      if (holder(a) >= 0) match(holder(a)) = a;
    }
    return match;
  }

  std::vector<int> next(l, 0);
  std::deque<ArmId> free;
  for (ArmId a = 0; a < l; ++a) free.push_back(a);
  while (!free.empty()) {
    const ArmId a = free.front();
    free.pop_front();
    const auto& list = market.arm_prefs()[a];
    if (next[a] >= static_cast<int>(list.size())) continue;
    const PlayerId p = list[next[a]++];
    if (match(p) == kNoArm) {
      match(p) = a;
    } else if (market.player_prefers(p, a, match(p))) {
      free.push_back(match(p));
      match(p) = a;
    } else {
      free.push_back(a);
    }
  }
  return match;
}

StableSet enumerate_stable(const Market& market) {
  const int n = market.n_players();
  const int l = market.n_arms();
  if (l > kMaxEnumerationArms) {
    throw std::invalid_argument("market too large for enumeration: " + std::to_string(l) + " arms (max " +
                                std::to_string(kMaxEnumerationArms) + ")");
  }

  StableSet out;
  Matching current = Matching::Constant(n, kNoArm);
  std::vector<bool> used(l, false);
  // Players assigned in index order, arms tried in index order, so the
  // output is in lexicographic order of the assignment vector.
  auto recurse = [&](auto&& self, PlayerId p) -> void {
    if (p == n) {
      if (is_stable(market, current)) out.matchings.push_back(current);
      return;
    }
    for (ArmId a = 0; a < l; ++a) {
      if (used[a]) continue;
      used[a] = true;
      current(p) = a;
      self(self, p + 1);
      used[a] = false;
    }
    current(p) = kNoArm;
  };
  recurse(recurse, 0);

  out.optimal_match = Matching::Constant(n, kNoArm);
  out.pessimal_match = Matching::Constant(n, kNoArm);
  for (const Matching& m : out.matchings) {
    for (PlayerId p = 0; p < n; ++p) {
      if (out.optimal_match(p) == kNoArm || market.player_prefers(p, m(p), out.optimal_match(p))) out.optimal_match(p) = m(p);
      if (out.pessimal_match(p) == kNoArm || market.player_prefers(p, out.pessimal_match(p), m(p))) out.pessimal_match(p) = m(p);
    }
  }
  return out;
}

std::vector<BlockingPair> player_consistent_blocking_pairs(const Market& market, const Matching& matching) {
  std::vector<BlockingPair> out;
  for (const BlockingPair& bp : blocking_pairs(market, matching)) {
    if (!out.empty() && out.back().player == bp.player) {
      if (market.player_prefers(bp.player, bp.arm, out.back().arm)) out.back().arm = bp.arm;
    } else {
      out.push_back(bp);
    }
  }
  return out;
}

AttemptProfile resolve_blocking_pair(const Market& market, const AttemptProfile& profile, const BlockingPair& pair) {
  if (!blocks(market, induced_matching(market, profile), pair)) {
    throw std::invalid_argument("pair (" + std::to_string(pair.player) + ", " + std::to_string(pair.arm) +
                                ") does not block the induced matching");
  }
  AttemptProfile next = profile;
  next(pair.player) = pair.arm;
  return next;
}

}  // namespace caucb
