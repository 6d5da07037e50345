#ifndef CAUCB_MARKET_HPP
#define CAUCB_MARKET_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "caucb/rng.hpp"

namespace caucb {

using PlayerId = int;
using ArmId = int;

/// Marker for "no arm" in pulls maps and matchings.
inline constexpr ArmId kNoArm = -1;

/// Two-sided market: players learn arm means, arms rank players.
///
/// `mean_rewards(i, j)` is player i's expected reward from arm j.
/// `arm_prefs[j]` lists players most-preferred first. The constructor
/// never rejects a malformed market; call validate() for that.
class Market {
 public:
  Market() = default;
  Market(Eigen::MatrixXd mean_rewards, std::vector<std::vector<PlayerId>> arm_prefs);

  int n_players() const { return static_cast<int>(mean_rewards_.rows()); }
  int n_arms() const { return static_cast<int>(mean_rewards_.cols()); }

  const Eigen::MatrixXd& mean_rewards() const { return mean_rewards_; }
  double mean(PlayerId p, ArmId a) const { return mean_rewards_(p, a); }
  const std::vector<std::vector<PlayerId>>& arm_prefs() const { return arm_prefs_; }

  /// Position of player p in arm a's list (0 = most preferred). Players
  /// missing from a malformed list get n_players().
  int arm_rank(ArmId a, PlayerId p) const { return arm_rank_(a, p); }

  /// True iff arm a strictly prefers player p to player q.
  bool arm_prefers(ArmId a, PlayerId p, PlayerId q) const { return arm_rank_(a, p) < arm_rank_(a, q); }

  /// True iff player p strictly prefers arm a to arm b. kNoArm is worst.
  bool player_prefers(PlayerId p, ArmId a, ArmId b) const {
    if (a == kNoArm) return false;
    if (b == kNoArm) return true;
    return mean_rewards_(p, a) > mean_rewards_(p, b);
  }

  bool operator==(const Market& other) const {
    return mean_rewards_ == other.mean_rewards_ && arm_prefs_ == other.arm_prefs_;
  }

 private:
  Eigen::MatrixXd mean_rewards_;
  std::vector<std::vector<PlayerId>> arm_prefs_;
  Eigen::MatrixXi arm_rank_;
};

/// Every violated market invariant, one message each. Empty iff valid.
std::vector<std::string> validate(const Market& market);

/// Arms sorted by descending mean for player p.
std::vector<ArmId> player_ranking(const Market& market, PlayerId p);

/// Whether all arms share one preference list over players.
bool is_globally_ranked(const Market& market);

/// Minimum pairwise gap between any player's means.
double min_gap(const Market& market);

/// Uniform ordinal preferences on both sides; each player's means are a
/// random permutation of 1..l. Throws std::invalid_argument if n > l.
Market gen_uniform(int n, int l, Rng& rng);

/// Random-utility market: utility of arm k for player i is
/// beta * x_k + eps_{i,k}, x_k ~ U(0,1), eps ~ Logistic(0,1); means are
/// the ranks 1..l of those utilities. Arm preferences are uniform.
/// If `arm_quality` is non-null it receives the shared x_k draws.
Market gen_correlated(int n, int l, double beta, Rng& rng, Eigen::VectorXd* arm_quality = nullptr);

}  // namespace caucb

#endif  // CAUCB_MARKET_HPP
