#ifndef CAUCB_BANDIT_HPP
#define CAUCB_BANDIT_HPP

#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Dense>

#include "caucb/market.hpp"
#include "caucb/rng.hpp"

namespace caucb {

inline constexpr double kInfiniteUcb = std::numeric_limits<double>::infinity();

/// One player's reward statistics. Only successful pulls feed the
/// estimates; attempts are bookkeeping.
class PlayerBanditState {
 public:
  PlayerBanditState() = default;
  explicit PlayerBanditState(int n_arms)
      : success_counts_(Eigen::VectorXi::Zero(n_arms)),
        attempt_counts_(Eigen::VectorXi::Zero(n_arms)),
        reward_sums_(Eigen::VectorXd::Zero(n_arms)) {}

  int n_arms() const { return static_cast<int>(success_counts_.size()); }

  const Eigen::VectorXi& success_counts() const { return success_counts_; }
  const Eigen::VectorXi& attempt_counts() const { return attempt_counts_; }
  const Eigen::VectorXd& reward_sums() const { return reward_sums_; }
  ArmId last_attempt() const { return last_attempt_; }

  std::optional<double> empirical_mean(ArmId arm) const {
    if (success_counts_(arm) == 0) return std::nullopt;
    return reward_sums_(arm) / success_counts_(arm);
  }

  void record_attempt(ArmId arm) {
    ++attempt_counts_(arm);
    last_attempt_ = arm;
  }

  void record_success(ArmId arm, double reward) {
    ++success_counts_(arm);
    reward_sums_(arm) += reward;
  }

  bool operator==(const PlayerBanditState& o) const {
    return success_counts_ == o.success_counts_ && attempt_counts_ == o.attempt_counts_ &&
           reward_sums_ == o.reward_sums_ && last_attempt_ == o.last_attempt_;
  }

 private:
  Eigen::VectorXi success_counts_;
  Eigen::VectorXi attempt_counts_;
  Eigen::VectorXd reward_sums_;
  ArmId last_attempt_ = kNoArm;
};

/// Upper confidence bound mu_hat + sqrt(3 ln t / (2 n)) for round t >= 1,
/// where n is the success count accumulated before round t. Unsampled
/// arms get kInfiniteUcb.
inline double ucb_value(const PlayerBanditState& state, ArmId arm, double t) {
  const int n = state.success_counts()(arm);
  if (n == 0) return kInfiniteUcb;
  return state.reward_sums()(arm) / n + std::sqrt(3.0 * std::log(t) / (2.0 * n));
}

struct RewardModel {
  double noise_sigma = 1.0;
};

/// Gaussian(mean, sigma^2) draw; exactly `mean` when sigma is 0.
inline double sample_reward(const RewardModel& model, double mean, Rng& rng) {
  if (model.noise_sigma == 0.0) return mean;
  return std::normal_distribution<double>(mean, model.noise_sigma)(rng);
}

}  // namespace caucb

#endif  // CAUCB_BANDIT_HPP
