#ifndef CAUCB_METRICS_HPP
#define CAUCB_METRICS_HPP

#include <vector>

#include <Eigen/Dense>

#include "caucb/engine.hpp"
#include "caucb/market.hpp"
#include "caucb/stable_matching.hpp"

namespace caucb {

/// Cumulative regret, one row per round and one column per player.
struct RegretSeries {
  Eigen::MatrixXd cumulative;

  Eigen::VectorXd at_horizon() const { return cumulative.row(cumulative.rows() - 1).transpose(); }
};

/// Regret against a per-player baseline arm using true means: the round-t
/// increment is mean(baseline) - mean(pulled), an unmatched round counting
/// as mean 0.
RegretSeries stable_regret(const Trace& trace, const Market& market, const Matching& baseline);

inline RegretSeries pessimal_regret(const Trace& trace, const Market& market, const Matching& pessimal) {
  return stable_regret(trace, market, pessimal);
}

inline RegretSeries optimal_regret(const Trace& trace, const Market& market, const Matching& optimal) {
  return stable_regret(trace, market, optimal);
}

/// Same baseline, but charged against the noisy rewards actually observed.
RegretSeries realized_regret(const Trace& trace, const Market& market, const Matching& baseline);

struct StabilitySeries {
  Eigen::VectorXi unstable;    // 1 where the attempt profile is not a stable matching
  Eigen::VectorXd cumulative;  // running sum of `unstable`

  double total() const { return cumulative.size() ? cumulative(cumulative.size() - 1) : 0.0; }
};

/// Instability of each round's attempt profile, tested directly for
/// injectivity and blocking pairs.
StabilitySeries instability(const Trace& trace, const Market& market);

/// Same, via membership in an enumerated stable set.
StabilitySeries instability(const Trace& trace, const Market& market, const StableSet& stable_set);

struct EventCounters {
  // mistaken_pulls[i](j, k): rounds where mean(i,j) < mean(i,k), the UCB of
  // j strictly exceeded that of k, and player i pulled j.
  std::vector<Eigen::MatrixXi> mistaken_pulls;
  Eigen::VectorXi conflict_losses;
};

/// Replays each player's statistics from the trace's pulls and rewards.
EventCounters count_events(const Trace& trace, const Market& market);

/// Number of contested arms in each round.
Eigen::VectorXi conflicts_per_round(const Trace& trace, const Market& market);

struct SeriesStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;  // population standard deviation
};

/// Pointwise mean and standard deviation across replications. Throws
/// std::invalid_argument on an empty list or mismatched lengths.
SeriesStats aggregate(const std::vector<Eigen::VectorXd>& series);

/// Per-round maximum across players.
inline Eigen::VectorXd max_over_players(const RegretSeries& regret) { return regret.cumulative.rowwise().maxCoeff(); }

}  // namespace caucb

#endif  // CAUCB_METRICS_HPP
