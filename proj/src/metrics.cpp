#include "caucb/metrics.hpp"

#include <stdexcept>

namespace caucb {

namespace {

template <typename Earned>
RegretSeries accumulate(const Trace& trace, const Market& market, const Matching& baseline, Earned earned) {
  const Eigen::Index rounds = static_cast<Eigen::Index>(trace.rounds.size());
  const int n = market.n_players();
  if (baseline.size() != n) throw std::invalid_argument("baseline must assign every player");
  Eigen::VectorXd target(n);
  for (PlayerId p = 0; p < n; ++p) target(p) = market.mean(p, baseline(p));

  RegretSeries out;
  out.cumulative.resize(rounds, n);
  Eigen::VectorXd running = Eigen::VectorXd::Zero(n);
  for (Eigen::Index r = 0; r < rounds; ++r) {
    const RoundRecord& rec = trace.rounds[r];
    for (PlayerId p = 0; p < n; ++p) running(p) += target(p) - earned(rec, p);
    out.cumulative.row(r) = running.transpose();
  }
  return out;
}

template <typename IsUnstable>
StabilitySeries tally(const Trace& trace, IsUnstable is_unstable) {
  const Eigen::Index rounds = static_cast<Eigen::Index>(trace.rounds.size());
  StabilitySeries out;
  out.unstable.resize(rounds);
  out.cumulative.resize(rounds);
  double sum = 0.0;
  for (Eigen::Index r = 0; r < rounds; ++r) {
    out.unstable(r) = is_unstable(trace.rounds[r].attempts) ? 1 : 0;
    sum += out.unstable(r);
    out.cumulative(r) = sum;
  }
  return out;
}

}  // namespace

RegretSeries stable_regret(const Trace& trace, const Market& market, const Matching& baseline) {
  return accumulate(trace, market, baseline, [&](const RoundRecord& rec, PlayerId p) {
    return rec.pulls(p) == kNoArm ? 0.0 : market.mean(p, rec.pulls(p));
  });
}

RegretSeries realized_regret(const Trace& trace, const Market& market, const Matching& baseline) {
  return accumulate(trace, market, baseline, [](const RoundRecord& rec, PlayerId p) { return rec.rewards(p); });
}

StabilitySeries instability(const Trace& trace, const Market& market) {
  return tally(trace, [&](const AttemptProfile& m) { return !is_stable(market, m); });
}

StabilitySeries instability(const Trace& trace, const Market&, const StableSet& stable_set) {
  return tally(trace, [&](const AttemptProfile& m) {
    for (const Matching& s : stable_set.matchings) {
      if (s == m) return false;
    }
    return true;
  });
}

EventCounters count_events(const Trace& trace, const Market& market) {
  const int n = market.n_players();
  const int l = market.n_arms();
  EventCounters out;
  out.mistaken_pulls.assign(n, Eigen::MatrixXi::Zero(l, l));
  out.conflict_losses = Eigen::VectorXi::Zero(n);

  std::vector<PlayerBanditState> replay(n, PlayerBanditState(l));
  Eigen::VectorXd ucb(l);
  for (const RoundRecord& rec : trace.rounds) {
    for (PlayerId p = 0; p < n; ++p) {
      const ArmId pulled = rec.pulls(p);
      if (pulled == kNoArm) {
        ++out.conflict_losses(p);
        continue;
      }
      for (ArmId a = 0; a < l; ++a) ucb(a) = ucb_value(replay[p], a, rec.t);
      for (ArmId k = 0; k < l; ++k) {
        if (market.mean(p, pulled) < market.mean(p, k) && ucb(pulled) > ucb(k)) ++out.mistaken_pulls[p](pulled, k);
      }
    }
    for (PlayerId p = 0; p < n; ++p) {
      if (rec.pulls(p) != kNoArm) replay[p].record_success(rec.pulls(p), rec.rewards(p));
    }
  }
  return out;
}

Eigen::VectorXi conflicts_per_round(const Trace& trace, const Market& market) {
  Eigen::VectorXi out(static_cast<Eigen::Index>(trace.rounds.size()));
  for (std::size_t r = 0; r < trace.rounds.size(); ++r) out(r) = count_conflicts(market, trace.rounds[r].attempts);
  return out;
}

SeriesStats aggregate(const std::vector<Eigen::VectorXd>& series) {
  if (series.empty()) throw std::invalid_argument("aggregate needs at least one series");
  const Eigen::Index len = series.front().size();
  Eigen::MatrixXd stacked(len, static_cast<Eigen::Index>(series.size()));
  for (std::size_t r = 0; r < series.size(); ++r) {
    if (series[r].size() != len) throw std::invalid_argument("aggregate: series lengths differ");
    stacked.col(r) = series[r];
  }
  SeriesStats out;
  out.mean = stacked.rowwise().mean();
  const Eigen::MatrixXd centered = stacked.colwise() - out.mean;
  out.stddev = (centered.array().square().rowwise().sum() / static_cast<double>(series.size())).sqrt();
  return out;
}

}  // namespace caucb
