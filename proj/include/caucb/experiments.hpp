#ifndef CAUCB_EXPERIMENTS_HPP
#define CAUCB_EXPERIMENTS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "caucb/engine.hpp"
#include "caucb/market.hpp"
#include "caucb/metrics.hpp"
#include "caucb/stable_matching.hpp"

namespace caucb {

enum class MarketGenerator { kUniform, kCorrelated, kExplicit };

struct MarketSource {
  MarketGenerator generator = MarketGenerator::kUniform;
  int n_players = 0;
  int n_arms = 0;
  double beta = 0.0;             // kCorrelated only
  std::optional<Market> market;  // kExplicit only
};

/// One parameter cell of an experiment. Each replication draws a fresh
/// market from `source` (unless explicit) and simulates it once.
struct CellSpec {
  std::string label;
  std::map<std::string, double> params;
  MarketSource source;
  std::vector<AgentPolicy> policies;  // empty: CA-UCB for every player
  SimulationConfig config;            // config.seed is ignored; see replication_seed()
  int replications = 1;
};

struct ExperimentSpec {
  std::string name;
  std::uint64_t seed_base = 0;
  std::vector<CellSpec> cells;
};

// Hand-built counterexample markets (0-based players and arms).

/// Two players, two arms; both players prefer a1, a1 prefers p1, a2 prefers p2.
Market example1_market();
/// Three players whose conflict-avoiding dynamics cycle with period 3.
Market example3_market();
/// Three-player market with a unique stable matching that p3 can beat
/// by deviating. p3's means (10, 1, 2) are parameters.
Market example4_market(double p3_a1 = 10.0, double p3_a2 = 1.0, double p3_a3 = 2.0);

/// The cycle configuration of example3: p1 and p3 on a2, p2 on a1.
AttemptProfile example3_cycle_start();

std::vector<std::string> preset_names();

/// Throws std::invalid_argument for an unknown name.
ExperimentSpec preset(std::string_view name);

/// Beta values of the heterogeneity sweep.
const std::vector<double>& hetero_beta_grid();

std::uint64_t replication_seed(const ExperimentSpec& spec, const CellSpec& cell, int replication);

/// The market used by one replication.
Market materialize_market(const MarketSource& source, std::uint64_t seed);

struct ReplicationResult {
  int replication = 0;
  std::uint64_t seed = 0;
  Market market;
  Matching optimal_match;
  Matching pessimal_match;
  Trace trace;
  RegretSeries pessimal_regret;
  RegretSeries optimal_regret;
  RegretSeries realized_pessimal_regret;
  StabilitySeries stability;
  Eigen::VectorXi conflicts;
};

struct CellResult {
  std::string label;
  std::map<std::string, double> params;
  std::vector<ReplicationResult> replications;
};

struct ExperimentResult {
  std::string name;
  std::vector<CellResult> cells;
};

ReplicationResult run_replication(const ExperimentSpec& spec, const CellSpec& cell, int replication);

/// Runs a single cell; replications fan out over up to `threads` workers
/// and come back in replication order.
CellResult run_cell(const ExperimentSpec& spec, const CellSpec& cell, int threads = 1);

ExperimentResult run_experiment(const ExperimentSpec& spec, int threads = 1);

/// Mean over replications of the per-round max-over-players pessimal regret.
Eigen::VectorXd mean_max_player_regret(const CellResult& cell);

/// Mean over replications of the cumulative unstable-round count.
Eigen::VectorXd mean_cumulative_instability(const CellResult& cell);

}  // namespace caucb

#endif  // CAUCB_EXPERIMENTS_HPP
