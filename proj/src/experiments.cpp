#include "caucb/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <thread>

namespace caucb {

namespace {

// Stream index reserved for market generation; engine streams use 0..N.
constexpr std::uint64_t kMarketStream = 1ULL << 40;

constexpr std::uint64_t kPresetSeedBase = 0x5eedca0cb0000001ULL;

CellSpec generated_cell(std::string label, std::map<std::string, double> params, MarketSource source) {
  CellSpec cell;
  cell.label = std::move(label);
  cell.params = std::move(params);
  cell.source = std::move(source);
  cell.config.lambda = 0.1;
  cell.config.noise_sigma = 1.0;
  cell.config.horizon = 5000;
  cell.replications = 10;
  return cell;
}

CellSpec explicit_cell(Market market) {
  CellSpec cell;
  cell.label = "main";
  cell.source.generator = MarketGenerator::kExplicit;
  cell.source.n_players = market.n_players();
  cell.source.n_arms = market.n_arms();
  cell.source.market = std::move(market);
  return cell;
}

std::string format_param(double v) {
  std::string s = std::to_string(v);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

}  // namespace

Market example1_market() {
  Eigen::MatrixXd means(2, 2);
  means << 2, 1,
           2, 1;
  return Market(means, {{0, 1}, {1, 0}});
}

Market example3_market() {
  Eigen::MatrixXd means(3, 3);
  means << 1, 2, 3,   // p1: a3 > a2 > a1
           3, 1, 2,   // p2: a1 > a3 > a2
           2, 3, 1;   // p3: a2 > a1 > a3
  return Market(means, {{2, 1, 0}, {0, 2, 1}, {1, 0, 2}});
}

Market example4_market(double p3_a1, double p3_a2, double p3_a3) {
  Eigen::MatrixXd means(3, 3);
  means << 3, 1, 2,   // p1: a1 > a3 > a2
           2, 3, 1,   // p2: a2 > a1 > a3
           p3_a1, p3_a2, p3_a3;
  return Market(means, {{1, 0, 2}, {2, 1, 0}, {2, 0, 1}});
}

AttemptProfile example3_cycle_start() {
  AttemptProfile m(3);
  m << 1, 0, 1;
  return m;
}

const std::vector<double>& hetero_beta_grid() {
  static const std::vector<double> grid{0.0, 1.0, 2.0, 5.0, 10.0};
  return grid;
}

std::vector<std::string> preset_names() { return {"size_sweep", "hetero_sweep", "example1", "example3", "deviator"}; }

ExperimentSpec preset(std::string_view name) {
  ExperimentSpec spec;
  spec.name = std::string(name);
  spec.seed_base = kPresetSeedBase;

  if (name == "size_sweep") {
    for (int n : {5, 10, 15, 20}) {
      MarketSource src{MarketGenerator::kUniform, n, n, 0.0, std::nullopt};
      spec.cells.push_back(generated_cell("N" + std::to_string(n), {{"N", n}}, src));
    }
  } else if (name == "hetero_sweep") {
    for (double beta : hetero_beta_grid()) {
      MarketSource src{MarketGenerator::kCorrelated, 10, 10, beta, std::nullopt};
      spec.cells.push_back(generated_cell("beta" + format_param(beta), {{"beta", beta}}, src));
    }
  } else if (name == "example1") {
    CellSpec cell = explicit_cell(example1_market());
    cell.policies.assign(2, AgentPolicy::ca_ucb());
    cell.config.lambda = 0.0;
    cell.config.horizon = 100;
    cell.config.initial_attempts = AttemptProfile::Zero(2);
    spec.cells.push_back(std::move(cell));
  } else if (name == "example3") {
    CellSpec cell = explicit_cell(example3_market());
    cell.policies.assign(3, AgentPolicy::oracle_rank());
    cell.config.lambda = 0.0;
    cell.config.horizon = 100;
    cell.config.initial_attempts = example3_cycle_start();
    spec.cells.push_back(std::move(cell));
  } else if (name == "deviator") {
    CellSpec cell = explicit_cell(example4_market());
    cell.policies = {AgentPolicy::ca_ucb(), AgentPolicy::ca_ucb(), AgentPolicy::scripted_deviator()};
    cell.config.lambda = 0.1;
    cell.config.horizon = 9999;
    cell.replications = 10;
    spec.cells.push_back(std::move(cell));
  } else {
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
  }
  return spec;
}

std::uint64_t replication_seed(const ExperimentSpec& spec, const CellSpec& cell, int replication) {
  const std::string key = spec.name + "/" + cell.label + "/" + std::to_string(replication);
  return splitmix64(spec.seed_base ^ fnv1a(key));
}

Market materialize_market(const MarketSource& source, std::uint64_t seed) {
  Rng rng = make_stream(seed, kMarketStream);
  switch (source.generator) {
    case MarketGenerator::kUniform:
      return gen_uniform(source.n_players, source.n_arms, rng);
    case MarketGenerator::kCorrelated:
      return gen_correlated(source.n_players, source.n_arms, source.beta, rng);
    case MarketGenerator::kExplicit:
      if (!source.market) throw std::invalid_argument("explicit market source without a market");
      return *source.market;
  }
  throw std::logic_error("unhandled market generator");
}

ReplicationResult run_replication(const ExperimentSpec& spec, const CellSpec& cell, int replication) {
  ReplicationResult out;
  out.replication = replication;
  out.seed = replication_seed(spec, cell, replication);
  out.market = materialize_market(cell.source, out.seed);

  std::vector<AgentPolicy> policies = cell.policies;
  if (policies.empty()) policies.assign(out.market.n_players(), AgentPolicy::ca_ucb());
  SimulationConfig config = cell.config;
  config.seed = out.seed;

  out.trace = run(out.market, policies, config);
  out.optimal_match = deferred_acceptance(out.market, ProposingSide::kPlayers);
  out.pessimal_match = deferred_acceptance(out.market, ProposingSide::kArms);
  out.pessimal_regret = pessimal_regret(out.trace, out.market, out.pessimal_match);
  out.optimal_regret = optimal_regret(out.trace, out.market, out.optimal_match);
  out.realized_pessimal_regret = realized_regret(out.trace, out.market, out.pessimal_match);
  out.stability = instability(out.trace, out.market);
  out.conflicts = conflicts_per_round(out.trace, out.market);
  return out;
}

CellResult run_cell(const ExperimentSpec& spec, const CellSpec& cell, int threads) {
  CellResult out;
  out.label = cell.label;
  out.params = cell.params;
  out.replications.resize(cell.replications);

  const int workers = std::clamp(threads, 1, std::max(1, cell.replications));
  if (workers == 1) {
    for (int r = 0; r < cell.replications; ++r) out.replications[r] = run_replication(spec, cell, r);
    return out;
  }

  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(cell.replications);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int r = next++; r < cell.replications; r = next++) {
        try {
          out.replications[r] = run_replication(spec, cell, r);
        } catch (...) {
          errors[r] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, int threads) {
  ExperimentResult out;
  out.name = spec.name;
  for (const CellSpec& cell : spec.cells) out.cells.push_back(run_cell(spec, cell, threads));
  return out;
}

Eigen::VectorXd mean_max_player_regret(const CellResult& cell) {
  std::vector<Eigen::VectorXd> series;
  for (const auto& rep : cell.replications) series.push_back(max_over_players(rep.pessimal_regret));
  return aggregate(series).mean;
}

Eigen::VectorXd mean_cumulative_instability(const CellResult& cell) {
  std::vector<Eigen::VectorXd> series;
  for (const auto& rep : cell.replications) series.push_back(rep.stability.cumulative);
  return aggregate(series).mean;
}

}  // namespace caucb
