// caucb: command-line front end for the conflict-avoiding UCB simulator.
//
//   caucb run MARKET.json --out trace.csv [--lambda --horizon --sigma --seed --policy P=NAME ...]
//   caucb experiment (--preset NAME | --spec FILE) --out-dir DIR
//   caucb stable MARKET.json
//   caucb repro

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "caucb/engine.hpp"
#include "caucb/experiments.hpp"
#include "caucb/io.hpp"
#include "caucb/metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kParse = 2, kInvariant = 3, kIo = 4 };

// Removes every file written so far unless commit() is called.
class OutputGuard {
 public:
  ~OutputGuard() {
    if (committed_) return;
    for (const auto& p : written_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }
  void write(const fs::path& path, const std::string& contents) {
    caucb::write_file_atomic(path, contents);
    written_.push_back(path);
  }
  void commit() { committed_ = true; }

 private:
  std::vector<fs::path> written_;
  bool committed_ = false;
};

std::vector<caucb::AgentPolicy> parse_policy_flags(const std::vector<std::string>& flags, int n_players) {
  std::vector<caucb::AgentPolicy> policies(n_players, caucb::AgentPolicy::ca_ucb());
  for (const auto& flag : flags) {
    const auto eq = flag.find('=');
    if (eq == std::string::npos) throw caucb::ParseError("--policy expects PLAYER=NAME, got '" + flag + "'");
    int player = -1;
    try {
      player = std::stoi(flag.substr(0, eq));
    } catch (const std::exception&) {
      throw caucb::ParseError("bad player index in '" + flag + "'");
    }
    if (player < 0 || player >= n_players) throw caucb::InvariantError("player index out of range in '" + flag + "'");
    policies[player] = caucb::parse_policy(flag.substr(eq + 1));
  }
  return policies;
}

struct RunArgs {
  std::string market_file;
  double lambda = 0.1;
  long horizon = 5000;
  double sigma = 1.0;
  std::uint64_t seed = 0;
  std::vector<std::string> policies;
  std::vector<int> initial;
  std::string out;
};

int cmd_run(const RunArgs& args) {
  const caucb::Market market = caucb::load_market(args.market_file);

  caucb::ExperimentSpec spec;
  spec.name = "run";
  caucb::CellSpec cell;
  cell.label = "main";
  cell.source.generator = caucb::MarketGenerator::kExplicit;
  cell.source.n_players = market.n_players();
  cell.source.n_arms = market.n_arms();
  cell.source.market = market;
  cell.policies = parse_policy_flags(args.policies, market.n_players());
  cell.config.lambda = args.lambda;
  cell.config.horizon = args.horizon;
  cell.config.noise_sigma = args.sigma;
  if (!args.initial.empty()) {
    cell.config.initial_attempts =
        Eigen::Map<const Eigen::VectorXi>(args.initial.data(), static_cast<Eigen::Index>(args.initial.size()));
  }
  try {
    caucb::check_config(market, cell.config);
  } catch (const std::invalid_argument& e) {
    throw caucb::InvariantError(e.what());
  }

  // The seed flag is the replication seed itself.
  caucb::ReplicationResult rep;
  {
    caucb::SimulationConfig config = cell.config;
    config.seed = args.seed;
    rep.seed = args.seed;
    rep.market = market;
    rep.trace = caucb::run(market, cell.policies, config);
    rep.optimal_match = caucb::deferred_acceptance(market, caucb::ProposingSide::kPlayers);
    rep.pessimal_match = caucb::deferred_acceptance(market, caucb::ProposingSide::kArms);
    rep.pessimal_regret = caucb::pessimal_regret(rep.trace, market, rep.pessimal_match);
    rep.optimal_regret = caucb::optimal_regret(rep.trace, market, rep.optimal_match);
    rep.realized_pessimal_regret = caucb::realized_regret(rep.trace, market, rep.pessimal_match);
    rep.stability = caucb::instability(rep.trace, market);
    rep.conflicts = caucb::conflicts_per_round(rep.trace, market);
  }
  caucb::CellResult result;
  result.label = cell.label;
  result.replications.push_back(std::move(rep));

  std::ostringstream csv;
  caucb::write_cell_csv(csv, spec.name, result);
  json sidecar = caucb::replication_summary(result.replications.front());
  json policies = json::array();
  for (const auto& p : cell.policies) policies.push_back(caucb::policy_name(p));
  sidecar["policies"] = std::move(policies);
  sidecar["lambda"] = args.lambda;
  sidecar["horizon"] = args.horizon;
  sidecar["sigma"] = args.sigma;

  const fs::path out = args.out;
  fs::path sidecar_path = out;
  sidecar_path.replace_extension(".json");
  if (sidecar_path == out) sidecar_path += ".json";

  OutputGuard guard;
  guard.write(out, csv.str());
  guard.write(sidecar_path, sidecar.dump(2) + "\n");
  guard.commit();
  return kOk;
}

struct ExperimentArgs {
  std::string preset;
  std::string spec_file;
  std::string out_dir;
  int threads = 1;
  int replications = 0;
  long horizon = 0;
};

int cmd_experiment(const ExperimentArgs& args) {
  caucb::ExperimentSpec spec;
  if (!args.preset.empty()) {
    try {
      spec = caucb::preset(args.preset);
    } catch (const std::invalid_argument& e) {
      throw caucb::ParseError(e.what());
    }
  } else {
    std::ifstream in(args.spec_file);
    if (!in) throw caucb::IoError("cannot open " + args.spec_file);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw caucb::ParseError(args.spec_file + ": " + e.what());
    }
    spec = caucb::spec_from_json(j, fs::path(args.spec_file).parent_path());
  }
  for (auto& cell : spec.cells) {
    if (args.replications > 0) cell.replications = args.replications;
    if (args.horizon > 0) cell.config.horizon = args.horizon;
  }

  const fs::path dir = args.out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw caucb::IoError("cannot create " + dir.string() + ": " + ec.message());

  OutputGuard guard;
  json manifest{{"experiment", spec.name}, {"cells", json::array()}};
  for (const auto& cell : spec.cells) {
    caucb::CellResult result;
    try {
      result = caucb::run_cell(spec, cell, args.threads);
    } catch (const std::invalid_argument& e) {
      throw caucb::InvariantError(e.what());
    }
    const std::string stem = spec.name + "_" + cell.label;
    std::ostringstream csv;
    caucb::write_cell_csv(csv, spec.name, result);
    guard.write(dir / (stem + ".csv"), csv.str());

    json reps = json::array();
    for (const auto& rep : result.replications) reps.push_back(caucb::replication_summary(rep));
    guard.write(dir / (stem + ".json"), reps.dump(2) + "\n");

    json params = json::object();
    for (const auto& [k, v] : cell.params) params[k] = v;
    manifest["cells"].push_back({{"label", cell.label},
                                 {"params", std::move(params)},
                                 {"files", json::array({stem + ".csv", stem + ".json"})}});
  }
  guard.write(dir / "manifest.json", manifest.dump(2) + "\n");
  guard.commit();
  return kOk;
}

int cmd_stable(const std::string& market_file) {
  const caucb::Market market = caucb::load_market(market_file);
  std::cout << caucb::stable_report(market).dump(2) << '\n';
  return kOk;
}

// Replays the three counterexamples and reports the behavior each is
// known for.
int cmd_repro() {
  bool all_ok = true;
  auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "[ok]   " : "[FAIL] ") << name << ": " << detail << '\n';
    all_ok = all_ok && ok;
  };

  {
    const auto spec = caucb::preset("example1");
    const auto rep = caucb::run_replication(spec, spec.cells.front(), 0);
    bool alternating = true;
    for (const auto& rec : rep.trace.rounds) {
      const int arm = (rec.t % 2 == 1) ? 0 : 1;
      alternating = alternating && rec.attempts(0) == arm && rec.attempts(1) == arm;
    }
    report("example1", alternating && rep.stability.total() == static_cast<double>(rep.trace.rounds.size()),
           "both players alternate a1/a2 for " + std::to_string(rep.trace.rounds.size()) + " rounds");
  }
  {
    const auto spec = caucb::preset("example3");
    const auto rep = caucb::run_replication(spec, spec.cells.front(), 0);
    bool periodic = true;
    for (std::size_t r = 3; r < rep.trace.rounds.size(); ++r) {
      periodic = periodic && rep.trace.rounds[r].attempts == rep.trace.rounds[r - 3].attempts;
    }
    report("example3", periodic && (rep.conflicts.array() >= 1).all(), "period-3 cycle with a conflict every round");
  }
  {
    const auto spec = caucb::preset("deviator");
    const auto result = caucb::run_cell(spec, spec.cells.front());
    double final_regret = 0.0;
    for (const auto& rep : result.replications) final_regret += rep.pessimal_regret.at_horizon()(2);
    final_regret /= static_cast<double>(result.replications.size());
    report("deviator", final_regret < 0.0,
           "p3 mean pessimal regret at T=" + std::to_string(spec.cells.front().config.horizon) + " is " +
               caucb::format_double(final_regret));
  }
  return all_ok ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conflict-avoiding UCB simulator for two-sided matching markets"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Simulate one market and write a per-round trace CSV plus a JSON sidecar");
  run->add_option("market", run_args.market_file, "Market JSON file")->required();
  run->add_option("--lambda", run_args.lambda, "Delay probability in [0,1)");
  run->add_option("--horizon", run_args.horizon, "Number of rounds");
  run->add_option("--sigma", run_args.sigma, "Reward noise standard deviation");
  run->add_option("--seed", run_args.seed, "Master seed");
  run->add_option("--policy", run_args.policies, "Per-player policy, PLAYER=NAME (ca_ucb, oracle_rank, deviator, fixed:ARM)");
  run->add_option("--initial", run_args.initial, "Round-1 attempted arm for each player")->delimiter(',');
  run->add_option("--out", run_args.out, "Output CSV path")->required();

  ExperimentArgs exp_args;
  auto* exp = app.add_subcommand("experiment", "Run a preset or spec file; one CSV per cell plus manifest.json");
  auto* preset_opt = exp->add_option("--preset", exp_args.preset, "size_sweep, hetero_sweep, example1, example3, deviator");
  auto* spec_opt = exp->add_option("--spec", exp_args.spec_file, "Experiment spec JSON");
  preset_opt->excludes(spec_opt);
  exp->add_option("--out-dir", exp_args.out_dir, "Output directory")->required();
  exp->add_option("--threads", exp_args.threads, "Worker threads for replications")->check(CLI::PositiveNumber);
  exp->add_option("--replications", exp_args.replications, "Override replications per cell");
  exp->add_option("--horizon", exp_args.horizon, "Override horizon");

  std::string stable_file;
  auto* stable = app.add_subcommand("stable", "Print the stable matchings of a market as JSON");
  stable->add_option("market", stable_file, "Market JSON file")->required();

  auto* repro = app.add_subcommand("repro", "Replay the counterexample presets and check their behavior");

  try {
    app.parse(argc, argv);
    if (exp->parsed() && exp_args.preset.empty() && exp_args.spec_file.empty()) {
      throw CLI::RequiredError("--preset or --spec");
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }

  try {
    if (run->parsed()) return cmd_run(run_args);
    if (exp->parsed()) return cmd_experiment(exp_args);
    if (stable->parsed()) return cmd_stable(stable_file);
    if (repro->parsed()) return cmd_repro();
  } catch (const caucb::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParse;
  } catch (const caucb::InvariantError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvariant;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvariant;
  } catch (const caucb::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
