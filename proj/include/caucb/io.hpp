#ifndef CAUCB_IO_HPP
#define CAUCB_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "caucb/engine.hpp"
#include "caucb/experiments.hpp"
#include "caucb/market.hpp"

namespace caucb {

/// Malformed input file or flag value.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Well-formed input that violates a market or config invariant.
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Failure reading or writing a file.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Market JSON: {"n_players", "n_arms", "mean_rewards": [[...]], "arm_prefs": [[...]]}.
// Means may be JSON numbers or decimal strings such as "0.1".
Market market_from_json(const nlohmann::json& j);
nlohmann::json market_to_json(const Market& market);

/// Parses and validates; ParseError on bad JSON or shape, InvariantError
/// when validate() reports violations.
Market load_market(const std::filesystem::path& path);
void save_market(const Market& market, const std::filesystem::path& path);

/// Policy names: ca_ucb, oracle_rank, deviator, fixed:<arm>.
AgentPolicy parse_policy(std::string_view name);
std::string policy_name(const AgentPolicy& policy);

/// Experiment spec file: a single cell object, or {"name", "seed_base",
/// "cells": [cell...]}. Cell keys: label, market ({"generator": "uniform"
/// | "correlated", "n", "l", "beta"} or {"file": path} or an inline market),
/// policies, lambda, horizon, sigma, replications, initial_attempts.
/// Relative market files resolve against `base_dir`.
ExperimentSpec spec_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

inline constexpr std::string_view kCsvHeader =
    "experiment,cell,replication,seed,t,player,attempt,pull,delay,reward,"
    "regret_pessimal_cum,regret_optimal_cum,unstable,conflicts_round";

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// Long-format rows (one per player per round) for every replication of a
/// cell. Writes the header first when `with_header` is set.
void write_cell_csv(std::ostream& out, std::string_view experiment, const CellResult& cell, bool with_header = true);

/// Stable set (when enumerable), optimal/pessimal matches and final
/// regrets of one replication.
nlohmann::json replication_summary(const ReplicationResult& rep);

/// {"stable_matchings", "optimal_match", "pessimal_match", "enumerated", "note"?}.
nlohmann::json stable_report(const Market& market);

/// Writes `contents` to `path` through a temporary file so a failed run
/// leaves nothing behind. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace caucb

#endif  // CAUCB_IO_HPP
