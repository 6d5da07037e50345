#include "caucb/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "caucb/stable_matching.hpp"

namespace caucb {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double parse_mean(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("mean reward '" + s + "' is not a decimal");
    return out;
  }
  throw ParseError("mean reward must be a number or decimal string");
}

template <typename T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json parse_json_file(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

json matching_to_json(const Matching& m) {
  json out = json::array();
  for (Eigen::Index p = 0; p < m.size(); ++p) out.push_back(m(p));
  return out;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace

Market market_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("market must be a JSON object");
  const int n = require<int>(j, "n_players");
  const int l = require<int>(j, "n_arms");
  if (n < 0 || l < 0) throw ParseError("negative market dimensions");
  const json& rows = j.contains("mean_rewards") ? j.at("mean_rewards") : throw ParseError("missing key 'mean_rewards'");
  if (!rows.is_array() || static_cast<int>(rows.size()) != n) throw ParseError("mean_rewards must have n_players rows");

  Eigen::MatrixXd means(n, l);
  for (int p = 0; p < n; ++p) {
    const json& row = rows.at(p);
    if (!row.is_array() || static_cast<int>(row.size()) != l) {
      throw ParseError("mean_rewards row " + std::to_string(p) + " must have n_arms entries");
    }
    for (int a = 0; a < l; ++a) means(p, a) = parse_mean(row.at(a));
  }

  auto prefs = require<std::vector<std::vector<PlayerId>>>(j, "arm_prefs");
  if (static_cast<int>(prefs.size()) != l) throw ParseError("arm_prefs must have n_arms lists");
  return Market(std::move(means), std::move(prefs));
}

json market_to_json(const Market& market) {
  json rows = json::array();
  for (int p = 0; p < market.n_players(); ++p) {
    json row = json::array();
    for (int a = 0; a < market.n_arms(); ++a) row.push_back(market.mean(p, a));
    rows.push_back(std::move(row));
  }
  return json{{"n_players", market.n_players()},
              {"n_arms", market.n_arms()},
              {"mean_rewards", std::move(rows)},
              {"arm_prefs", market.arm_prefs()}};
}

Market load_market(const fs::path& path) {
  Market market = market_from_json(parse_json_file(path));
  if (const auto problems = validate(market); !problems.empty()) {
    std::string msg = path.string() + ": invalid market";
    for (const auto& p : problems) msg += "\n  " + p;
    throw InvariantError(msg);
  }
  return market;
}

void save_market(const Market& market, const fs::path& path) { write_file_atomic(path, market_to_json(market).dump(2) + "\n"); }

AgentPolicy parse_policy(std::string_view name) {
  if (name == "ca_ucb") return AgentPolicy::ca_ucb();
  if (name == "oracle_rank") return AgentPolicy::oracle_rank();
  if (name == "deviator") return AgentPolicy::scripted_deviator();
  if (name.starts_with("fixed:")) {
    const std::string_view digits = name.substr(6);
    int arm = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), arm);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && arm >= 0) return AgentPolicy::fixed(arm);
  }
  throw ParseError("unknown policy '" + std::string(name) + "'");
}

std::string policy_name(const AgentPolicy& policy) {
  switch (policy.kind) {
    case PolicyKind::kCaUcb:
      return "ca_ucb";
    case PolicyKind::kOracleRank:
      return "oracle_rank";
    case PolicyKind::kScriptedDeviator:
      return "deviator";
    case PolicyKind::kFixedAction:
      return "fixed:" + std::to_string(policy.fixed_arm);
  }
  return "?";
}

namespace {

CellSpec cell_from_json(const json& j, const fs::path& base_dir, int index) {
  CellSpec cell;
  cell.label = j.value("label", "cell" + std::to_string(index));
  const json market = j.contains("market") ? j.at("market") : throw ParseError("cell needs a 'market' entry");
  if (market.contains("generator")) {
    const auto gen = require<std::string>(market, "generator");
    cell.source.n_players = require<int>(market, "n");
    cell.source.n_arms = market.value("l", cell.source.n_players);
    if (gen == "uniform") {
      cell.source.generator = MarketGenerator::kUniform;
    } else if (gen == "correlated") {
      cell.source.generator = MarketGenerator::kCorrelated;
      cell.source.beta = require<double>(market, "beta");
      cell.params["beta"] = cell.source.beta;
    } else {
      throw ParseError("unknown market generator '" + gen + "'");
    }
    cell.params["N"] = cell.source.n_players;
    cell.params["L"] = cell.source.n_arms;
    if (cell.source.n_players > cell.source.n_arms) throw InvariantError("generator needs n <= l");
  } else {
    Market m;
    if (market.contains("file")) {
      fs::path file = require<std::string>(market, "file");
      if (file.is_relative()) file = base_dir / file;
      m = load_market(file);
    } else {
      m = market_from_json(market);
      if (const auto problems = validate(m); !problems.empty()) throw InvariantError("invalid market: " + problems.front());
    }
    cell.source.generator = MarketGenerator::kExplicit;
    cell.source.n_players = m.n_players();
    cell.source.n_arms = m.n_arms();
    cell.source.market = std::move(m);
  }

  if (j.contains("policies")) {
    for (const auto& name : require<std::vector<std::string>>(j, "policies")) cell.policies.push_back(parse_policy(name));
    if (static_cast<int>(cell.policies.size()) != cell.source.n_players) {
      throw ParseError("policies must list one entry per player");
    }
  }
  cell.config.lambda = j.value("lambda", 0.1);
  cell.config.horizon = j.value("horizon", 5000L);
  cell.config.noise_sigma = j.value("sigma", 1.0);
  cell.replications = j.value("replications", 1);
  if (cell.replications < 1) throw InvariantError("replications must be >= 1");
  if (j.contains("initial_attempts")) {
    const auto init = require<std::vector<int>>(j, "initial_attempts");
    cell.config.initial_attempts = Eigen::Map<const Eigen::VectorXi>(init.data(), static_cast<Eigen::Index>(init.size()));
  }
  cell.params["lambda"] = cell.config.lambda;
  return cell;
}

}  // namespace

ExperimentSpec spec_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ParseError("experiment spec must be a JSON object");
  ExperimentSpec spec;
  try {
    spec.name = j.value("name", std::string("custom"));
    spec.seed_base = j.value("seed_base", std::uint64_t{0});
    if (j.contains("cells")) {
      int i = 0;
      for (const json& c : j.at("cells")) spec.cells.push_back(cell_from_json(c, base_dir, i++));
    } else {
      spec.cells.push_back(cell_from_json(j, base_dir, 0));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("experiment spec: ") + e.what());
  }
  if (spec.cells.empty()) throw ParseError("experiment spec has no cells");
  return spec;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_cell_csv(std::ostream& out, std::string_view experiment, const CellResult& cell, bool with_header) {
  if (with_header) out << kCsvHeader << '\n';
  std::string line;
  for (const ReplicationResult& rep : cell.replications) {
    const std::string prefix = std::string(experiment) + "," + cell.label + "," + std::to_string(rep.replication) + "," +
                               std::to_string(rep.seed) + ",";
    for (std::size_t r = 0; r < rep.trace.rounds.size(); ++r) {
      const RoundRecord& rec = rep.trace.rounds[r];
      const std::string tail = "," + std::to_string(rep.stability.unstable(r)) + "," + std::to_string(rep.conflicts(r)) + "\n";
      for (Eigen::Index p = 0; p < rec.attempts.size(); ++p) {
        line = prefix;
        line += std::to_string(rec.t) + "," + std::to_string(p) + "," + std::to_string(rec.attempts(p)) + "," +
                std::to_string(rec.pulls(p)) + "," + std::to_string(rec.delays(p)) + "," + format_double(rec.rewards(p)) +
                "," + format_double(rep.pessimal_regret.cumulative(r, p)) + "," +
                format_double(rep.optimal_regret.cumulative(r, p));
        line += tail;
        out << line;
      }
    }
  }
}

json stable_report(const Market& market) {
  json out;
  if (market.n_arms() <= kMaxEnumerationArms) {
    const StableSet set = enumerate_stable(market);
    json all = json::array();
    for (const Matching& m : set.matchings) all.push_back(matching_to_json(m));
    out["stable_matchings"] = std::move(all);
    out["optimal_match"] = matching_to_json(set.optimal_match);
    out["pessimal_match"] = matching_to_json(set.pessimal_match);
    out["enumerated"] = true;
  } else {
    const Matching opt = deferred_acceptance(market, ProposingSide::kPlayers);
    const Matching pes = deferred_acceptance(market, ProposingSide::kArms);
    json all = json::array({matching_to_json(opt)});
    if (opt != pes) all.push_back(matching_to_json(pes));
    out["stable_matchings"] = std::move(all);
    out["optimal_match"] = matching_to_json(opt);
    out["pessimal_match"] = matching_to_json(pes);
    out["enumerated"] = false;
    out["note"] = "more than " + std::to_string(kMaxEnumerationArms) +
                  " arms: listing only the player-optimal and player-pessimal stable matchings from deferred acceptance";
  }
  return out;
}

json replication_summary(const ReplicationResult& rep) {
  json out = stable_report(rep.market);
  out["replication"] = rep.replication;
  out["seed"] = rep.seed;
  out["final_regret_pessimal"] = vector_to_json(rep.pessimal_regret.at_horizon());
  out["final_regret_optimal"] = vector_to_json(rep.optimal_regret.at_horizon());
  out["final_regret_realized"] = vector_to_json(rep.realized_pessimal_regret.at_horizon());
  out["unstable_rounds"] = rep.stability.total();
  return out;
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << contents;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write failed for " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

}  // namespace caucb
