#include "caucb/market.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace caucb {

Market::Market(Eigen::MatrixXd mean_rewards, std::vector<std::vector<PlayerId>> arm_prefs)
    : mean_rewards_(std::move(mean_rewards)), arm_prefs_(std::move(arm_prefs)) {
  const int n = n_players();
  arm_rank_ = Eigen::MatrixXi::Constant(n_arms(), n, n);
  for (int a = 0; a < n_arms() && a < static_cast<int>(arm_prefs_.size()); ++a) {
    const auto& list = arm_prefs_[a];
    for (int pos = static_cast<int>(list.size()) - 1; pos >= 0; --pos) {
      if (list[pos] >= 0 && list[pos] < n) arm_rank_(a, list[pos]) = pos;
    }
  }
}

std::vector<std::string> validate(const Market& market) {
  std::vector<std::string> out;
  const int n = market.n_players();
  const int l = market.n_arms();
  auto say = [&out](auto&&... parts) {
    std::ostringstream os;
    (os << ... << parts);
    out.push_back(os.str());
  };

  if (n == 0 || l == 0) say("market has no players or no arms");
  if (n > l) say("N > L: ", n, " players but only ", l, " arms");

  for (int p = 0; p < n; ++p) {
    for (int a = 0; a < l; ++a) {
      const double mu = market.mean(p, a);
      if (!std::isfinite(mu) || mu <= 0.0) say("non-positive mean for player ", p, " arm ", a, ": ", mu);
    }
    for (int a = 0; a < l; ++a) {
      for (int b = a + 1; b < l; ++b) {
        if (market.mean(p, a) == market.mean(p, b)) say("duplicate means for player ", p, " on arms ", a, " and ", b);
      }
    }
  }

  const auto& prefs = market.arm_prefs();
  if (static_cast<int>(prefs.size()) != l) {
    say("arm_prefs has ", prefs.size(), " lists for ", l, " arms");
  }
  for (std::size_t a = 0; a < prefs.size(); ++a) {
    std::vector<PlayerId> sorted = prefs[a];
    std::sort(sorted.begin(), sorted.end());
    std::vector<PlayerId> expected(n);
    std::iota(expected.begin(), expected.end(), 0);
    if (sorted != expected) say("arm_prefs[", a, "] is not a permutation of all players");
  }
  return out;
}

std::vector<ArmId> player_ranking(const Market& market, PlayerId p) {
  std::vector<ArmId> arms(market.n_arms());
  std::iota(arms.begin(), arms.end(), 0);
  std::stable_sort(arms.begin(), arms.end(), [&](ArmId a, ArmId b) { return market.mean(p, a) > market.mean(p, b); });
  return arms;
}

bool is_globally_ranked(const Market& market) {
  const auto& prefs = market.arm_prefs();
  return std::all_of(prefs.begin(), prefs.end(), [&](const auto& list) { return list == prefs.front(); });
}

double min_gap(const Market& market) {
  double gap = std::numeric_limits<double>::infinity();
  for (int p = 0; p < market.n_players(); ++p) {
    Eigen::VectorXd row = market.mean_rewards().row(p).transpose();
    std::sort(row.begin(), row.end());
    for (Eigen::Index k = 1; k < row.size(); ++k) gap = std::min(gap, row(k) - row(k - 1));
  }
  return gap;
}

namespace {

void check_sizes(int n, int l) {
  if (n < 1 || l < 1) throw std::invalid_argument("market needs at least one player and one arm");
  if (n > l) throw std::invalid_argument("market needs n <= l, got n=" + std::to_string(n) + " l=" + std::to_string(l));
}

std::vector<std::vector<PlayerId>> uniform_arm_prefs(int n, int l, Rng& rng) {
  std::vector<std::vector<PlayerId>> prefs(l, std::vector<PlayerId>(n));
  for (auto& list : prefs) {
    std::iota(list.begin(), list.end(), 0);
    std::shuffle(list.begin(), list.end(), rng);
  }
  return prefs;
}

}  // namespace

Market gen_uniform(int n, int l, Rng& rng) {
  check_sizes(n, l);
  Eigen::MatrixXd means(n, l);
  std::vector<int> ranks(l);
  for (int p = 0; p < n; ++p) {
    std::iota(ranks.begin(), ranks.end(), 1);
    std::shuffle(ranks.begin(), ranks.end(), rng);
    for (int a = 0; a < l; ++a) means(p, a) = ranks[a];
  }
  return Market(std::move(means), uniform_arm_prefs(n, l, rng));
}

Market gen_correlated(int n, int l, double beta, Rng& rng, Eigen::VectorXd* arm_quality) {
  check_sizes(n, l);
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be finite and >= 0");

  Eigen::VectorXd x(l);
  for (int a = 0; a < l; ++a) x(a) = uniform_open(rng);

  Eigen::MatrixXd means(n, l);
  Eigen::VectorXd utility(l);
  for (int p = 0; p < n; ++p) {
    for (int a = 0; a < l; ++a) {
      const double u = uniform_open(rng);
      utility(a) = beta * x(a) + std::log(u / (1.0 - u));
    }
    // Rank statistic #{b : u_b <= u_a}, ties resolved by arm index.
    for (int a = 0; a < l; ++a) {
      int rank = 0;
      for (int b = 0; b < l; ++b) {
        if (utility(b) < utility(a) || (utility(b) == utility(a) && b <= a)) ++rank;
      }
      means(p, a) = rank;
    }
  }
  if (arm_quality) *arm_quality = x;
  return Market(std::move(means), uniform_arm_prefs(n, l, rng));
}

}  // namespace caucb
