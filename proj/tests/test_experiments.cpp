#include <doctest.h>

#include <set>

#include "caucb/experiments.hpp"
#include "test_support.hpp"

using namespace caucb;

TEST_CASE("preset definitions") {
  CHECK(preset("example1").cells[0].config.lambda == 0.0);
  CHECK(preset("example1").cells[0].config.horizon == 100);
  CHECK(*preset("example1").cells[0].config.initial_attempts == vec({0, 0}));

  const auto sweep = preset("size_sweep");
  REQUIRE(sweep.cells.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& c = sweep.cells[i];
    CHECK(c.source.n_players == 5 * int(i + 1));
    CHECK(c.source.n_arms == c.source.n_players);
    CHECK(c.source.generator == MarketGenerator::kUniform);
    CHECK(c.replications == 10);
    CHECK(c.config.lambda == 0.1);
    CHECK(c.config.horizon == 5000);
    CHECK(c.config.noise_sigma == 1.0);
  }

  const auto hetero = preset("hetero_sweep");
  REQUIRE(hetero.cells.size() == hetero_beta_grid().size());
  CHECK(hetero.cells[4].source.beta == 10.0);
  CHECK(hetero.cells[0].source.n_players == 10);

  const auto dev = preset("deviator");
  CHECK(dev.cells[0].config.lambda > 0.0);
  CHECK(dev.cells[0].config.lambda < 0.25);
  CHECK(dev.cells[0].config.horizon == 9999);
  CHECK(dev.cells[0].policies[2] == AgentPolicy::scripted_deviator());

  CHECK_THROWS_AS(preset("nope"), std::invalid_argument);
}

TEST_CASE("deviator market satisfies the sign condition") {
  const Market m = example4_market();
  const double lambda = preset("deviator").cells[0].config.lambda;
  const double gain = m.mean(2, 0) - m.mean(2, 2);  // |mu(a1) - mu(pessimal a3)|
  const double unmatched = m.mean(2, 2);            // loss of an empty round
  CHECK((1.0 - 4.0 * lambda) / 3.0 * gain > 2.0 / 3.0 * unmatched);
  CHECK(enumerate_stable(m).matchings.size() == 1);
}

TEST_CASE("replication seeds are distinct and reproducible") {
  const auto a = preset("size_sweep");
  auto b = a;
  b.name = "other";
  std::set<std::uint64_t> seen;
  for (const auto& cell : a.cells)
    for (int r = 0; r < cell.replications; ++r) seen.insert(replication_seed(a, cell, r));
  CHECK(seen.size() == 40u);
  CHECK(replication_seed(a, a.cells[0], 3) == replication_seed(a, a.cells[0], 3));
  CHECK(replication_seed(a, a.cells[0], 3) != replication_seed(b, b.cells[0], 3));

  auto spec = preset("size_sweep");
  spec.cells.resize(1);
  spec.cells[0].replications = 2;
  spec.cells[0].config.horizon = 50;
  const auto r1 = run_replication(spec, spec.cells[0], 1);
  const auto r1b = run_replication(spec, spec.cells[0], 1);
  CHECK(r1.trace == r1b.trace);
  CHECK(r1.market == r1b.market);
  auto renamed = spec;
  renamed.name = "renamed";
  CHECK_FALSE(run_replication(renamed, renamed.cells[0], 1).trace == r1.trace);
}

TEST_CASE("threaded and sequential cells agree") {
  auto spec = preset("hetero_sweep");
  spec.cells.resize(1);
  spec.cells[0].config.horizon = 100;
  spec.cells[0].replications = 4;
  const CellResult seq = run_cell(spec, spec.cells[0], 1);
  const CellResult par = run_cell(spec, spec.cells[0], 3);
  REQUIRE(par.replications.size() == 4);
  for (int r = 0; r < 4; ++r) {
    CHECK(par.replications[r].replication == r);
    CHECK(par.replications[r].trace == seq.replications[r].trace);
  }
}

TEST_CASE("example1 experiment is unstable every round") {
  const auto result = run_experiment(preset("example1"));
  REQUIRE(result.cells.size() == 1);
  const auto& rep = result.cells[0].replications[0];
  CHECK((rep.stability.unstable.array() == 1).all());
  CHECK(rep.trace.rounds.size() == 100u);
}

TEST_CASE("cell reductions") {
  auto spec = preset("size_sweep");
  spec.cells.resize(1);
  spec.cells[0].replications = 3;
  spec.cells[0].config.horizon = 40;
  const CellResult cell = run_cell(spec, spec.cells[0]);
  const Eigen::VectorXd reg = mean_max_player_regret(cell);
  const Eigen::VectorXd inst = mean_cumulative_instability(cell);
  CHECK(reg.size() == 40);
  CHECK(inst.size() == 40);
  double expected = 0.0;
  for (const auto& rep : cell.replications) expected += rep.pessimal_regret.cumulative.row(39).maxCoeff();
  CHECK(reg(39) == doctest::Approx(expected / 3.0));
}
