#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "helpers.hpp"
#include "ipd/sfem.hpp"

using namespace ipd;
using ipd::testing::run_games;
using ipd::testing::run_trembling;

namespace {

void check_simplex(const SfemFit& f) {
  const double s = std::accumulate(f.weights.begin(), f.weights.end(), 0.0);
  CHECK(std::abs(s - 1.0) <= 1e-9);
  for (double w : f.weights) CHECK(w >= 0.0);
  for (const auto& r : f.responsibilities) {
    CHECK(std::abs(std::accumulate(r.begin(), r.end(), 0.0) - 1.0) <= 1e-9);
  }
}

void check_monotone(const SfemFit& f) {
  CHECK(f.monotone);
  for (std::size_t i = 1; i < f.log_likelihood_history.size(); ++i) {
    CHECK(f.log_likelihood_history[i] >=
          f.log_likelihood_history[i - 1] - 1e-9 * (1 + std::abs(f.log_likelihood_history[i - 1])));
  }
}

bool same_group(const SfemFit& f, const StrategyKind& a, const StrategyKind& b) {
  const auto ia = std::find(f.strategies.begin(), f.strategies.end(), a) - f.strategies.begin();
  const auto ib = std::find(f.strategies.begin(), f.strategies.end(), b) - f.strategies.begin();
  const int ga = f.degeneracy_group_id[static_cast<std::size_t>(ia)];
  return ga >= 0 && ga == f.degeneracy_group_id[static_cast<std::size_t>(ib)];
}

}  // namespace

TEST_CASE("likelihood of a single strategy") {
  SUBCASE("all matches") {
    const auto t = run_games("TFT", "RND", 1, 100, 1).front();
    CHECK(likelihood_of_strategy(t, Player::A, StrategyKind::tft(), 0.95) ==
          doctest::Approx(100 * std::log(0.95)).epsilon(1e-12));
  }
  SUBCASE("all mismatches") {
    const auto t = run_games("AC", "RND", 1, 100, 1).front();
    CHECK(likelihood_of_strategy(t, Player::A, StrategyKind::ad(), 0.95) ==
          doctest::Approx(100 * std::log(0.05)).epsilon(1e-12));
  }
  SUBCASE("partial matches") {
    auto t = run_games("GRIM", "RND", 1, 100, 2).front();
    for (int i : {3, 17, 40, 41, 99}) {
      auto& r = t.rounds[static_cast<std::size_t>(i)];
      r.action_a = r.action_a == Action::Cooperate ? Action::Defect : Action::Cooperate;
      std::tie(r.payoff_a, r.payoff_b) = payoff(r.action_a, r.action_b, PayoffMatrix{});
    }
    // GRIM's prescriptions depend only on the opponent, so flips are the only mismatches.
    const auto p = prescribe(StrategyKind::grim(), t, Player::A);
    int matches = 0;
    for (std::size_t i = 0; i < p.size(); ++i) matches += p[i] == t.rounds[i].action_a;
    REQUIRE(matches == 95);
    CHECK(likelihood_of_strategy(t, Player::A, StrategyKind::grim(), 0.95) ==
          doctest::Approx(95 * std::log(0.95) + 5 * std::log(0.05)).epsilon(1e-12));
  }
  SUBCASE("beta range") {
    const auto t = trace_from_actions("CC", "CC");
    CHECK_THROWS_AS(likelihood_of_strategy(t, Player::A, StrategyKind::ac(), 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(likelihood_of_strategy(t, Player::A, StrategyKind::ac(), 0.0),
                    std::invalid_argument);
  }
}

TEST_CASE("fit recovers noiseless always-defect") {
  const auto ts = run_games("AD", "URND:0.5", 100, 100, 7);
  const auto f = fit(ts, Player::A, SfemConfig{});
  CHECK(f.weight(StrategyKind::ad()) >= 0.99);
  CHECK(f.beta >= 0.99);
  CHECK(f.beta <= 1.0);
  CHECK(f.converged);
  check_simplex(f);
  check_monotone(f);
}

TEST_CASE("fit recovers TFT with 5% tremble") {
  const auto ts = run_trembling(StrategyKind::tft(), 0.05, "URND:0.5", 100, 100, 8);
  const auto f = fit(ts, Player::A, SfemConfig{});
  CHECK(f.weight(StrategyKind::tft()) >= 0.90);
  CHECK(f.beta >= 0.93);
  CHECK(f.beta <= 0.97);
  check_simplex(f);
  check_monotone(f);
}

TEST_CASE("all-cooperate histories form one degeneracy group") {
  const auto ts = run_games("AC", "AC", 30, 50, 9);
  const auto f = fit(ts, Player::A, SfemConfig{});
  REQUIRE(f.degeneracy_groups.size() == 1);
  CHECK(f.degeneracy_groups.front().size() == 4);
  CHECK(same_group(f, StrategyKind::ac(), StrategyKind::tft()));
  CHECK(same_group(f, StrategyKind::ac(), StrategyKind::grim()));
  CHECK(same_group(f, StrategyKind::ac(), StrategyKind::wsls()));
  CHECK_FALSE(same_group(f, StrategyKind::ac(), StrategyKind::ad()));
  const double group_weight = f.weight(StrategyKind::ac()) + f.weight(StrategyKind::tft()) +
                              f.weight(StrategyKind::grim()) + f.weight(StrategyKind::wsls());
  CHECK(group_weight >= 0.99);
  for (const auto& k : {StrategyKind::ac(), StrategyKind::tft(), StrategyKind::grim(),
                        StrategyKind::wsls()}) {
    CHECK(f.score(k) == 1.0);
  }
  check_simplex(f);
}

TEST_CASE("noiseless recovery of every catalog strategy") {
  for (const auto& kind : deterministic_catalog()) {
    INFO(to_string(kind));
    const auto ts = run_games(to_string(kind), "URND:0.5", 50, 100, 10);
    const auto f = fit(ts, Player::A, SfemConfig{});
    const auto idx = static_cast<std::size_t>(
        std::find(f.strategies.begin(), f.strategies.end(), kind) - f.strategies.begin());
    REQUIRE(f.degeneracy_group_id[idx] == -1);
    CHECK(f.weights[idx] >= 0.99);
    check_monotone(f);
  }
}

TEST_CASE("scores") {
  SUBCASE("pure AD") {
    const auto ts = run_games("AD", "URND:0.5", 40, 100, 11);
    CHECK(per_strategy_score(ts, Player::A, SfemConfig{})[1] == 1.0);
  }
  SUBCASE("half AD, half AC") {
    auto ts = run_games("AD", "URND:0.5", 50, 100, 12);
    const auto more = run_games("AC", "URND:0.7", 50, 100, 13);
    ts.insert(ts.end(), more.begin(), more.end());
    const auto f = fit(ts, Player::A, SfemConfig{});
    CHECK(std::abs(f.score(StrategyKind::ad()) - 0.5) <= 0.01);
    CHECK(std::abs(f.score(StrategyKind::ac()) - 0.5) <= 0.01);
    CHECK(f.score(StrategyKind::ad()) < 1.0);
    CHECK(std::abs(f.weight(StrategyKind::ad()) - 0.5) <= 0.01);
    double total = 0.0;
    for (double s : f.scores) {
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
      total += s;
    }
    CHECK(total >= 1.0);
  }
}

TEST_CASE("fit is invariant to catalog and trace order") {
  auto ts = run_trembling(StrategyKind::wsls(), 0.1, "URND:0.5", 30, 60, 14);
  const auto mix = run_trembling(StrategyKind::grim(), 0.1, "URND:0.6", 20, 60, 15);
  ts.insert(ts.end(), mix.begin(), mix.end());

  SfemConfig cfg;
  const auto base = fit(ts, Player::A, cfg);

  SfemConfig rev = cfg;
  std::reverse(rev.strategy_catalog.begin(), rev.strategy_catalog.end());
  std::vector<GameTrace> shuffled(ts.rbegin(), ts.rend());
  std::rotate(shuffled.begin(), shuffled.begin() + 7, shuffled.end());
  const auto other = fit(shuffled, Player::A, rev);

  for (const auto& k : cfg.strategy_catalog) {
    CHECK(std::abs(base.weight(k) - other.weight(k)) <= 1e-9);
  }
  CHECK(std::abs(base.beta - other.beta) <= 1e-9);
}

TEST_CASE("iteration cap reports non-convergence") {
  const auto ts = run_trembling(StrategyKind::tft(), 0.2, "RND", 20, 50, 16);
  SfemConfig cfg;
  cfg.max_em_iterations = 1;
  cfg.restarts = 1;
  const auto f = fit(ts, Player::A, cfg);
  CHECK_FALSE(f.converged);
  CHECK(f.iterations == 1);
  check_simplex(f);
}

TEST_CASE("configuration validation") {
  const auto ts = run_games("AD", "RND", 2, 5, 1);
  SfemConfig cfg;
  cfg.strategy_catalog.push_back(StrategyKind::rnd());
  CHECK_THROWS_AS(fit(ts, Player::A, cfg), ConfigError);
  cfg = {};
  cfg.strategy_catalog.clear();
  CHECK_THROWS_AS(fit(ts, Player::A, cfg), ConfigError);
  cfg = {};
  cfg.beta_floor = 0.5;
  CHECK_THROWS_AS(fit(ts, Player::A, cfg), ConfigError);
  cfg = {};
  cfg.strategy_catalog.push_back(StrategyKind::ad());
  CHECK_THROWS_AS(fit(ts, Player::A, cfg), ConfigError);
  CHECK_THROWS_AS(fit(std::vector<GameTrace>{}, Player::A, SfemConfig{}), std::invalid_argument);
}

TEST_CASE("beta respects the floor") {
  // Anti-TFT data: a floor above 0.5 keeps beta from flipping labels.
  auto ts = run_trembling(StrategyKind::tft(), 1.0, "RND", 20, 40, 17);
  SfemConfig cfg;
  cfg.strategy_catalog = {StrategyKind::tft()};
  const auto f = fit(ts, Player::A, cfg);
  CHECK(f.beta == cfg.beta_floor);
}
