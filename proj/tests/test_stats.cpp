#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "helpers.hpp"
#include "ipd/stats.hpp"

using namespace ipd;
using ipd::testing::run_games;

namespace {

CoopCurve constant_curve(const std::vector<double>& means) {
  CoopCurve c;
  for (std::size_t i = 0; i < means.size(); ++i) {
    c.per_round.push_back({static_cast<int>(i) + 1, means[i], means[i], means[i]});
  }
  return c;
}

// Direct count of cooperations, independent of the curve code.
double count_coop(const std::vector<GameTrace>& ts, Player p, std::size_t from = 0) {
  long c = 0, n = 0;
  for (const auto& t : ts) {
    for (std::size_t i = from; i < t.rounds.size(); ++i, ++n) {
      c += t.rounds[i].action_of(p) == Action::Cooperate;
    }
  }
  return static_cast<double>(c) / static_cast<double>(n);
}

}  // namespace

TEST_CASE("ci95 closed form") {
  const std::vector<double> xs{0, 1, 1, 1};
  const auto iv = ci95(xs);
  CHECK(iv.mean == doctest::Approx(0.75));
  CHECK(iv.high - iv.mean == doctest::Approx(1.96 * 0.5 / 2.0).epsilon(1e-12));
  CHECK(iv.mean - iv.low == doctest::Approx(0.49).epsilon(1e-12));
}

TEST_CASE("ci95 with zero variance collapses") {
  const std::vector<double> xs{0.5, 0.5, 0.5};
  const auto iv = ci95(xs);
  CHECK(iv.mean == 0.5);
  CHECK(iv.low == 0.5);
  CHECK(iv.high == 0.5);
}

TEST_CASE("ci95 clamps proportions") {
  const std::vector<double> xs{1.0, 1.0, 1.0, 0.0};
  const auto iv = ci95(xs, true);
  CHECK(iv.high == 1.0);
  CHECK(iv.low >= 0.0);
  const std::vector<double> ones(10, 1.0);
  CHECK(ci95(ones, true).high == 1.0);
}

TEST_CASE("ci95 needs two samples") {
  const std::vector<double> one{0.3};
  CHECK_THROWS_AS(ci95(one), std::invalid_argument);
  CHECK_THROWS_AS(ci95(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("bootstrap interval brackets the mean and is seeded") {
  std::vector<double> xs;
  for (int i = 0; i < 50; ++i) xs.push_back(i % 3 == 0 ? 1.0 : 0.0);
  const auto a = bootstrap_ci95(xs, 1000, 5, true);
  const auto b = bootstrap_ci95(xs, 1000, 5, true);
  CHECK(a.low == b.low);
  CHECK(a.high == b.high);
  CHECK(a.low <= a.mean);
  CHECK(a.mean <= a.high);
  // Roughly comparable to the normal interval.
  const auto n = ci95(xs, true);
  CHECK(std::abs((a.high - a.low) - (n.high - n.low)) < 0.1);
}

TEST_CASE("cooperation curve of always-cooperate and always-defect players") {
  const auto ac = run_games("AC", "RND", 100, 100, 1);
  const auto c1 = coop_prob_per_round(ac, Player::A);
  for (const auto& p : c1.per_round) CHECK(p.mean == 1.0);
  CHECK(c1.overall_mean == 1.0);

  const auto ad = run_games("AD", "RND", 100, 100, 1);
  CHECK(coop_prob_per_round(ad, Player::A).overall_mean == 0.0);
}

TEST_CASE("URND(0.3) subject cooperates 30% of the time") {
  const auto ts = run_games("URND:0.3", "TFT", 100, 100, 2024);
  const auto c = coop_prob_per_round(ts, Player::A);
  CHECK(c.overall_mean == doctest::Approx(count_coop(ts, Player::A)).epsilon(1e-12));
  CHECK(std::abs(c.overall_mean - 0.3) <= 0.01);
}

TEST_CASE("overall mean equals the mean of per-round means") {
  const auto ts = run_games("RND", "WSLS", 37, 23, 5);
  const auto c = coop_prob_per_round(ts, Player::B);
  double s = 0.0;
  for (const auto& p : c.per_round) s += p.mean;
  CHECK(std::abs(s / 23.0 - c.overall_mean) <= 1e-12);
  for (const auto& p : c.per_round) {
    CHECK(p.ci_low <= p.mean);
    CHECK(p.mean <= p.ci_high);
    CHECK(p.ci_low >= 0.0);
    CHECK(p.ci_high <= 1.0);
  }
  CHECK(c.overall_ci.first <= c.overall_mean);
  CHECK(c.overall_mean <= c.overall_ci.second);
}

TEST_CASE("coop curve preconditions") {
  CHECK_THROWS_AS(coop_prob_per_round(std::vector<GameTrace>{}, Player::A), std::invalid_argument);
  auto ts = run_games("AC", "AD", 2, 10, 1);
  auto other = run_games("AC", "AD", 1, 12, 1);
  ts.push_back(other.front());
  CHECK_THROWS_AS(coop_prob_per_round(ts, Player::A), std::invalid_argument);
  ts.back().failed = true;  // failed games are excluded instead
  CHECK(coop_prob_per_round(ts, Player::A).n_games == 2);
}

TEST_CASE("steady state") {
  CHECK(steady_state(constant_curve(std::vector<double>(100, 0.4))) == doctest::Approx(0.4));
  std::vector<double> step(90, 0.0);
  step.insert(step.end(), 10, 1.0);
  CHECK(steady_state(constant_curve(step), 10) == 1.0);
  CHECK_THROWS_AS(steady_state(constant_curve(step), 101), std::invalid_argument);
}

TEST_CASE("TFT against URND(0.5) settles at one half") {
  const auto ts = run_games("TFT", "URND:0.5", 100, 100, 11);
  const auto c = coop_prob_per_round(ts, Player::A);
  // TFT's rounds 91..100 copy the opponent's rounds 90..99.
  long c_opp = 0;
  for (const auto& t : ts) {
    for (std::size_t i = 89; i < 99; ++i) c_opp += t.rounds[i].action_b == Action::Cooperate;
  }
  const double oracle = static_cast<double>(c_opp) / 1000.0;
  CHECK(steady_state(c) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(std::abs(steady_state(c) - 0.5) <= 0.05);
  CHECK(count_coop(ts, Player::A, 90) == doctest::Approx(oracle));
}

TEST_CASE("pearson correlation") {
  const std::vector<double> x{0.0, 0.1, 0.3, 0.7, 1.0};
  CHECK(pearson(x, x) == 1.0);
  std::vector<double> shifted;
  for (double v : x) shifted.push_back(v + 0.25);
  CHECK(pearson(x, shifted) == doctest::Approx(1.0).epsilon(1e-12));
  const std::vector<double> lin{0, 1, 2, 3, 4};
  const std::vector<double> lin_rev{4, 3, 2, 1, 0};
  CHECK(pearson(lin, lin_rev) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK_THROWS(pearson(x, std::vector<double>{1, 2}));
  CHECK_THROWS(pearson(x, std::vector<double>(5, 0.2)));
}
