#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "helpers.hpp"
#include "ipd/strategy.hpp"

using namespace ipd;

namespace {

constexpr Action C = Action::Cooperate;
constexpr Action D = Action::Defect;

std::vector<Action> acts(std::string_view s) {
  std::vector<Action> out;
  for (char c : s) out.push_back(c == 'C' ? C : D);
  return out;
}

std::vector<RoundRecord> history(std::string_view own, std::string_view opp,
                                 const PayoffMatrix& m = PayoffMatrix{}) {
  return trace_from_actions(own, opp, m).rounds;
}

std::vector<StrategyKind> all_kinds() {
  return {StrategyKind::ac(),   StrategyKind::ad(),   StrategyKind::rnd(),
          StrategyKind::urnd(0.3), StrategyKind::tft(), StrategyKind::stft(),
          StrategyKind::grim(), StrategyKind::wsls()};
}

}  // namespace

TEST_CASE("strategy identifiers") {
  for (const char* id : {"AC", "AD", "RND", "TFT", "STFT", "GRIM", "WSLS", "URND:0.3", "URND:1",
                         "URND:0"}) {
    CHECK(to_string(parse_strategy(id)) == id);
  }
  CHECK(parse_strategy("URND:0.25").p == 0.25);
  CHECK_THROWS_AS(parse_strategy("tft"), ConfigError);
  CHECK_THROWS_AS(parse_strategy("URND:1.5"), ConfigError);
  CHECK_THROWS_AS(parse_strategy("URND:abc"), ConfigError);
  CHECK_THROWS_AS(parse_strategy("URND:0.5x"), ConfigError);
  CHECK_THROWS_AS(parse_strategy("URND:"), ConfigError);
}

TEST_CASE("first moves") {
  Rng rng(1);
  const PayoffMatrix m;
  CHECK(next_action(StrategyKind::tft(), {}, m, rng) == C);
  CHECK(next_action(StrategyKind::stft(), {}, m, rng) == D);
  CHECK(next_action(StrategyKind::grim(), {}, m, rng) == C);
  CHECK(next_action(StrategyKind::wsls(), {}, m, rng) == C);
  CHECK(next_action(StrategyKind::ac(), {}, m, rng) == C);
  CHECK(next_action(StrategyKind::ad(), {}, m, rng) == D);
}

TEST_CASE("GRIM defects once triggered") {
  Rng rng(1);
  const auto h = history("CCC", "CCD");
  CHECK(next_action(StrategyKind::grim(), h, PayoffMatrix{}, rng) == D);
  const auto h2 = history("CDDDD", "DCCCC");
  CHECK(next_action(StrategyKind::grim(), h2, PayoffMatrix{}, rng) == D);
}

TEST_CASE("WSLS switches after the sucker payoff") {
  Rng rng(1);
  CHECK(next_action(StrategyKind::wsls(), history("C", "D"), PayoffMatrix{}, rng) == D);
  CHECK(next_action(StrategyKind::wsls(), history("D", "C"), PayoffMatrix{}, rng) == D);
  CHECK(next_action(StrategyKind::wsls(), history("D", "D"), PayoffMatrix{}, rng) == C);
  CHECK(next_action(StrategyKind::wsls(), history("C", "C"), PayoffMatrix{}, rng) == C);
}

TEST_CASE("WSLS evaluates wins against the configured matrix") {
  Rng rng(1);
  const PayoffMatrix m(7, 4, 2, 1);
  CHECK(next_action(StrategyKind::wsls(), history("C", "C", m), m, rng) == C);
  CHECK(next_action(StrategyKind::wsls(), history("D", "C", m), m, rng) == D);
  CHECK(next_action(StrategyKind::wsls(), history("D", "D", m), m, rng) == C);
  CHECK(next_action(StrategyKind::wsls(), history("C", "D", m), m, rng) == D);
}

TEST_CASE("prescriptions on observed histories") {
  SUBCASE("GRIM") {
    const auto t = trace_from_actions("CCCC", "CDCC");
    CHECK(prescribe(StrategyKind::grim(), t, Player::A) == acts("CCDD"));
  }
  SUBCASE("TFT") {
    const auto t = trace_from_actions("CCC", "DCD");
    CHECK(prescribe(StrategyKind::tft(), t, Player::A) == acts("CDC"));
  }
  SUBCASE("WSLS round three") {
    const auto t = trace_from_actions("CDC", "DDC");
    const auto p = prescribe(StrategyKind::wsls(), t, Player::A);
    CHECK(p == acts("CDC"));
  }
  SUBCASE("player B is read from its own seat") {
    const auto t = trace_from_actions("CDCC", "CCCC");
    CHECK(prescribe(StrategyKind::grim(), t, Player::B) == acts("CCDD"));
  }
  SUBCASE("conditions on observed own actions") {
    // WSLS tremble in round 1 (played D); the prescription follows the observed D.
    const auto t = trace_from_actions("DD", "CC");
    CHECK(prescribe(StrategyKind::wsls(), t, Player::A) == acts("CD"));
  }
}

TEST_CASE("prescribe rejects randomized strategies") {
  const auto t = trace_from_actions("CC", "CC");
  CHECK_THROWS_AS(prescribe(StrategyKind::rnd(), t, Player::A), std::invalid_argument);
  CHECK_THROWS_AS(prescribe(StrategyKind::urnd(0.2), t, Player::A), std::invalid_argument);
}

TEST_CASE("stateless replay equals stateful play on random histories") {
  Rng gen(99);
  const PayoffMatrix m;
  int cases = 0;
  for (int c = 0; c < 1200; ++c) {
    const int n = 1 + static_cast<int>(gen.uniform() * 30);
    std::string own, opp;
    for (int i = 0; i < n; ++i) {
      own += gen.bernoulli(0.5) ? 'C' : 'D';
      opp += gen.bernoulli(0.5) ? 'C' : 'D';
    }
    const auto h = history(own, opp);
    for (const auto& kind : all_kinds()) {
      StrategyState state;
      const std::uint64_t seed = gen.next();
      Rng r_state(seed), r_replay(seed);
      for (int t = 0; t <= n; ++t) {
        const HistoryView prefix(h.data(), static_cast<std::size_t>(t));
        const Action a = decide_from_state(kind, state, m, r_state);
        const Action b = next_action(kind, prefix, m, r_replay);
        REQUIRE(a == b);
        if (t < n) state.observe(h[static_cast<std::size_t>(t)]);
      }
    }
    ++cases;
  }
  CHECK(cases >= 1000);
}

TEST_CASE("URND extremes equal the pure strategies") {
  for (std::uint64_t seed : {1ULL, 2ULL, 12345ULL}) {
    const auto one = ipd::testing::run_games("URND:1", "RND", 3, 50, seed);
    const auto zero = ipd::testing::run_games("URND:0", "RND", 3, 50, seed);
    for (const auto& t : one) {
      for (const auto& r : t.rounds) CHECK(r.action_a == C);
    }
    for (const auto& t : zero) {
      for (const auto& r : t.rounds) CHECK(r.action_a == D);
    }
  }
}

TEST_CASE("TFT prescription copies the previous opponent action") {
  const auto ts = ipd::testing::run_games("RND", "RND", 20, 40, 8);
  for (const auto& t : ts) {
    const auto p = prescribe(StrategyKind::tft(), t, Player::A);
    for (std::size_t i = 1; i < p.size(); ++i) CHECK(p[i] == t.rounds[i - 1].action_b);
  }
}

TEST_CASE("URND(p) mean cooperation over 10,000 draws") {
  for (double p : {0.0, 0.1, 0.3, 0.5, 0.77, 1.0}) {
    Rng rng(derive_seed(314, static_cast<std::uint64_t>(p * 100)));
    int c = 0;
    for (int i = 0; i < 10000; ++i) {
      c += next_action(StrategyKind::urnd(p), {}, PayoffMatrix{}, rng) == C;
    }
    CHECK(std::abs(c / 10000.0 - p) <= 0.02);
  }
}

TEST_CASE("trembling agent") {
  const auto clean = ipd::testing::run_games("TFT", "RND", 5, 30, 4);
  const auto none = ipd::testing::run_trembling(StrategyKind::tft(), 0.0, "RND", 5, 30, 4);
  for (const auto& t : none) {
    const auto p = prescribe(StrategyKind::tft(), t, Player::A);
    CHECK(p == actions_of(t, Player::A));
  }
  const auto always = ipd::testing::run_trembling(StrategyKind::ad(), 1.0, "RND", 2, 10, 4);
  for (const auto& t : always) {
    for (const auto& r : t.rounds) CHECK(r.action_a == C);
  }
  CHECK(TremblingStrategyAgent(StrategyKind::tft(), 0.05).label() == "TFT~0.05");
  CHECK_THROWS_AS(TremblingStrategyAgent(StrategyKind::rnd(), 0.1), ConfigError);
  CHECK(clean.size() == 5);
}
