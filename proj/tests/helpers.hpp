#pragma once

#include <string>
#include <vector>

#include "ipd/game.hpp"
#include "ipd/rng.hpp"
#include "ipd/strategy.hpp"

namespace ipd::testing {

inline std::vector<GameTrace> run_games(const std::string& subject, const std::string& opponent,
                                        int k, int n_rounds, std::uint64_t seed) {
  std::vector<GameTrace> out;
  for (int g = 0; g < k; ++g) {
    StrategyAgent a(parse_strategy(subject));
    StrategyAgent b(parse_strategy(opponent));
    out.push_back(play_game(a, b, n_rounds, PayoffMatrix{}, derive_seed(seed, "test", g)));
  }
  return out;
}

inline std::vector<GameTrace> run_trembling(const StrategyKind& subject, double tremble,
                                            const std::string& opponent, int k, int n_rounds,
                                            std::uint64_t seed) {
  std::vector<GameTrace> out;
  for (int g = 0; g < k; ++g) {
    TremblingStrategyAgent a(subject, tremble);
    StrategyAgent b(parse_strategy(opponent));
    out.push_back(play_game(a, b, n_rounds, PayoffMatrix{}, derive_seed(seed, "tremble", g)));
  }
  return out;
}

}  // namespace ipd::testing
