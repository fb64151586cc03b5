#include "ipd/trace.hpp"

#include <stdexcept>

namespace ipd {

RoundRecord flip(const RoundRecord& r) {
  return RoundRecord{r.round_index, r.action_b, r.action_a, r.payoff_b, r.payoff_a};
}

std::vector<RoundRecord> oriented(std::span<const RoundRecord> rounds, Player player) {
  std::vector<RoundRecord> out(rounds.begin(), rounds.end());
  if (player == Player::B) {
    for (auto& r : out) r = flip(r);
  }
  return out;
}

std::vector<Action> actions_of(const GameTrace& trace, Player player) {
  std::vector<Action> out;
  out.reserve(trace.rounds.size());
  for (const auto& r : trace.rounds) out.push_back(r.action_of(player));
  return out;
}

GameTrace trace_from_actions(std::string_view a, std::string_view b, const PayoffMatrix& m) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("action strings differ in length");
  }
  GameTrace t;
  t.n_rounds = static_cast<int>(a.size());
  t.agent_labels = {"A", "B"};
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Action x = parse_action_name(std::string_view(&a[i], 1));
    const Action y = parse_action_name(std::string_view(&b[i], 1));
    const auto [pa, pb] = payoff(x, y, m);
    t.rounds.push_back({static_cast<int>(i) + 1, x, y, pa, pb});
  }
  return t;
}

void validate(const GameTrace& trace, const PayoffMatrix& m) {
  if (!trace.failed && static_cast<int>(trace.rounds.size()) != trace.n_rounds) {
    throw std::invalid_argument("completed trace has " + std::to_string(trace.rounds.size()) +
                                " rounds, expected " + std::to_string(trace.n_rounds));
  }
  for (std::size_t i = 0; i < trace.rounds.size(); ++i) {
    const auto& r = trace.rounds[i];
    if (r.round_index != static_cast<int>(i) + 1) {
      throw std::invalid_argument("round " + std::to_string(i + 1) + " has index " +
                                  std::to_string(r.round_index));
    }
    if (std::pair{r.payoff_a, r.payoff_b} != payoff(r.action_a, r.action_b, m)) {
      throw std::invalid_argument("round " + std::to_string(r.round_index) +
                                  " payoffs disagree with the payoff matrix");
    }
  }
}

}  // namespace ipd
