#include "ipd/game.hpp"

#include <stdexcept>

namespace ipd {

GameTrace play_game(Agent& agent_a, Agent& agent_b, int n_rounds, const PayoffMatrix& m,
                    std::uint64_t seed, std::optional<double> alpha) {
  if (n_rounds < 1) throw std::invalid_argument("n_rounds must be >= 1");

  GameTrace trace;
  trace.alpha = alpha;
  trace.seed = seed;
  trace.agent_labels = {agent_a.label(), agent_b.label()};
  trace.n_rounds = n_rounds;
  trace.rounds.reserve(static_cast<std::size_t>(n_rounds));

  Rng rng_a(derive_seed(seed, 1));
  Rng rng_b(derive_seed(seed, 2));
  const GameSetup setup{m, n_rounds};
  agent_a.begin_game(setup);
  agent_b.begin_game(setup);

  std::vector<RoundRecord> view_b;  // B's perspective; A's is trace.rounds itself
  view_b.reserve(static_cast<std::size_t>(n_rounds));

  for (int round = 1; round <= n_rounds; ++round) {
    Action a{};
    Action b{};
    Player deciding = Player::A;
    try {
      a = agent_a.decide(trace.rounds, rng_a);
      deciding = Player::B;
      b = agent_b.decide(view_b, rng_b);
    } catch (const AgentFailure& e) {
      const auto& who = trace.agent_labels[deciding == Player::A ? 0 : 1];
      trace.failed = true;
      trace.failure = "round " + std::to_string(round) + ", agent " +
                      std::string(to_string(deciding)) + " (" + who + "): " + e.what();
      return trace;
    }
    const auto [pa, pb] = payoff(a, b, m);
    trace.rounds.push_back({round, a, b, pa, pb});
    view_b.push_back(flip(trace.rounds.back()));
  }
  return trace;
}

}  // namespace ipd
