#pragma once

#include <cstdint>
#include <optional>

#include "ipd/agent.hpp"
#include "ipd/trace.hpp"

namespace ipd {

/// Plays `n_rounds` simultaneous-move rounds between two agents.
///
/// Each agent draws from its own random stream derived from `seed`, so one
/// agent consuming more randomness never shifts the other's draws. If an agent
/// throws AgentFailure the game stops; the partial trace is returned with
/// `failed` set and `failure` naming the round and agent.
GameTrace play_game(Agent& agent_a, Agent& agent_b, int n_rounds, const PayoffMatrix& m,
                    std::uint64_t seed, std::optional<double> alpha = std::nullopt);

}  // namespace ipd
