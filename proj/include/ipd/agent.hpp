#pragma once

#include <stdexcept>
#include <string>

#include "ipd/action.hpp"
#include "ipd/rng.hpp"
#include "ipd/trace.hpp"

namespace ipd {

struct GameSetup {
  PayoffMatrix matrix;
  int n_rounds = 100;
};

/// Raised when an agent cannot produce an action (scripted list exhausted,
/// remote backend out of retries). The game is aborted and marked failed.
class AgentFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A participant in an iterated game.
///
/// `decide` sees only completed rounds, oriented so that seat A is the agent
/// itself. Implementations must not retain information about the round being
/// decided, which keeps moves simultaneous.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual std::string label() const = 0;

  /// Called once before round 1. Clears any state carried from a previous game.
  virtual void begin_game(const GameSetup& /*setup*/) {}

  virtual Action decide(HistoryView history, Rng& rng) = 0;
};

}  // namespace ipd
