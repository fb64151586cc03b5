#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ipd/action.hpp"

namespace ipd {

struct RoundRecord {
  int round_index = 0;  // 1-based
  Action action_a = Action::Cooperate;
  Action action_b = Action::Cooperate;
  int payoff_a = 0;
  int payoff_b = 0;

  Action action_of(Player p) const { return p == Player::A ? action_a : action_b; }
  int payoff_of(Player p) const { return p == Player::A ? payoff_a : payoff_b; }

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

/// The joint action sequence of one game.
///
/// `n_rounds` is the configured length; a completed game has exactly that many
/// rounds, a failed one may be shorter and carries `failed = true`.
struct GameTrace {
  std::vector<RoundRecord> rounds;
  std::optional<double> alpha;
  std::uint64_t seed = 0;
  std::array<std::string, 2> agent_labels;
  int n_rounds = 0;
  bool failed = false;
  std::string failure;  // diagnostic, not persisted

  friend bool operator==(const GameTrace& x, const GameTrace& y) {
    return x.rounds == y.rounds && x.alpha == y.alpha && x.seed == y.seed &&
           x.agent_labels == y.agent_labels && x.n_rounds == y.n_rounds && x.failed == y.failed;
  }
};

/// A history as seen by one player: in every record `action_a`/`payoff_a`
/// are that player's own, `action_b`/`payoff_b` the opponent's.
using HistoryView = std::span<const RoundRecord>;

RoundRecord flip(const RoundRecord& r);

/// Re-labels a trace so that `player` occupies seat A.
std::vector<RoundRecord> oriented(std::span<const RoundRecord> rounds, Player player);

std::vector<Action> actions_of(const GameTrace& trace, Player player);

/// Builds a trace from two action strings of equal length ("CCD", "DDC").
/// Test and CLI convenience.
GameTrace trace_from_actions(std::string_view a, std::string_view b,
                             const PayoffMatrix& m = PayoffMatrix{});

/// Checks contiguity of round indices and payoff consistency against `m`.
/// Throws std::invalid_argument describing the first violation.
void validate(const GameTrace& trace, const PayoffMatrix& m = PayoffMatrix{});

}  // namespace ipd
