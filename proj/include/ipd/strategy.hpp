#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ipd/agent.hpp"

namespace ipd {

/// One of the eight canonical strategies. `p` is only meaningful for URND.
struct StrategyKind {
  enum class Type { AC, AD, RND, URND, TFT, STFT, GRIM, WSLS };

  Type type = Type::TFT;
  double p = 0.5;

  static StrategyKind ac() { return {Type::AC}; }
  static StrategyKind ad() { return {Type::AD}; }
  static StrategyKind rnd() { return {Type::RND}; }
  static StrategyKind urnd(double p);
  static StrategyKind tft() { return {Type::TFT}; }
  static StrategyKind stft() { return {Type::STFT}; }
  static StrategyKind grim() { return {Type::GRIM}; }
  static StrategyKind wsls() { return {Type::WSLS}; }

  bool deterministic() const { return type != Type::RND && type != Type::URND; }

  /// Cooperation probability of the randomized kinds (RND is 0.5).
  double cooperate_probability() const { return type == Type::RND ? 0.5 : p; }

  friend bool operator==(const StrategyKind& x, const StrategyKind& y) {
    return x.type == y.type && (x.type != Type::URND || x.p == y.p);
  }
};

/// Identifiers: "AC","AD","RND","URND:<p>","TFT","STFT","GRIM","WSLS".
StrategyKind parse_strategy(std::string_view id);
std::string to_string(const StrategyKind& kind);

/// The six deterministic strategies in canonical order.
std::vector<StrategyKind> deterministic_catalog();

/// Stateless decision: the action `kind` takes after `history`
/// (oriented, seat A = the deciding player). Randomized kinds consume exactly
/// one uniform draw per call; deterministic kinds consume none.
Action next_action(const StrategyKind& kind, HistoryView history, const PayoffMatrix& m,
                   Rng& rng);

/// Incrementally maintained summary of a player's history.
struct StrategyState {
  bool opponent_defected_ever = false;
  std::optional<Action> last_own_action;
  std::optional<Action> last_opponent_action;
  std::optional<int> last_own_payoff;

  void observe(const RoundRecord& own_view);
};

/// Stateful decision from a StrategyState; equals next_action on the history
/// the state was built from.
Action decide_from_state(const StrategyKind& kind, const StrategyState& state,
                         const PayoffMatrix& m, Rng& rng);

/// For every observed round t, the action `kind` prescribes given the observed
/// joint history up to t-1 (conditioning on `player`'s actual past actions).
/// Throws std::invalid_argument for RND/URND.
std::vector<Action> prescribe(const StrategyKind& kind, const GameTrace& observed, Player player,
                              const PayoffMatrix& m = PayoffMatrix{});

/// Live agent backed by a strategy. Keeps a StrategyState between rounds.
class StrategyAgent : public Agent {
 public:
  explicit StrategyAgent(StrategyKind kind) : kind_(kind) {}

  std::string label() const override { return to_string(kind_); }
  void begin_game(const GameSetup& setup) override;
  Action decide(HistoryView history, Rng& rng) override;

  const StrategyKind& kind() const { return kind_; }

 private:
  StrategyKind kind_;
  PayoffMatrix matrix_;
  StrategyState state_;
  std::size_t seen_ = 0;
};

/// A deterministic strategy executed with implementation noise: with
/// probability `tremble` the prescribed action is flipped. Used to generate
/// synthetic data for strategy-frequency estimation.
class TremblingStrategyAgent : public Agent {
 public:
  TremblingStrategyAgent(StrategyKind kind, double tremble);

  std::string label() const override;
  void begin_game(const GameSetup& setup) override { inner_.begin_game(setup); }
  Action decide(HistoryView history, Rng& rng) override;

 private:
  StrategyAgent inner_;
  double tremble_;
};

std::unique_ptr<Agent> make_strategy_agent(const StrategyKind& kind);

}  // namespace ipd
