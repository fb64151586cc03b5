#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace ipd {

enum class Action : std::uint8_t { Cooperate, Defect };

/// Which seat a player occupies in a game. The subject is conventionally A.
enum class Player : std::uint8_t { A, B };

constexpr Player other(Player p) { return p == Player::A ? Player::B : Player::A; }

/// "Cooperate" / "Defect", verbatim as used in prompts and traces.
std::string_view to_string(Action a);
std::string_view to_string(Player p);

/// Accepts the exact names "Cooperate"/"Defect" and the short forms "C"/"D".
Action parse_action_name(std::string_view s);
Player parse_player(std::string_view s);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stage-game payoffs. Construction enforces T > R > P > S.
class PayoffMatrix {
 public:
  constexpr PayoffMatrix() = default;
  PayoffMatrix(int temptation, int reward, int punishment, int sucker);

  int temptation() const { return t_; }
  int reward() const { return r_; }
  int punishment() const { return p_; }
  int sucker() const { return s_; }

  /// Points for (own, opponent) actions.
  int points(Action own, Action opponent) const;

  friend bool operator==(const PayoffMatrix&, const PayoffMatrix&) = default;

 private:
  int t_ = 5;
  int r_ = 3;
  int p_ = 1;
  int s_ = 0;
};

/// (points_a, points_b) for a joint action.
std::pair<int, int> payoff(Action a, Action b, const PayoffMatrix& m);

}  // namespace ipd
