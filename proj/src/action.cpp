#include "ipd/action.hpp"

namespace ipd {

std::string_view to_string(Action a) {
  return a == Action::Cooperate ? "Cooperate" : "Defect";
}

std::string_view to_string(Player p) { return p == Player::A ? "A" : "B"; }

Action parse_action_name(std::string_view s) {
  if (s == "Cooperate" || s == "C") return Action::Cooperate;
  if (s == "Defect" || s == "D") return Action::Defect;
  throw ConfigError("unknown action '" + std::string(s) + "'");
}

Player parse_player(std::string_view s) {
  if (s == "A" || s == "a") return Player::A;
  if (s == "B" || s == "b") return Player::B;
  throw ConfigError("unknown player '" + std::string(s) + "' (expected A or B)");
}

PayoffMatrix::PayoffMatrix(int temptation, int reward, int punishment, int sucker)
    : t_(temptation), r_(reward), p_(punishment), s_(sucker) {
  if (!(t_ > r_ && r_ > p_ && p_ > s_)) {
    throw ConfigError("payoff matrix violates T > R > P > S: (" + std::to_string(t_) + ", " +
                      std::to_string(r_) + ", " + std::to_string(p_) + ", " +
                      std::to_string(s_) + ")");
  }
}

int PayoffMatrix::points(Action own, Action opponent) const {
  if (own == Action::Cooperate) {
    return opponent == Action::Cooperate ? r_ : s_;
  }
  return opponent == Action::Cooperate ? t_ : p_;
}

std::pair<int, int> payoff(Action a, Action b, const PayoffMatrix& m) {
  return {m.points(a, b), m.points(b, a)};
}

}  // namespace ipd
