#include "ipd/strategy.hpp"

#include "ipd/format.hpp"

#include <algorithm>
#include <stdexcept>

namespace ipd {
namespace {

constexpr Action C = Action::Cooperate;
constexpr Action D = Action::Defect;

constexpr Action toggle(Action a) { return a == C ? D : C; }

bool is_win(int own_payoff, const PayoffMatrix& m) {
  return own_payoff == m.reward() || own_payoff == m.temptation();
}

}  // namespace

StrategyKind StrategyKind::urnd(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("URND probability must lie in [0, 1]");
  return {Type::URND, p};
}

StrategyKind parse_strategy(std::string_view id) {
  using T = StrategyKind::Type;
  if (id == "AC") return {T::AC};
  if (id == "AD") return {T::AD};
  if (id == "RND") return {T::RND};
  if (id == "TFT") return {T::TFT};
  if (id == "STFT") return {T::STFT};
  if (id == "GRIM") return {T::GRIM};
  if (id == "WSLS") return {T::WSLS};
  if (id.starts_with("URND:")) {
    const std::string num(id.substr(5));
    std::size_t used = 0;
    double p = 0.0;
    try {
      p = std::stod(num, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != num.size()) {
      throw ConfigError("bad URND probability in '" + std::string(id) + "'");
    }
    return StrategyKind::urnd(p);
  }
  throw ConfigError("unknown strategy '" + std::string(id) + "'");
}

std::string to_string(const StrategyKind& kind) {
  using T = StrategyKind::Type;
  switch (kind.type) {
    case T::AC: return "AC";
    case T::AD: return "AD";
    case T::RND: return "RND";
    case T::TFT: return "TFT";
    case T::STFT: return "STFT";
    case T::GRIM: return "GRIM";
    case T::WSLS: return "WSLS";
    case T::URND: return "URND:" + format_real(kind.p);
  }
  return "?";
}

std::vector<StrategyKind> deterministic_catalog() {
  return {StrategyKind::ac(),   StrategyKind::ad(),   StrategyKind::tft(),
          StrategyKind::stft(), StrategyKind::grim(), StrategyKind::wsls()};
}

Action next_action(const StrategyKind& kind, HistoryView history, const PayoffMatrix& m,
                   Rng& rng) {
  using T = StrategyKind::Type;
  switch (kind.type) {
    case T::AC: return C;
    case T::AD: return D;
    case T::RND:
    case T::URND: return rng.bernoulli(kind.cooperate_probability()) ? C : D;
    case T::TFT: return history.empty() ? C : history.back().action_b;
    case T::STFT: return history.empty() ? D : history.back().action_b;
    case T::GRIM:
      return std::any_of(history.begin(), history.end(),
                         [](const RoundRecord& r) { return r.action_b == D; })
                 ? D
                 : C;
    case T::WSLS: {
      if (history.empty()) return C;
      const auto& last = history.back();
      return is_win(last.payoff_a, m) ? last.action_a : toggle(last.action_a);
    }
  }
  return C;
}

void StrategyState::observe(const RoundRecord& own_view) {
  opponent_defected_ever = opponent_defected_ever || own_view.action_b == D;
  last_own_action = own_view.action_a;
  last_opponent_action = own_view.action_b;
  last_own_payoff = own_view.payoff_a;
}

Action decide_from_state(const StrategyKind& kind, const StrategyState& s, const PayoffMatrix& m,
                         Rng& rng) {
  using T = StrategyKind::Type;
  switch (kind.type) {
    case T::AC: return C;
    case T::AD: return D;
    case T::RND:
    case T::URND: return rng.bernoulli(kind.cooperate_probability()) ? C : D;
    case T::TFT: return s.last_opponent_action.value_or(C);
    case T::STFT: return s.last_opponent_action.value_or(D);
    case T::GRIM: return s.opponent_defected_ever ? D : C;
    case T::WSLS:
      if (!s.last_own_action) return C;
      return is_win(*s.last_own_payoff, m) ? *s.last_own_action : toggle(*s.last_own_action);
  }
  return C;
}

std::vector<Action> prescribe(const StrategyKind& kind, const GameTrace& observed, Player player,
                              const PayoffMatrix& m) {
  if (!kind.deterministic()) {
    throw std::invalid_argument("prescribe() needs a deterministic strategy, got " +
                                to_string(kind));
  }
  const auto view = oriented(observed.rounds, player);
  std::vector<Action> out;
  out.reserve(view.size());
  Rng unused(0);
  StrategyState state;
  for (const auto& r : view) {
    out.push_back(decide_from_state(kind, state, m, unused));
    state.observe(r);
  }
  return out;
}

void StrategyAgent::begin_game(const GameSetup& setup) {
  matrix_ = setup.matrix;
  state_ = {};
  seen_ = 0;
}

Action StrategyAgent::decide(HistoryView history, Rng& rng) {
  if (history.size() < seen_) {
    throw std::logic_error("StrategyAgent history shrank; begin_game() was not called");
  }
  for (; seen_ < history.size(); ++seen_) state_.observe(history[seen_]);
  return decide_from_state(kind_, state_, matrix_, rng);
}

TremblingStrategyAgent::TremblingStrategyAgent(StrategyKind kind, double tremble)
    : inner_(kind), tremble_(tremble) {
  if (!kind.deterministic()) throw ConfigError("trembling agent needs a deterministic strategy");
  if (!(tremble >= 0.0 && tremble <= 1.0)) throw ConfigError("tremble must lie in [0, 1]");
}

std::string TremblingStrategyAgent::label() const {
  return inner_.label() + "~" + format_real(tremble_);
}

Action TremblingStrategyAgent::decide(HistoryView history, Rng& rng) {
  const Action prescribed = inner_.decide(history, rng);
  return rng.bernoulli(tremble_) ? toggle(prescribed) : prescribed;
}

std::unique_ptr<Agent> make_strategy_agent(const StrategyKind& kind) {
  return std::make_unique<StrategyAgent>(kind);
}

}  // namespace ipd
