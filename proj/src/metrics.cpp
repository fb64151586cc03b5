#include "ipd/metrics.hpp"

#include <stdexcept>
#include <vector>

#include "ipd/rng.hpp"

namespace ipd {
namespace {

constexpr Action C = Action::Cooperate;
constexpr Action D = Action::Defect;

// 0-based access to the player's and the opponent's actions.
struct Sides {
  std::vector<Action> x;
  std::vector<Action> y;
  std::size_t n() const { return x.size(); }
};

Sides sides(const GameTrace& trace, Player player) {
  return {actions_of(trace, player), actions_of(trace, other(player))};
}

std::optional<double> ratio(int num, int den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / den;
}

}  // namespace

int niceness(const GameTrace& trace, Player player) {
  const auto s = sides(trace, player);
  for (std::size_t t = 0; t < s.n(); ++t) {
    if (s.x[t] == D) {
      // X defected first at t; nice only if Y already defected earlier.
      for (std::size_t u = 0; u < t; ++u) {
        if (s.y[u] == D) return 1;
      }
      return 0;
    }
  }
  return 1;
}

std::optional<double> forgiveness(const GameTrace& trace, Player player) {
  const auto s = sides(trace, player);
  const std::size_t n = s.n();
  int defections = 0;
  int forgiven = 0;
  int penalties = 0;
  bool y_defected_before = false;  // Y defected in some round < t-1
  for (std::size_t t = 0; t < n; ++t) {
    if (t + 1 < n && s.y[t] == D) {
      ++defections;
      forgiven += s.x[t + 1] == C;
    }
    if (t >= 1) {
      if (s.y[t - 1] == C && s.x[t - 1] == D && s.x[t] == D && y_defected_before) ++penalties;
      y_defected_before = y_defected_before || s.y[t - 1] == D;
    }
  }
  return ratio(forgiven, defections + penalties);
}

std::optional<double> retaliation(const GameTrace& trace, Player player) {
  const auto s = sides(trace, player);
  int provocations = 0;
  int reactions = 0;
  for (std::size_t t = 0; t + 1 < s.n(); ++t) {
    const bool uncalled = s.y[t] == D && (t == 0 || s.x[t - 1] == C);
    if (uncalled) {
      ++provocations;
      reactions += s.x[t + 1] == D;
    }
  }
  return ratio(reactions, provocations);
}

std::optional<double> troublemaking(const GameTrace& trace, Player player) {
  const auto s = sides(trace, player);
  int occasions = 0;
  int uncalled = 0;
  for (std::size_t t = 0; t < s.n(); ++t) {
    if (t == 0 || s.y[t - 1] == C) {
      ++occasions;
      uncalled += s.x[t] == D;
    }
  }
  return ratio(uncalled, occasions);
}

double emulation(const GameTrace& trace, Player player) {
  const auto s = sides(trace, player);
  if (s.n() < 2) throw std::invalid_argument("emulation needs at least two rounds");
  int mimic = 0;
  for (std::size_t t = 1; t < s.n(); ++t) mimic += s.x[t] == s.y[t - 1];
  return static_cast<double>(mimic) / static_cast<double>(s.n() - 1);
}

std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::Nice: return "nice";
    case Dimension::Forgiving: return "forgiving";
    case Dimension::Retaliatory: return "retaliatory";
    case Dimension::Troublemaking: return "troublemaking";
    case Dimension::Emulative: return "emulative";
  }
  return "?";
}

std::optional<double> BehavioralProfile::get(Dimension d) const {
  switch (d) {
    case Dimension::Nice: return nice;
    case Dimension::Forgiving: return forgiving;
    case Dimension::Retaliatory: return retaliatory;
    case Dimension::Troublemaking: return troublemaking;
    case Dimension::Emulative: return emulative;
  }
  return std::nullopt;
}

BehavioralProfile profile(const GameTrace& trace, Player player) {
  BehavioralProfile p;
  p.nice = niceness(trace, player);
  p.forgiving = forgiveness(trace, player);
  p.retaliatory = retaliation(trace, player);
  p.troublemaking = troublemaking(trace, player);
  if (trace.rounds.size() >= 2) p.emulative = emulation(trace, player);
  return p;
}

AggregatedProfile aggregate_profile(std::span<const GameTrace> traces, Player player,
                                    const CiOptions& opts) {
  std::vector<BehavioralProfile> profiles;
  for (const auto& t : traces) {
    if (!t.failed) profiles.push_back(profile(t, player));
  }
  if (profiles.empty()) throw std::invalid_argument("no completed traces to profile");

  AggregatedProfile out;
  for (std::size_t i = 0; i < kDimensions.size(); ++i) {
    const Dimension d = kDimensions[i];
    std::vector<double> values;
    for (const auto& p : profiles) {
      if (auto v = p.get(d)) values.push_back(*v);
    }
    auto& summary = out.dimensions[i];
    summary.dimension = d;
    summary.n_games = static_cast<int>(profiles.size());
    summary.n_defined = static_cast<int>(values.size());
    if (!values.empty()) {
      CiOptions dim_opts = opts;
      dim_opts.seed = derive_seed(opts.seed, i);
      summary.value = summarize(values, true, dim_opts);
    }
  }
  return out;
}

}  // namespace ipd
