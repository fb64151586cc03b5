#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>

#include "ipd/stats.hpp"
#include "ipd/trace.hpp"

namespace ipd {

// Behavioral dimensions of one player X against its opponent Y.
//
// An uncalled defection by X at round t is X_t = D with t = 1 or Y_{t-1} = C;
// an occasion for X to provoke is any round t with t = 1 or Y_{t-1} = C.
// A dimension whose denominator is zero is undefined (std::nullopt).

/// 1 if X never defects or first defects strictly after Y's first defection.
int niceness(const GameTrace& trace, Player player);

/// forgiven / (opponent defections + penalties). Opponent defections in the
/// last round are not counted since the response cannot be observed.
std::optional<double> forgiveness(const GameTrace& trace, Player player);

/// reactions / provocations, provocations being Y's uncalled defections before
/// the last round and reactions X defecting in the round right after.
std::optional<double> retaliation(const GameTrace& trace, Player player);

/// uncalled defections by X / occasions for X to provoke.
std::optional<double> troublemaking(const GameTrace& trace, Player player);

/// Fraction of rounds 2..N in which X repeated Y's previous action.
/// Throws std::invalid_argument for N < 2.
double emulation(const GameTrace& trace, Player player);

enum class Dimension { Nice, Forgiving, Retaliatory, Troublemaking, Emulative };

inline constexpr std::array<Dimension, 5> kDimensions = {
    Dimension::Nice, Dimension::Forgiving, Dimension::Retaliatory, Dimension::Troublemaking,
    Dimension::Emulative};

std::string_view to_string(Dimension d);

struct BehavioralProfile {
  double nice = 0.0;
  std::optional<double> forgiving;
  std::optional<double> retaliatory;
  std::optional<double> troublemaking;
  std::optional<double> emulative;

  std::optional<double> get(Dimension d) const;
};

BehavioralProfile profile(const GameTrace& trace, Player player);

struct DimensionSummary {
  Dimension dimension = Dimension::Nice;
  std::optional<Interval> value;  // empty when undefined in every game
  int n_defined = 0;
  int n_games = 0;
};

struct AggregatedProfile {
  std::array<DimensionSummary, 5> dimensions;

  const DimensionSummary& operator[](Dimension d) const {
    return dimensions[static_cast<std::size_t>(d)];
  }
};

/// Mean and interval per dimension over the games where it is defined.
/// Failed traces are skipped; throws std::invalid_argument if none remain.
AggregatedProfile aggregate_profile(std::span<const GameTrace> traces, Player player,
                                    const CiOptions& opts = {});

}  // namespace ipd
