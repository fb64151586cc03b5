#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ipd/trace.hpp"

namespace ipd {

struct Interval {
  double mean = 0.0;
  double low = 0.0;
  double high = 0.0;
};

/// Normal-approximation 95% interval: mean ± 1.96·s/√n with the sample
/// standard deviation. `proportion` clamps the bounds to [0, 1].
/// Throws std::invalid_argument for fewer than two samples.
Interval ci95(std::span<const double> samples, bool proportion = false);

/// Percentile bootstrap alternative to ci95 (2.5% / 97.5% of resampled means).
Interval bootstrap_ci95(std::span<const double> samples, int resamples, std::uint64_t seed,
                        bool proportion = false);

enum class CiMethod { Normal, Bootstrap };

struct CiOptions {
  CiMethod method = CiMethod::Normal;
  int resamples = 2000;
  std::uint64_t seed = 0;
};

/// Interval for aggregate reports. Degenerates to a point when fewer than two
/// samples exist instead of throwing.
Interval summarize(std::span<const double> samples, bool proportion, const CiOptions& opts = {});

struct CurvePoint {
  int round_index = 0;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Per-round cooperation probability over k games and its game average.
struct CoopCurve {
  std::vector<CurvePoint> per_round;
  double overall_mean = 0.0;
  std::pair<double, double> overall_ci{0.0, 0.0};
  int n_games = 0;
};

/// Failed traces are skipped. Throws std::invalid_argument when no completed
/// trace remains or the completed traces disagree on n_rounds.
CoopCurve coop_prob_per_round(std::span<const GameTrace> traces, Player player,
                              const CiOptions& opts = {});

/// Mean of the per-round means over the last `tail` rounds.
double steady_state(const CoopCurve& curve, int tail = 10);

/// Fraction of the last `tail` rounds in which `player` cooperated.
double tail_cooperation(const GameTrace& trace, Player player, int tail = 10);

/// Fraction of all rounds in which `player` cooperated.
double cooperation_rate(const GameTrace& trace, Player player);

/// Pearson correlation; throws if sizes differ, n < 2 or either side is constant.
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace ipd
