#include "ipd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ipd/rng.hpp"

namespace ipd {
namespace {

constexpr double kZ95 = 1.96;

double mean_of(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

Interval clamp_unit(Interval iv) {
  iv.low = std::clamp(iv.low, 0.0, 1.0);
  iv.high = std::clamp(iv.high, 0.0, 1.0);
  return iv;
}

}  // namespace

Interval ci95(std::span<const double> samples, bool proportion) {
  if (samples.size() < 2) throw std::invalid_argument("ci95 needs at least two samples");
  const double n = static_cast<double>(samples.size());
  const double m = mean_of(samples);
  double ss = 0.0;
  for (double x : samples) ss += (x - m) * (x - m);
  const double half = kZ95 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  Interval iv{m, m - half, m + half};
  return proportion ? clamp_unit(iv) : iv;
}

Interval bootstrap_ci95(std::span<const double> samples, int resamples, std::uint64_t seed,
                        bool proportion) {
  if (samples.size() < 2) throw std::invalid_argument("bootstrap needs at least two samples");
  if (resamples < 2) throw std::invalid_argument("bootstrap needs at least two resamples");
  Rng rng(seed);
  const std::size_t n = samples.size();
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (auto& out : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s += samples[static_cast<std::size_t>(rng.uniform() * static_cast<double>(n))];
    }
    out = s / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  auto at = [&](double q) {
    const auto idx = static_cast<std::size_t>(q * static_cast<double>(means.size() - 1) + 0.5);
    return means[idx];
  };
  Interval iv{mean_of(samples), at(0.025), at(0.975)};
  iv.low = std::min(iv.low, iv.mean);
  iv.high = std::max(iv.high, iv.mean);
  return proportion ? clamp_unit(iv) : iv;
}

Interval summarize(std::span<const double> samples, bool proportion, const CiOptions& opts) {
  if (samples.empty()) throw std::invalid_argument("no samples to summarize");
  if (samples.size() < 2) {
    const double m = samples.front();
    return {m, m, m};
  }
  return opts.method == CiMethod::Bootstrap
             ? bootstrap_ci95(samples, opts.resamples, opts.seed, proportion)
             : ci95(samples, proportion);
}

CoopCurve coop_prob_per_round(std::span<const GameTrace> traces, Player player,
                              const CiOptions& opts) {
  std::vector<const GameTrace*> done;
  for (const auto& t : traces) {
    if (!t.failed) done.push_back(&t);
  }
  if (done.empty()) throw std::invalid_argument("no completed traces");
  const int n = done.front()->n_rounds;
  for (const auto* t : done) {
    if (t->n_rounds != n || static_cast<int>(t->rounds.size()) != n) {
      throw std::invalid_argument("traces disagree on n_rounds");
    }
  }

  CoopCurve curve;
  curve.n_games = static_cast<int>(done.size());
  std::vector<double> indicators(done.size());
  long long total = 0;
  for (int i = 0; i < n; ++i) {
    for (std::size_t g = 0; g < done.size(); ++g) {
      const bool c = done[g]->rounds[static_cast<std::size_t>(i)].action_of(player) ==
                     Action::Cooperate;
      indicators[g] = c ? 1.0 : 0.0;
      total += c;
    }
    CiOptions round_opts = opts;
    round_opts.seed = derive_seed(opts.seed, static_cast<std::uint64_t>(i));
    const Interval iv = summarize(indicators, true, round_opts);
    curve.per_round.push_back({i + 1, iv.mean, iv.low, iv.high});
  }

  // Mean of the per-round means; computed from the integer count so the
  // result is exact up to one rounding.
  curve.overall_mean = static_cast<double>(total) / (static_cast<double>(n) * curve.n_games);

  std::vector<double> per_game;
  for (const auto* t : done) per_game.push_back(cooperation_rate(*t, player));
  Interval iv = summarize(per_game, true, opts);
  curve.overall_ci = {std::min(iv.low, curve.overall_mean), std::max(iv.high, curve.overall_mean)};
  return curve;
}

double steady_state(const CoopCurve& curve, int tail) {
  const int n = static_cast<int>(curve.per_round.size());
  if (tail < 1 || tail > n) throw std::invalid_argument("steady_state tail out of range");
  double s = 0.0;
  for (int i = n - tail; i < n; ++i) s += curve.per_round[static_cast<std::size_t>(i)].mean;
  return s / tail;
}

double tail_cooperation(const GameTrace& trace, Player player, int tail) {
  const int n = static_cast<int>(trace.rounds.size());
  if (tail < 1 || tail > n) throw std::invalid_argument("tail out of range");
  int c = 0;
  for (int i = n - tail; i < n; ++i) {
    c += trace.rounds[static_cast<std::size_t>(i)].action_of(player) == Action::Cooperate;
  }
  return static_cast<double>(c) / tail;
}

double cooperation_rate(const GameTrace& trace, Player player) {
  if (trace.rounds.empty()) throw std::invalid_argument("empty trace");
  return tail_cooperation(trace, player, static_cast<int>(trace.rounds.size()));
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: size mismatch");
  if (x.size() < 2) throw std::invalid_argument("pearson: need at least two points");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw std::invalid_argument("pearson: constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace ipd
