#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ipd/strategy.hpp"
#include "ipd/trace.hpp"

namespace ipd {

/// Strategy frequency estimation: a finite mixture over deterministic
/// strategies, each executed with a shared probability `beta` of playing the
/// prescribed action, fitted by expectation-maximization.
struct SfemConfig {
  std::vector<StrategyKind> strategy_catalog = deterministic_catalog();
  int max_em_iterations = 5000;
  double log_likelihood_tolerance = 1e-8;
  int restarts = 10;
  double beta_floor = 0.51;
  std::uint64_t seed = 0;
  PayoffMatrix matrix;

  /// Throws ConfigError on an empty or randomized catalog or beta_floor ∉ (0.5, 1].
  void validate() const;
};

struct SfemFit {
  std::vector<StrategyKind> strategies;  // catalog order
  std::vector<double> weights;           // mixture weights, sum to 1
  std::vector<double> scores;            // per_strategy_score at the fitted beta
  double beta = 0.0;
  double log_likelihood = 0.0;
  std::vector<std::vector<double>> responsibilities;  // [trace][strategy]

  /// Sets of catalog indices whose prescriptions coincide on every trace.
  /// Only groups of two or more are listed.
  std::vector<std::vector<std::size_t>> degeneracy_groups;
  std::vector<int> degeneracy_group_id;  // per strategy, -1 when identifiable

  bool converged = false;  // false: iteration cap hit, best-so-far returned
  int iterations = 0;
  std::vector<double> log_likelihood_history;  // of the selected restart
  bool monotone = true;                        // across every restart

  double weight(const StrategyKind& k) const;
  double score(const StrategyKind& k) const;
};

/// Σ_t log(beta if the observed action matches the prescription else 1 - beta).
/// Throws std::invalid_argument for beta outside (0, 1) or a randomized kind.
double likelihood_of_strategy(const GameTrace& trace, Player player, const StrategyKind& kind,
                              double beta, const PayoffMatrix& m = PayoffMatrix{});

/// Maximum-likelihood mixture weights and beta. Failed or empty traces are
/// ignored; throws std::invalid_argument if nothing usable remains.
SfemFit fit(std::span<const GameTrace> traces, Player player, const SfemConfig& cfg);

/// Per trace, each strategy's likelihood relative to the best strategy in the
/// catalog at the fitted beta, averaged over traces. Values lie in [0, 1] and
/// need not sum to one.
std::vector<double> per_strategy_score(std::span<const GameTrace> traces, Player player,
                                       const SfemConfig& cfg);

}  // namespace ipd
