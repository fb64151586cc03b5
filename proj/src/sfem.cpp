#include "ipd/sfem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ipd/rng.hpp"

namespace ipd {
namespace {

// Upper bound for beta during fitting; keeps log(1 - beta) finite when the
// data are noiseless.
constexpr double kBetaCeiling = 1.0 - 1e-12;
// Restarts whose final log-likelihoods differ by less than this are treated
// as tied and the earliest wins, so selection does not hinge on rounding.
constexpr double kRestartTie = 1e-6;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Data {
  std::vector<std::vector<int>> matches;  // [trace][strategy]
  std::vector<int> lengths;               // [trace]
  std::vector<std::vector<Action>> prescriptions;  // [strategy] concatenated over traces
};

Data collect(std::span<const GameTrace> traces, Player player, const SfemConfig& cfg) {
  const std::size_t k = cfg.strategy_catalog.size();
  Data d;
  d.prescriptions.resize(k);
  for (const auto& t : traces) {
    if (t.failed || t.rounds.empty()) continue;
    const auto observed = actions_of(t, player);
    std::vector<int> m(k, 0);
    for (std::size_t s = 0; s < k; ++s) {
      const auto p = prescribe(cfg.strategy_catalog[s], t, player, cfg.matrix);
      for (std::size_t i = 0; i < p.size(); ++i) m[s] += p[i] == observed[i];
      d.prescriptions[s].insert(d.prescriptions[s].end(), p.begin(), p.end());
    }
    d.matches.push_back(std::move(m));
    d.lengths.push_back(static_cast<int>(observed.size()));
  }
  if (d.lengths.empty()) throw std::invalid_argument("SFEM needs at least one completed trace");
  return d;
}

double log_lik(int matches, int length, double log_beta, double log_miss) {
  const int misses = length - matches;
  // 0 * log(0) contributes nothing.
  return (matches > 0 ? matches * log_beta : 0.0) + (misses > 0 ? misses * log_miss : 0.0);
}

double log_sum_exp(std::span<const double> xs) {
  const double mx = *std::max_element(xs.begin(), xs.end());
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - mx);
  return mx + std::log(s);
}

struct EmState {
  std::vector<double> weights;
  double beta = 0.0;
  double ll = kNegInf;
  std::vector<std::vector<double>> resp;
  std::vector<double> history;
  bool converged = false;
  bool monotone = true;
  int iterations = 0;
};

// E-step: responsibilities and total log-likelihood for the current parameters.
void expectation(const Data& d, EmState& st) {
  const std::size_t k = st.weights.size();
  const double lb = std::log(st.beta);
  const double lm = std::log1p(-st.beta);
  std::vector<double> terms(k);
  st.resp.assign(d.lengths.size(), std::vector<double>(k, 0.0));
  double total = 0.0;
  for (std::size_t n = 0; n < d.lengths.size(); ++n) {
    for (std::size_t s = 0; s < k; ++s) {
      terms[s] = st.weights[s] > 0.0
                     ? std::log(st.weights[s]) + log_lik(d.matches[n][s], d.lengths[n], lb, lm)
                     : kNegInf;
    }
    const double lse = log_sum_exp(terms);
    total += lse;
    if (lse == kNegInf) continue;
    for (std::size_t s = 0; s < k; ++s) st.resp[n][s] = std::exp(terms[s] - lse);
  }
  st.ll = total;
}

void maximization(const Data& d, const SfemConfig& cfg, EmState& st) {
  const std::size_t k = st.weights.size();
  const double n_traces = static_cast<double>(d.lengths.size());
  std::fill(st.weights.begin(), st.weights.end(), 0.0);
  double hit = 0.0;
  double total = 0.0;
  for (std::size_t n = 0; n < d.lengths.size(); ++n) {
    for (std::size_t s = 0; s < k; ++s) {
      const double r = st.resp[n][s];
      st.weights[s] += r;
      hit += r * d.matches[n][s];
      total += r * d.lengths[n];
    }
  }
  for (auto& w : st.weights) w /= n_traces;
  double sum = 0.0;
  for (double w : st.weights) sum += w;
  for (auto& w : st.weights) w /= sum;
  const double beta = total > 0.0 ? hit / total : cfg.beta_floor;
  st.beta = std::clamp(beta, cfg.beta_floor, kBetaCeiling);
}

EmState run_em(const Data& d, const SfemConfig& cfg, std::vector<double> weights, double beta) {
  EmState st;
  st.weights = std::move(weights);
  st.beta = beta;
  expectation(d, st);
  st.history.push_back(st.ll);
  for (int it = 0; it < cfg.max_em_iterations; ++it) {
    const double prev = st.ll;
    maximization(d, cfg, st);
    expectation(d, st);
    st.history.push_back(st.ll);
    ++st.iterations;
    if (st.ll < prev - 1e-9 * (1.0 + std::abs(prev))) st.monotone = false;
    if (std::abs(st.ll - prev) < cfg.log_likelihood_tolerance) {
      st.converged = true;
      break;
    }
  }
  return st;
}

// Initial weights depend on the strategy identity, not its catalog position,
// so permuting the catalog permutes the starting point with it.
std::vector<double> initial_weights(const SfemConfig& cfg, int restart) {
  const std::size_t k = cfg.strategy_catalog.size();
  std::vector<double> w(k, 1.0 / static_cast<double>(k));
  if (restart == 0) return w;
  double sum = 0.0;
  for (std::size_t s = 0; s < k; ++s) {
    Rng rng(derive_seed(cfg.seed, to_string(cfg.strategy_catalog[s]),
                        static_cast<std::uint64_t>(restart)));
    w[s] = -std::log1p(-rng.uniform()) + 1e-3;  // Exp(1), Dirichlet(1) after normalizing
    sum += w[s];
  }
  for (auto& x : w) x /= sum;
  return w;
}

double initial_beta(const SfemConfig& cfg, int restart) {
  const double hi = std::max(cfg.beta_floor, 0.99);
  if (restart == 0) return std::clamp(0.8, cfg.beta_floor, hi);
  Rng rng(derive_seed(cfg.seed, "beta", static_cast<std::uint64_t>(restart)));
  return cfg.beta_floor + (hi - cfg.beta_floor) * rng.uniform();
}

void find_degeneracies(const Data& d, SfemFit& out) {
  const std::size_t k = d.prescriptions.size();
  out.degeneracy_group_id.assign(k, -1);
  std::vector<bool> placed(k, false);
  for (std::size_t s = 0; s < k; ++s) {
    if (placed[s]) continue;
    std::vector<std::size_t> group{s};
    for (std::size_t u = s + 1; u < k; ++u) {
      if (!placed[u] && d.prescriptions[u] == d.prescriptions[s]) group.push_back(u);
    }
    if (group.size() < 2) continue;
    const int id = static_cast<int>(out.degeneracy_groups.size());
    for (auto g : group) {
      placed[g] = true;
      out.degeneracy_group_id[g] = id;
    }
    out.degeneracy_groups.push_back(std::move(group));
  }
}

std::vector<double> scores_at(const Data& d, double beta, std::size_t k) {
  const double lb = std::log(beta);
  const double lm = std::log1p(-beta);
  std::vector<double> scores(k, 0.0);
  std::vector<double> ll(k);
  for (std::size_t n = 0; n < d.lengths.size(); ++n) {
    for (std::size_t s = 0; s < k; ++s) ll[s] = log_lik(d.matches[n][s], d.lengths[n], lb, lm);
    const double best = *std::max_element(ll.begin(), ll.end());
    for (std::size_t s = 0; s < k; ++s) scores[s] += std::exp(ll[s] - best);
  }
  for (auto& x : scores) x /= static_cast<double>(d.lengths.size());
  return scores;
}

std::size_t index_of(const std::vector<StrategyKind>& v, const StrategyKind& k) {
  const auto it = std::find(v.begin(), v.end(), k);
  if (it == v.end()) throw std::out_of_range(to_string(k) + " is not in the SFEM catalog");
  return static_cast<std::size_t>(it - v.begin());
}

}  // namespace

void SfemConfig::validate() const {
  if (strategy_catalog.empty()) throw ConfigError("SFEM catalog is empty");
  for (const auto& k : strategy_catalog) {
    if (!k.deterministic()) {
      throw ConfigError("SFEM catalog accepts deterministic strategies only, got " + to_string(k));
    }
  }
  for (std::size_t i = 0; i < strategy_catalog.size(); ++i) {
    for (std::size_t j = i + 1; j < strategy_catalog.size(); ++j) {
      if (strategy_catalog[i] == strategy_catalog[j]) {
        throw ConfigError("duplicate strategy in SFEM catalog: " + to_string(strategy_catalog[i]));
      }
    }
  }
  if (!(beta_floor > 0.5 && beta_floor <= 1.0)) throw ConfigError("beta_floor must lie in (0.5, 1]");
  if (max_em_iterations < 1) throw ConfigError("max_em_iterations must be >= 1");
  if (restarts < 1) throw ConfigError("restarts must be >= 1");
  if (!(log_likelihood_tolerance > 0.0)) throw ConfigError("tolerance must be positive");
}

double SfemFit::weight(const StrategyKind& k) const { return weights[index_of(strategies, k)]; }
double SfemFit::score(const StrategyKind& k) const { return scores[index_of(strategies, k)]; }

double likelihood_of_strategy(const GameTrace& trace, Player player, const StrategyKind& kind,
                              double beta, const PayoffMatrix& m) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
  const auto p = prescribe(kind, trace, player, m);
  const auto observed = actions_of(trace, player);
  double ll = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    ll += p[i] == observed[i] ? std::log(beta) : std::log1p(-beta);
  }
  return ll;
}

SfemFit fit(std::span<const GameTrace> traces, Player player, const SfemConfig& cfg) {
  cfg.validate();
  const Data d = collect(traces, player, cfg);
  const std::size_t k = cfg.strategy_catalog.size();

  EmState best;
  bool all_monotone = true;
  for (int r = 0; r < cfg.restarts; ++r) {
    EmState st = run_em(d, cfg, initial_weights(cfg, r), initial_beta(cfg, r));
    all_monotone = all_monotone && st.monotone;
    if (r == 0 || st.ll > best.ll + kRestartTie) best = std::move(st);
  }

  SfemFit out;
  out.strategies = cfg.strategy_catalog;
  out.weights = best.weights;
  out.beta = best.beta;
  out.log_likelihood = best.ll;
  out.responsibilities = std::move(best.resp);
  out.converged = best.converged;
  out.iterations = best.iterations;
  out.log_likelihood_history = std::move(best.history);
  out.monotone = all_monotone;
  out.scores = scores_at(d, out.beta, k);
  find_degeneracies(d, out);
  return out;
}

std::vector<double> per_strategy_score(std::span<const GameTrace> traces, Player player,
                                       const SfemConfig& cfg) {
  return fit(traces, player, cfg).scores;
}

}  // namespace ipd
