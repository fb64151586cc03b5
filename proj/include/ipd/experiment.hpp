#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ipd/agent.hpp"
#include "ipd/comprehension.hpp"
#include "ipd/llm_agent.hpp"
#include "ipd/stats.hpp"
#include "ipd/strategy.hpp"
#include "ipd/trace.hpp"

namespace ipd {

enum class ExperimentKind { AlphaSweep, WindowSweep, TemperatureSweep, Comprehension, Replay };

ExperimentKind parse_experiment_kind(std::string_view s);
std::string_view to_string(ExperimentKind k);

/// Who plays seat A.
struct SubjectSpec {
  enum class Kind { Strategy, Llm, Scripted, Oracle };
  Kind kind = Kind::Strategy;
  StrategyKind strategy = StrategyKind::tft();
  double tremble = 0.0;                    // strategy subjects only
  AgentConfig llm;                         // llm subjects only
  std::vector<std::vector<Action>> scripts;  // scripted: game g replays scripts[g % size]
  std::string label;                       // optional display label

  bool remote() const { return kind == Kind::Llm; }
};

struct ExperimentSpec {
  ExperimentKind experiment = ExperimentKind::AlphaSweep;
  std::vector<double> alphas;  // default 0.0, 0.1, ..., 1.0
  std::vector<MemoryWindow> windows{1, 5, 10, 20, std::nullopt};
  std::vector<double> temperatures{0.1, 0.7, 1.0};
  int k = 100;
  int n_rounds = 100;
  SubjectSpec subject;
  StrategyKind opponent = StrategyKind::ad();  // window sweep only
  std::uint64_t master_seed = 0;
  std::filesystem::path output_dir = "out";
  int workers = 1;
  bool budget = false;  // allows k < 100 for remote subjects
  PayoffMatrix matrix;
  CiOptions ci;
  int sfem_restarts = 10;
  int comprehension_games = 3;
  std::string config_text;  // verbatim config file, echoed into the manifest

  ExperimentSpec();

  /// Grids non-empty, k >= 1, alphas in [0, 1], subject fits the experiment.
  void validate() const;
};

/// Parses a JSON config. Missing fields keep their defaults.
ExperimentSpec parse_experiment_config(std::string_view json_text);
ExperimentSpec load_experiment_config(const std::filesystem::path& path);

/// Game seed: derive_seed(master_seed, cell_id, g).
std::uint64_t game_seed(std::uint64_t master_seed, std::string_view cell_id, int g);

/// A fresh seat-A agent for game `g`. `temperature` and `window` override the
/// llm configuration when set.
std::unique_ptr<Agent> make_subject(const SubjectSpec& s, int g,
                                    std::optional<double> temperature = {},
                                    std::optional<MemoryWindow> window = {});

/// One cell of a sweep: a grid point and its k games.
struct Cell {
  std::string id;  // "alpha=0.3", "window=10", "temperature=0.7/alpha=0.3"
  std::optional<double> alpha;
  std::optional<MemoryWindow> window;
  std::optional<double> temperature;
  std::string opponent;
  std::filesystem::path trace_file;  // relative to the output directory
  std::vector<GameTrace> traces;

  int n_failed() const;
};

struct RunArtifact {
  std::filesystem::path output_dir;
  std::filesystem::path manifest_path;
  std::vector<std::filesystem::path> trace_paths;
  std::vector<std::filesystem::path> summary_paths;
  int games_failed = 0;
};

/// Progress callback: (cell id, games done, games total).
using Progress = std::function<void(const std::string&, int, int)>;

/// Runs `k` games of `make_a` vs `make_b` on up to `workers` threads. Results
/// are in game order.
std::vector<GameTrace> play_cell(const std::function<std::unique_ptr<Agent>(int)>& make_a,
                                 const std::function<std::unique_ptr<Agent>(int)>& make_b,
                                 int k, int n_rounds, const PayoffMatrix& m,
                                 std::uint64_t master_seed, std::string_view seed_cell_id,
                                 std::optional<double> alpha, int workers);

RunArtifact run_alpha_sweep(const ExperimentSpec& spec, const Progress& progress = {});
RunArtifact run_window_sweep(const ExperimentSpec& spec, const Progress& progress = {});
RunArtifact run_temperature_sweep(const ExperimentSpec& spec, const Progress& progress = {});
RunArtifact run_comprehension_experiment(const ExperimentSpec& spec);
RunArtifact run_experiment(const ExperimentSpec& spec, const Progress& progress = {});

/// Settings the summaries depend on; stored in the manifest for replay.
struct AnalysisSettings {
  PayoffMatrix matrix;
  CiOptions ci;
  int sfem_restarts = 10;
};

/// Writes the summary CSVs of `kind` for `cells` into `dir`.
std::vector<std::filesystem::path> write_summaries(ExperimentKind kind,
                                                   const std::vector<Cell>& cells,
                                                   const AnalysisSettings& settings,
                                                   const std::filesystem::path& dir);

/// Recomputes summaries from stored traces without network access. `input`
/// is a run directory holding manifest.json or a single JSONL file, whose
/// traces are grouped into alpha cells. Summaries go to `out_dir`.
RunArtifact replay(const std::filesystem::path& input, const std::filesystem::path& out_dir);

}  // namespace ipd
