// Command-line front end for games, sweeps and trace analysis.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ipd/experiment.hpp"
#include "ipd/format.hpp"
#include "ipd/game.hpp"
#include "ipd/metrics.hpp"
#include "ipd/sfem.hpp"
#include "ipd/trace_io.hpp"

namespace fs = std::filesystem;
using namespace ipd;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> workers;
  bool budget = false;
  std::string subject;  // strategy shorthand
  std::optional<int> k;
  std::optional<int> rounds;
  std::vector<double> alphas;
  std::vector<std::string> windows;
  std::vector<double> temperatures;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--workers", f.workers, "Parallel games")->check(CLI::PositiveNumber);
  cmd->add_flag("--budget", f.budget, "Allow k < 100 for remote subjects");
  cmd->add_option("--subject", f.subject, "Strategy subject, e.g. TFT or URND:0.3");
  cmd->add_option("-k,--games", f.k, "Games per cell")->check(CLI::PositiveNumber);
  cmd->add_option("--rounds", f.rounds, "Rounds per game")->check(CLI::PositiveNumber);
}

ExperimentSpec resolve(const CommonFlags& f, ExperimentKind kind) {
  ExperimentSpec s = f.config.empty() ? ExperimentSpec{} : load_experiment_config(f.config);
  s.experiment = kind;
  if (f.seed) s.master_seed = *f.seed;
  if (!f.out.empty()) s.output_dir = f.out;
  if (f.workers) s.workers = *f.workers;
  if (f.budget) s.budget = true;
  if (!f.subject.empty()) {
    s.subject = SubjectSpec{};
    s.subject.strategy = parse_strategy(f.subject);
  }
  if (f.k) s.k = *f.k;
  if (f.rounds) s.n_rounds = *f.rounds;
  if (!f.alphas.empty()) s.alphas = f.alphas;
  if (!f.temperatures.empty()) s.temperatures = f.temperatures;
  if (!f.windows.empty()) {
    s.windows.clear();
    for (const auto& w : f.windows) s.windows.push_back(parse_memory_window(w));
  }
  s.validate();
  return s;
}

void report(const RunArtifact& art) {
  std::cout << "output: " << art.output_dir.string() << '\n';
  for (const auto& p : art.summary_paths) std::cout << "  " << p.filename().string() << '\n';
  if (!art.manifest_path.empty()) std::cout << "manifest: " << art.manifest_path.string() << '\n';
  std::cout << "failed games: " << art.games_failed << '\n';
}

Progress progress_printer() {
  return [](const std::string& cell, int done, int total) {
    std::cerr << "[" << cell << "] " << done << "/" << total << " games\n";
  };
}

void print_trace(const GameTrace& t) {
  std::cout << "A=" << t.agent_labels[0] << " B=" << t.agent_labels[1] << " seed=" << t.seed
            << '\n';
  int sa = 0, sb = 0;
  for (const auto& r : t.rounds) {
    sa += r.payoff_a;
    sb += r.payoff_b;
    std::cout << r.round_index << '\t' << to_string(r.action_a) << '\t' << to_string(r.action_b)
              << '\t' << r.payoff_a << '\t' << r.payoff_b << '\n';
  }
  std::cout << "total\t" << sa << '\t' << sb << '\n';
  if (t.failed) std::cout << "FAILED: " << t.failure << '\n';
}

std::optional<double> game_alpha(const StrategyKind& opponent) {
  if (opponent.type == StrategyKind::Type::URND) return opponent.p;
  if (opponent.type == StrategyKind::Type::RND) return 0.5;
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterated Prisoner's Dilemma laboratory"};
  app.require_subcommand(1);

  // play
  CommonFlags play_f;
  std::string play_opponent = "RND";
  bool play_jsonl = false;
  auto* play = app.add_subcommand("play", "Play one game and print its trace");
  add_common(play, play_f);
  play->add_option("--opponent", play_opponent, "Opponent strategy");
  play->add_flag("--jsonl", play_jsonl, "Print the trace as one JSONL line");

  CommonFlags alpha_f, window_f, temp_f, comp_f;
  auto* sweep_alpha = app.add_subcommand("sweep-alpha", "Subject vs URND(alpha) over a grid");
  add_common(sweep_alpha, alpha_f);
  sweep_alpha->add_option("--alphas", alpha_f.alphas, "Alpha grid");

  auto* sweep_window = app.add_subcommand("sweep-window", "Remote or scripted subject vs AD per window");
  add_common(sweep_window, window_f);
  sweep_window->add_option("--windows", window_f.windows, "Window grid (integers or full)");

  auto* sweep_temp = app.add_subcommand("sweep-temperature", "Alpha sweep per temperature");
  add_common(sweep_temp, temp_f);
  sweep_temp->add_option("--alphas", temp_f.alphas, "Alpha grid");
  sweep_temp->add_option("--temperatures", temp_f.temperatures, "Temperature grid");

  auto* comprehend = app.add_subcommand("comprehend", "Prompt comprehension questions");
  add_common(comprehend, comp_f);
  bool comp_oracle = false;
  comprehend->add_flag("--oracle", comp_oracle, "Use the built-in oracle subject");

  // sfem / metrics
  std::string an_traces;
  std::string an_player = "A";
  std::string an_out;
  int an_restarts = 10;
  auto* sfem_cmd = app.add_subcommand("sfem", "Fit strategy frequencies to a trace file");
  sfem_cmd->add_option("traces", an_traces, "JSONL trace file")->required()->check(CLI::ExistingFile);
  sfem_cmd->add_option("--player", an_player, "Seat to analyse (A or B)");
  sfem_cmd->add_option("--restarts", an_restarts, "EM restarts")->check(CLI::PositiveNumber);
  sfem_cmd->add_option("--out", an_out, "CSV output file");
  std::string m_traces;
  std::string m_player = "A";
  auto* metrics_cmd = app.add_subcommand("metrics", "Behavioral profile of a trace file");
  metrics_cmd->add_option("traces", m_traces, "JSONL trace file")->required()->check(CLI::ExistingFile);
  metrics_cmd->add_option("--player", m_player, "Seat to analyse (A or B)");

  std::string replay_in;
  std::string replay_out;
  auto* replay_cmd = app.add_subcommand("replay", "Recompute summaries from stored traces");
  replay_cmd->add_option("input", replay_in, "Run directory or JSONL file")->required()->check(CLI::ExistingPath);
  replay_cmd->add_option("--out", replay_out, "Summary directory (default <input>/replay)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (play->parsed()) {
      ExperimentSpec s = play_f.config.empty() ? ExperimentSpec{} : load_experiment_config(play_f.config);
      if (!play_f.subject.empty()) {
        s.subject = SubjectSpec{};
        s.subject.strategy = parse_strategy(play_f.subject);
      }
      const auto opp = parse_strategy(play_opponent);
      const int n = play_f.rounds.value_or(10);
      auto a = make_subject(s.subject, 0);
      StrategyAgent b(opp);
      const auto t = play_game(*a, b, n, s.matrix, play_f.seed.value_or(s.master_seed), game_alpha(opp));
      if (play_jsonl) {
        std::cout << to_jsonl_line(t) << '\n';
      } else {
        print_trace(t);
      }
      if (!play_f.out.empty()) write_jsonl(fs::path(play_f.out), std::span(&t, 1));
      return t.failed ? 1 : 0;
    }
    if (sweep_alpha->parsed()) {
      report(run_alpha_sweep(resolve(alpha_f, ExperimentKind::AlphaSweep), progress_printer()));
    } else if (sweep_window->parsed()) {
      report(run_window_sweep(resolve(window_f, ExperimentKind::WindowSweep), progress_printer()));
    } else if (sweep_temp->parsed()) {
      report(run_temperature_sweep(resolve(temp_f, ExperimentKind::TemperatureSweep),
                                   progress_printer()));
    } else if (comprehend->parsed()) {
      ExperimentSpec s = comp_f.config.empty() ? ExperimentSpec{} : load_experiment_config(comp_f.config);
      if (comp_oracle) s.subject.kind = SubjectSpec::Kind::Oracle;
      s.experiment = ExperimentKind::Comprehension;
      if (comp_f.seed) s.master_seed = *comp_f.seed;
      if (!comp_f.out.empty()) s.output_dir = comp_f.out;
      if (comp_f.rounds) s.n_rounds = *comp_f.rounds;
      if (comp_f.k) s.comprehension_games = *comp_f.k;
      s.validate();
      const auto art = run_comprehension_experiment(s);
      report(art);
      std::ifstream in(art.summary_paths.at(0));
      std::cout << in.rdbuf();
    } else if (sfem_cmd->parsed()) {
      const auto traces = read_jsonl(fs::path(an_traces));
      SfemConfig cfg;
      cfg.restarts = an_restarts;
      const auto f = fit(traces, parse_player(an_player), cfg);
      std::ostringstream csv;
      csv << "strategy,weight,score,degeneracy_group_id\n";
      for (std::size_t i = 0; i < f.strategies.size(); ++i) {
        csv << to_string(f.strategies[i]) << ',' << format_fixed(f.weights[i]) << ','
            << format_fixed(f.scores[i]) << ',' << f.degeneracy_group_id[i] << '\n';
      }
      std::cout << csv.str() << "beta," << format_fixed(f.beta) << "\nlog_likelihood,"
                << format_fixed(f.log_likelihood) << "\nconverged," << (f.converged ? 1 : 0)
                << "\n";
      if (!an_out.empty()) std::ofstream(an_out, std::ios::binary) << csv.str();
    } else if (metrics_cmd->parsed()) {
      const auto traces = read_jsonl(fs::path(m_traces));
      const auto p = aggregate_profile(traces, parse_player(m_player));
      std::cout << "dimension,mean,ci_low,ci_high,n_defined,n_games\n";
      for (Dimension d : kDimensions) {
        const auto& s = p[d];
        std::cout << to_string(d) << ',';
        if (s.value) {
          std::cout << format_fixed(s.value->mean) << ',' << format_fixed(s.value->low) << ','
                    << format_fixed(s.value->high);
        } else {
          std::cout << ",,";
        }
        std::cout << ',' << s.n_defined << ',' << s.n_games << '\n';
      }
    } else if (replay_cmd->parsed()) {
      const fs::path in(replay_in);
      const fs::path out = replay_out.empty()
                               ? (fs::is_directory(in) ? in / "replay" : in.parent_path() / "replay")
                               : fs::path(replay_out);
      report(replay(in, out));
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const TraceFormatError& e) {
    std::cerr << "trace error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
