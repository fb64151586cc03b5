#include "ipd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ipd/format.hpp"
#include "ipd/game.hpp"
#include "ipd/metrics.hpp"
#include "ipd/sfem.hpp"
#include "ipd/trace_io.hpp"

namespace ipd {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string alpha_id(double a) { return "alpha=" + format_real(a); }
std::string window_id(const MemoryWindow& w) { return "window=" + to_string(w); }
std::string temperature_id(double t) { return "temperature=" + format_real(t); }

std::string file_stem(std::string id) {
  for (char& c : id) {
    if (c == '=' || c == '/') c = '_';
  }
  return id;
}

std::string opt_real(const std::optional<double>& x) { return x ? format_real(*x) : ""; }

std::vector<Action> parse_action_string(const std::string& s) {
  std::vector<Action> out;
  for (char c : s) {
    if (c == 'C' || c == 'c') {
      out.push_back(Action::Cooperate);
    } else if (c == 'D' || c == 'd') {
      out.push_back(Action::Defect);
    } else if (c != ' ' && c != ',') {
      throw ConfigError(std::string("script contains '") + c + "', expected C or D");
    }
  }
  return out;
}

MemoryWindow window_from_json(const nlohmann::json& j) {
  if (j.is_string()) return parse_memory_window(j.get<std::string>());
  if (j.is_number_integer()) return parse_memory_window(std::to_string(j.get<long long>()));
  throw ConfigError("memory window must be an integer or \"full\"");
}

Json window_to_json(const MemoryWindow& w) { return w ? Json(*w) : Json("full"); }

AgentConfig parse_llm(const nlohmann::json& j) {
  AgentConfig c;
  c.endpoint_url = j.value("endpoint_url", c.endpoint_url);
  c.model_id = j.value("model_id", c.model_id);
  c.temperature = j.value("temperature", c.temperature);
  c.api_key_env_var = j.value("api_key_env_var", c.api_key_env_var);
  c.max_retries = j.value("max_retries", c.max_retries);
  if (j.contains("retry_backoff_ms")) {
    c.retry_backoff.clear();
    for (const auto& ms : j["retry_backoff_ms"]) {
      c.retry_backoff.emplace_back(ms.get<long long>());
    }
  }
  if (j.contains("request_timeout_ms")) {
    c.request_timeout = std::chrono::milliseconds(j["request_timeout_ms"].get<long long>());
  }
  if (j.contains("memory_window")) c.memory_window = window_from_json(j["memory_window"]);
  if (j.contains("instructing_variant")) {
    c.instructing_variant = parse_instructing_variant(j["instructing_variant"].get<std::string>());
  }
  if (j.contains("chat_format")) {
    c.chat_format = parse_chat_format(j["chat_format"].get<std::string>());
  }
  c.requests_per_minute = j.value("requests_per_minute", c.requests_per_minute);
  c.validate();
  return c;
}

SubjectSpec parse_subject(const nlohmann::json& j) {
  SubjectSpec s;
  if (j.is_string()) {
    s.strategy = parse_strategy(j.get<std::string>());
    return s;
  }
  const std::string type = j.value("type", "strategy");
  s.label = j.value("label", "");
  if (type == "strategy") {
    s.kind = SubjectSpec::Kind::Strategy;
    s.strategy = parse_strategy(j.value("name", "TFT"));
    s.tremble = j.value("tremble", 0.0);
    if (s.tremble < 0.0 || s.tremble > 1.0) throw ConfigError("tremble must lie in [0, 1]");
  } else if (type == "llm") {
    s.kind = SubjectSpec::Kind::Llm;
    s.llm = parse_llm(j);
  } else if (type == "scripted") {
    s.kind = SubjectSpec::Kind::Scripted;
    if (j.contains("actions")) {
      for (const auto& a : j["actions"]) s.scripts.push_back(parse_action_string(a.get<std::string>()));
    } else if (j.contains("traces")) {
      const Player seat = parse_player(j.value("seat", "A"));
      for (const auto& t : read_jsonl(fs::path(j["traces"].get<std::string>()))) {
        s.scripts.push_back(actions_of(t, seat));
      }
    }
    if (s.scripts.empty()) throw ConfigError("scripted subject needs 'actions' or 'traces'");
  } else if (type == "oracle") {
    s.kind = SubjectSpec::Kind::Oracle;
  } else {
    throw ConfigError("unknown subject type '" + type + "'");
  }
  return s;
}

Json subject_to_json(const SubjectSpec& s) {
  Json j;
  switch (s.kind) {
    case SubjectSpec::Kind::Strategy:
      j["type"] = "strategy";
      j["name"] = to_string(s.strategy);
      j["tremble"] = s.tremble;
      break;
    case SubjectSpec::Kind::Llm:
      j["type"] = "llm";
      j["endpoint_url"] = s.llm.endpoint_url;
      j["model_id"] = s.llm.model_id;
      j["temperature"] = s.llm.temperature;
      j["api_key_env_var"] = s.llm.api_key_env_var;
      j["max_retries"] = s.llm.max_retries;
      j["memory_window"] = window_to_json(s.llm.memory_window);
      j["instructing_variant"] = std::string(to_string(s.llm.instructing_variant));
      j["chat_format"] = std::string(to_string(s.llm.chat_format));
      j["requests_per_minute"] = s.llm.requests_per_minute;
      break;
    case SubjectSpec::Kind::Scripted: {
      j["type"] = "scripted";
      auto scripts = Json::array();
      for (const auto& sc : s.scripts) {
        std::string text;
        for (Action a : sc) text += a == Action::Cooperate ? 'C' : 'D';
        scripts.push_back(text);
      }
      j["actions"] = std::move(scripts);
      break;
    }
    case SubjectSpec::Kind::Oracle:
      j["type"] = "oracle";
      break;
  }
  if (!s.label.empty()) j["label"] = s.label;
  return j;
}

Json payoffs_to_json(const PayoffMatrix& m) {
  return Json{{"T", m.temptation()}, {"R", m.reward()}, {"P", m.punishment()}, {"S", m.sucker()}};
}

PayoffMatrix payoffs_from_json(const nlohmann::json& j) {
  return PayoffMatrix(j.at("T").get<int>(), j.at("R").get<int>(), j.at("P").get<int>(),
                      j.at("S").get<int>());
}

Json analysis_to_json(const AnalysisSettings& a) {
  return Json{{"payoffs", payoffs_to_json(a.matrix)},
              {"ci_method", a.ci.method == CiMethod::Bootstrap ? "bootstrap" : "normal"},
              {"ci_resamples", a.ci.resamples},
              {"ci_seed", a.ci.seed},
              {"sfem_restarts", a.sfem_restarts}};
}

AnalysisSettings analysis_from_json(const nlohmann::json& j) {
  AnalysisSettings a;
  a.matrix = payoffs_from_json(j.at("payoffs"));
  a.ci.method = j.at("ci_method") == "bootstrap" ? CiMethod::Bootstrap : CiMethod::Normal;
  a.ci.resamples = j.at("ci_resamples").get<int>();
  a.ci.seed = j.at("ci_seed").get<std::uint64_t>();
  a.sfem_restarts = j.at("sfem_restarts").get<int>();
  return a;
}

AnalysisSettings analysis_of(const ExperimentSpec& spec) {
  return {spec.matrix, spec.ci, spec.sfem_restarts};
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<GameTrace> completed(const std::vector<GameTrace>& traces) {
  std::vector<GameTrace> out;
  for (const auto& t : traces) {
    if (!t.failed) out.push_back(t);
  }
  return out;
}

// Last 10 rounds, or the whole game when shorter.
int steady_tail(const CoopCurve& c) { return std::min(10, static_cast<int>(c.per_round.size())); }

struct CellSummary {
  std::optional<CoopCurve> curve;
  double steady = 0.0;
};

CellSummary summarize_cell(const Cell& c, const CiOptions& ci) {
  CellSummary s;
  if (completed(c.traces).empty()) return s;
  s.curve = coop_prob_per_round(c.traces, Player::A, ci);
  s.steady = steady_state(*s.curve, steady_tail(*s.curve));
  return s;
}

void curve_rows(std::ostream& out, const std::string& key, const CellSummary& s) {
  if (!s.curve) return;
  for (const auto& p : s.curve->per_round) {
    out << key << ',' << p.round_index << ',' << format_fixed(p.mean) << ','
        << format_fixed(p.ci_low) << ',' << format_fixed(p.ci_high) << '\n';
  }
}

std::string summary_fields(const CellSummary& s) {
  if (!s.curve) return ",,,";
  return format_fixed(s.curve->overall_mean) + ',' + format_fixed(s.curve->overall_ci.first) +
         ',' + format_fixed(s.curve->overall_ci.second) + ',' + format_fixed(s.steady);
}

int n_completed(const Cell& c) { return static_cast<int>(c.traces.size()) - c.n_failed(); }

std::vector<fs::path> alpha_summaries(const std::vector<Cell>& cells, const AnalysisSettings& a,
                                      const fs::path& dir) {
  std::ostringstream curve, summary, profile, sfem;
  curve << "alpha,round,p_coop,ci_low,ci_high\n";
  summary << "alpha,p_coop,ci_low,ci_high,steady_state,n_games,n_failed\n";
  profile << "alpha,dimension,mean,ci_low,ci_high,n_defined,n_games\n";
  sfem << "alpha,strategy,weight,score,beta,log_likelihood,degeneracy_group_id\n";
  SfemConfig cfg;
  cfg.matrix = a.matrix;
  cfg.restarts = a.sfem_restarts;
  for (const auto& c : cells) {
    const std::string key = opt_real(c.alpha);
    const CellSummary s = summarize_cell(c, a.ci);
    curve_rows(curve, key, s);
    summary << key << ',' << summary_fields(s) << ',' << n_completed(c) << ',' << c.n_failed()
            << '\n';
    if (!s.curve) continue;
    const auto prof = aggregate_profile(c.traces, Player::A, a.ci);
    for (Dimension d : kDimensions) {
      const auto& ds = prof[d];
      profile << key << ',' << to_string(d) << ',';
      if (ds.value) {
        profile << format_fixed(ds.value->mean) << ',' << format_fixed(ds.value->low) << ','
                << format_fixed(ds.value->high);
      } else {
        profile << ",,";
      }
      profile << ',' << ds.n_defined << ',' << ds.n_games << '\n';
    }
    const SfemFit f = fit(c.traces, Player::A, cfg);
    for (std::size_t i = 0; i < f.strategies.size(); ++i) {
      sfem << key << ',' << to_string(f.strategies[i]) << ',' << format_fixed(f.weights[i]) << ','
           << format_fixed(f.scores[i]) << ',' << format_fixed(f.beta) << ','
           << format_fixed(f.log_likelihood) << ',' << f.degeneracy_group_id[i] << '\n';
    }
  }
  const std::vector<std::pair<std::string, std::string>> files{
      {"coop_curve.csv", curve.str()},
      {"coop_summary.csv", summary.str()},
      {"profile.csv", profile.str()},
      {"sfem.csv", sfem.str()}};
  std::vector<fs::path> out;
  for (const auto& [name, text] : files) {
    write_text(dir / name, text);
    out.push_back(dir / name);
  }
  return out;
}

std::vector<fs::path> window_summaries(const std::vector<Cell>& cells, const AnalysisSettings& a,
                                       const fs::path& dir) {
  std::ostringstream curve, summary;
  curve << "window,round,p_coop,ci_low,ci_high\n";
  summary << "window,steady_state,ci_low,ci_high,p_coop,n_games,n_failed\n";
  for (const auto& c : cells) {
    const std::string key = c.window ? to_string(*c.window) : "";
    const CellSummary s = summarize_cell(c, a.ci);
    curve_rows(curve, key, s);
    summary << key << ',';
    if (s.curve) {
      std::vector<double> tails;
      for (const auto& t : c.traces) {
        if (!t.failed) tails.push_back(tail_cooperation(t, Player::A, steady_tail(*s.curve)));
      }
      const Interval iv = summarize(tails, true, a.ci);
      summary << format_fixed(s.steady) << ',' << format_fixed(iv.low) << ','
              << format_fixed(iv.high) << ',' << format_fixed(s.curve->overall_mean);
    } else {
      summary << ",,,";
    }
    summary << ',' << n_completed(c) << ',' << c.n_failed() << '\n';
  }
  write_text(dir / "coop_curve.csv", curve.str());
  write_text(dir / "window_summary.csv", summary.str());
  return {dir / "coop_curve.csv", dir / "window_summary.csv"};
}

std::vector<fs::path> temperature_summaries(const std::vector<Cell>& cells,
                                            const AnalysisSettings& a, const fs::path& dir) {
  std::ostringstream summary, corr;
  summary << "temperature,alpha,p_coop,ci_low,ci_high,steady_state,n_games,n_failed\n";
  corr << "temperature_a,temperature_b,pearson,mean_a,mean_b,n_alphas\n";
  // temperature -> alpha -> overall p_coop, in first-seen order
  std::vector<double> temps;
  std::map<double, std::map<double, double>> curves;
  for (const auto& c : cells) {
    const CellSummary s = summarize_cell(c, a.ci);
    summary << opt_real(c.temperature) << ',' << opt_real(c.alpha) << ',' << summary_fields(s)
            << ',' << n_completed(c) << ',' << c.n_failed() << '\n';
    if (!c.temperature || !c.alpha) continue;
    if (!curves.count(*c.temperature)) temps.push_back(*c.temperature);
    auto& curve = curves[*c.temperature];
    if (s.curve) curve[*c.alpha] = s.curve->overall_mean;
  }
  for (std::size_t i = 0; i < temps.size(); ++i) {
    for (std::size_t j = i + 1; j < temps.size(); ++j) {
      std::vector<double> x, y;
      for (const auto& [alpha, v] : curves[temps[i]]) {
        const auto it = curves[temps[j]].find(alpha);
        if (it == curves[temps[j]].end()) continue;
        x.push_back(v);
        y.push_back(it->second);
      }
      corr << format_real(temps[i]) << ',' << format_real(temps[j]) << ',';
      try {
        corr << format_fixed(pearson(x, y));
      } catch (const std::invalid_argument&) {
        // undefined for constant or too-short curves
      }
      double mx = 0, my = 0;
      for (std::size_t t = 0; t < x.size(); ++t) {
        mx += x[t] / static_cast<double>(x.size());
        my += y[t] / static_cast<double>(y.size());
      }
      corr << ',' << format_fixed(mx) << ',' << format_fixed(my) << ',' << x.size() << '\n';
    }
  }
  write_text(dir / "coop_summary.csv", summary.str());
  write_text(dir / "temperature_correlation.csv", corr.str());
  return {dir / "coop_summary.csv", dir / "temperature_correlation.csv"};
}

Json cell_to_json(const Cell& c) {
  Json j;
  j["id"] = c.id;
  j["file"] = c.trace_file.generic_string();
  j["alpha"] = c.alpha ? Json(*c.alpha) : Json(nullptr);
  j["window"] = c.window ? window_to_json(*c.window) : Json(nullptr);
  j["temperature"] = c.temperature ? Json(*c.temperature) : Json(nullptr);
  j["opponent"] = c.opponent;
  j["k"] = c.traces.size();
  j["n_failed"] = c.n_failed();
  // A cell fails only when every game failed; its summaries are left empty.
  j["status"] = !c.traces.empty() && c.n_failed() == static_cast<int>(c.traces.size()) ? "failed" : "ok";
  auto failures = Json::array();
  auto seeds = Json::array();
  for (const auto& t : c.traces) {
    seeds.push_back(t.seed);
    if (t.failed) failures.push_back(t.failure);
  }
  j["failures"] = std::move(failures);
  j["seeds"] = std::move(seeds);
  return j;
}

Json spec_to_json(const ExperimentSpec& s) {
  Json j;
  j["experiment"] = std::string(to_string(s.experiment));
  j["alphas"] = s.alphas;
  auto windows = Json::array();
  for (const auto& w : s.windows) windows.push_back(window_to_json(w));
  j["windows"] = std::move(windows);
  j["temperatures"] = s.temperatures;
  j["k"] = s.k;
  j["n_rounds"] = s.n_rounds;
  j["subject"] = subject_to_json(s.subject);
  j["opponent"] = to_string(s.opponent);
  j["master_seed"] = s.master_seed;
  j["output_dir"] = s.output_dir.generic_string();
  j["workers"] = s.workers;
  j["budget"] = s.budget;
  j["payoffs"] = payoffs_to_json(s.matrix);
  j["comprehension_games"] = s.comprehension_games;
  return j;
}

RunArtifact finish_run(const ExperimentSpec& spec, std::vector<Cell>& cells) {
  const fs::path dir = spec.output_dir;
  RunArtifact art;
  art.output_dir = dir;
  fs::create_directories(dir / "traces");
  for (const auto& c : cells) {
    write_jsonl(dir / c.trace_file, c.traces);
    art.trace_paths.push_back(dir / c.trace_file);
    art.games_failed += c.n_failed();
  }
  const AnalysisSettings analysis = analysis_of(spec);
  art.summary_paths = write_summaries(spec.experiment, cells, analysis, dir);

  Json m;
  m["manifest_version"] = 1;
  m["experiment"] = std::string(to_string(spec.experiment));
  m["created_at"] = utc_timestamp();
  m["master_seed"] = spec.master_seed;
  m["config_text"] = spec.config_text.empty() ? Json(nullptr) : Json(spec.config_text);
  m["spec"] = spec_to_json(spec);
  m["analysis"] = analysis_to_json(analysis);
  auto jcells = Json::array();
  for (const auto& c : cells) jcells.push_back(cell_to_json(c));
  m["cells"] = std::move(jcells);
  auto summaries = Json::array();
  for (const auto& p : art.summary_paths) summaries.push_back(p.filename().string());
  m["summaries"] = std::move(summaries);
  m["games_failed"] = art.games_failed;
  art.manifest_path = dir / "manifest.json";
  write_text(art.manifest_path, m.dump(2) + "\n");
  return art;
}

std::function<std::unique_ptr<Agent>(int)> strategy_factory(const StrategyKind& k) {
  return [k](int) { return make_strategy_agent(k); };
}

}  // namespace

int Cell::n_failed() const {
  int n = 0;
  for (const auto& t : traces) n += t.failed ? 1 : 0;
  return n;
}

ExperimentKind parse_experiment_kind(std::string_view s) {
  if (s == "alpha_sweep") return ExperimentKind::AlphaSweep;
  if (s == "window_sweep") return ExperimentKind::WindowSweep;
  if (s == "temperature_sweep") return ExperimentKind::TemperatureSweep;
  if (s == "comprehension") return ExperimentKind::Comprehension;
  if (s == "replay") return ExperimentKind::Replay;
  throw ConfigError("unknown experiment '" + std::string(s) + "'");
}

std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::AlphaSweep: return "alpha_sweep";
    case ExperimentKind::WindowSweep: return "window_sweep";
    case ExperimentKind::TemperatureSweep: return "temperature_sweep";
    case ExperimentKind::Comprehension: return "comprehension";
    case ExperimentKind::Replay: return "replay";
  }
  return "?";
}

ExperimentSpec::ExperimentSpec() {
  for (int i = 0; i <= 10; ++i) alphas.push_back(i / 10.0);
}

void ExperimentSpec::validate() const {
  using K = SubjectSpec::Kind;
  if (k < 1) throw ConfigError("k must be >= 1");
  if (n_rounds < 1) throw ConfigError("n_rounds must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (sfem_restarts < 1) throw ConfigError("sfem_restarts must be >= 1");
  if (comprehension_games < 1) throw ConfigError("comprehension_games must be >= 1");
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("alphas must lie in [0, 1]");
  }
  for (double t : temperatures) {
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("temperatures must lie in [0, 1]");
  }
  for (const auto& w : windows) {
    if (w && *w < 1) throw ConfigError("windows must be >= 1 or full");
  }
  if (subject.kind == K::Scripted && subject.scripts.empty()) {
    throw ConfigError("scripted subject has no scripts");
  }
  if (subject.remote() && k < 100 && !budget &&
      experiment != ExperimentKind::Comprehension) {
    throw ConfigError("k < 100 with a remote subject requires --budget");
  }
  switch (experiment) {
    case ExperimentKind::AlphaSweep:
      if (alphas.empty()) throw ConfigError("alphas must not be empty");
      break;
    case ExperimentKind::WindowSweep:
      if (windows.empty()) throw ConfigError("windows must not be empty");
      if (subject.kind != K::Llm && subject.kind != K::Scripted) {
        throw ConfigError("window sweep needs a remote or scripted subject");
      }
      break;
    case ExperimentKind::TemperatureSweep:
      if (alphas.empty() || temperatures.empty()) {
        throw ConfigError("alphas and temperatures must not be empty");
      }
      if (subject.kind != K::Llm && subject.kind != K::Scripted) {
        throw ConfigError("temperature sweep needs a remote or scripted subject");
      }
      break;
    case ExperimentKind::Comprehension:
      if (subject.kind != K::Llm && subject.kind != K::Oracle) {
        throw ConfigError("comprehension needs a remote or oracle subject");
      }
      break;
    case ExperimentKind::Replay:
      break;
  }
}

ExperimentSpec parse_experiment_config(std::string_view json_text) {
  const auto j = nlohmann::json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("config is not a JSON object");
  ExperimentSpec s;
  s.config_text = std::string(json_text);
  try {
    if (j.contains("experiment")) s.experiment = parse_experiment_kind(j["experiment"].get<std::string>());
    if (j.contains("alphas")) s.alphas = j["alphas"].get<std::vector<double>>();
    if (j.contains("windows")) {
      s.windows.clear();
      for (const auto& w : j["windows"]) s.windows.push_back(window_from_json(w));
    }
    if (j.contains("temperatures")) s.temperatures = j["temperatures"].get<std::vector<double>>();
    s.k = j.value("k", s.k);
    s.n_rounds = j.value("n_rounds", s.n_rounds);
    if (j.contains("subject")) s.subject = parse_subject(j["subject"]);
    if (j.contains("opponent")) s.opponent = parse_strategy(j["opponent"].get<std::string>());
    s.master_seed = j.value("master_seed", s.master_seed);
    if (j.contains("output_dir")) s.output_dir = j["output_dir"].get<std::string>();
    s.workers = j.value("workers", s.workers);
    s.budget = j.value("budget", s.budget);
    if (j.contains("payoffs")) s.matrix = payoffs_from_json(j["payoffs"]);
    if (j.contains("ci_method")) {
      const auto m = j["ci_method"].get<std::string>();
      if (m != "normal" && m != "bootstrap") throw ConfigError("ci_method must be normal or bootstrap");
      s.ci.method = m == "bootstrap" ? CiMethod::Bootstrap : CiMethod::Normal;
    }
    s.sfem_restarts = j.value("sfem_restarts", s.sfem_restarts);
    s.comprehension_games = j.value("comprehension_games", s.comprehension_games);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config field: ") + e.what());
  }
  return s;
}

ExperimentSpec load_experiment_config(const fs::path& path) {
  return parse_experiment_config(read_text(path));
}

std::uint64_t game_seed(std::uint64_t master_seed, std::string_view cell_id, int g) {
  return derive_seed(master_seed, cell_id, static_cast<std::uint64_t>(g));
}

std::unique_ptr<Agent> make_subject(const SubjectSpec& s, int g, std::optional<double> temperature,
                                    std::optional<MemoryWindow> window) {
  switch (s.kind) {
    case SubjectSpec::Kind::Strategy:
      if (s.tremble > 0.0) return std::make_unique<TremblingStrategyAgent>(s.strategy, s.tremble);
      return std::make_unique<StrategyAgent>(s.strategy);
    case SubjectSpec::Kind::Llm: {
      AgentConfig cfg = s.llm;
      if (temperature) cfg.temperature = *temperature;
      if (window) cfg.memory_window = *window;
      return LlmAgent::from_config(cfg, s.label);
    }
    case SubjectSpec::Kind::Scripted:
      return std::make_unique<ScriptedAgent>(s.scripts[static_cast<std::size_t>(g) % s.scripts.size()],
                                             s.label.empty() ? "scripted" : s.label);
    case SubjectSpec::Kind::Oracle:
      return std::make_unique<OracleAgent>();
  }
  throw ConfigError("unknown subject kind");
}

std::vector<GameTrace> play_cell(const std::function<std::unique_ptr<Agent>(int)>& make_a,
                                 const std::function<std::unique_ptr<Agent>(int)>& make_b, int k,
                                 int n_rounds, const PayoffMatrix& m, std::uint64_t master_seed,
                                 std::string_view seed_cell_id, std::optional<double> alpha,
                                 int workers) {
  std::vector<GameTrace> out(static_cast<std::size_t>(k));
  std::atomic<int> next{0};
  std::mutex err_mu;
  std::exception_ptr error;
  auto work = [&] {
    for (int g = next++; g < k; g = next++) {
      try {
        auto a = make_a(g);
        auto b = make_b(g);
        out[static_cast<std::size_t>(g)] =
            play_game(*a, *b, n_rounds, m, game_seed(master_seed, seed_cell_id, g), alpha);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!error) error = std::current_exception();
        next = k;
      }
    }
  };
  const int n_threads = std::max(1, std::min(workers, k));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

RunArtifact run_alpha_sweep(const ExperimentSpec& spec, const Progress& progress) {
  spec.validate();
  std::vector<Cell> cells;
  for (double alpha : spec.alphas) {
    Cell c;
    c.id = alpha_id(alpha);
    c.alpha = alpha;
    c.opponent = to_string(StrategyKind::urnd(alpha));
    c.trace_file = fs::path("traces") / (file_stem(c.id) + ".jsonl");
    c.traces = play_cell([&](int g) { return make_subject(spec.subject, g); },
                         strategy_factory(StrategyKind::urnd(alpha)), spec.k, spec.n_rounds,
                         spec.matrix, spec.master_seed, c.id, alpha, spec.workers);
    if (progress) progress(c.id, spec.k, spec.k);
    cells.push_back(std::move(c));
  }
  return finish_run(spec, cells);
}

RunArtifact run_window_sweep(const ExperimentSpec& spec, const Progress& progress) {
  spec.validate();
  std::vector<Cell> cells;
  for (const auto& w : spec.windows) {
    Cell c;
    c.id = window_id(w);
    c.window = w;
    c.opponent = to_string(spec.opponent);
    c.trace_file = fs::path("traces") / (file_stem(c.id) + ".jsonl");
    c.traces = play_cell([&](int g) { return make_subject(spec.subject, g, std::nullopt, w); },
                         strategy_factory(spec.opponent), spec.k, spec.n_rounds, spec.matrix,
                         spec.master_seed, c.id, std::nullopt, spec.workers);
    if (progress) progress(c.id, spec.k, spec.k);
    cells.push_back(std::move(c));
  }
  return finish_run(spec, cells);
}

RunArtifact run_temperature_sweep(const ExperimentSpec& spec, const Progress& progress) {
  spec.validate();
  std::vector<Cell> cells;
  for (double temp : spec.temperatures) {
    for (double alpha : spec.alphas) {
      Cell c;
      c.id = temperature_id(temp) + "/" + alpha_id(alpha);
      c.alpha = alpha;
      c.temperature = temp;
      c.opponent = to_string(StrategyKind::urnd(alpha));
      c.trace_file = fs::path("traces") / (file_stem(c.id) + ".jsonl");
      // Opponent draws are shared across temperatures.
      c.traces = play_cell([&](int g) { return make_subject(spec.subject, g, temp); },
                           strategy_factory(StrategyKind::urnd(alpha)), spec.k, spec.n_rounds,
                           spec.matrix, spec.master_seed, alpha_id(alpha), alpha, spec.workers);
      if (progress) progress(c.id, spec.k, spec.k);
      cells.push_back(std::move(c));
    }
  }
  return finish_run(spec, cells);
}

RunArtifact run_comprehension_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ComprehensionOptions o;
  o.n_games = spec.comprehension_games;
  o.n_rounds = spec.n_rounds;
  o.matrix = spec.matrix;
  o.seed = spec.master_seed;
  o.ci = spec.ci;
  GradeReport report;
  if (spec.subject.kind == SubjectSpec::Kind::Oracle) {
    OracleAgent oracle;
    report = run_comprehension(oracle, oracle, o);
  } else {
    auto agent = LlmAgent::from_config(spec.subject.llm);
    LlmAnswerer answerer(*agent);
    o.window = spec.subject.llm.memory_window;
    report = run_comprehension(*agent, answerer, o);
  }
  RunArtifact art;
  art.output_dir = spec.output_dir;
  fs::create_directories(spec.output_dir);
  std::ostringstream csv;
  write_report_csv(csv, report);
  write_text(spec.output_dir / "comprehension.csv", csv.str());
  art.summary_paths.push_back(spec.output_dir / "comprehension.csv");
  Json m;
  m["manifest_version"] = 1;
  m["experiment"] = "comprehension";
  m["created_at"] = utc_timestamp();
  m["master_seed"] = spec.master_seed;
  m["config_text"] = spec.config_text.empty() ? Json(nullptr) : Json(spec.config_text);
  m["spec"] = spec_to_json(spec);
  m["partial"] = report.partial;
  m["failure"] = report.failure;
  m["cells"] = Json::array();
  m["summaries"] = Json::array({"comprehension.csv"});
  art.manifest_path = spec.output_dir / "manifest.json";
  write_text(art.manifest_path, m.dump(2) + "\n");
  return art;
}

RunArtifact run_experiment(const ExperimentSpec& spec, const Progress& progress) {
  switch (spec.experiment) {
    case ExperimentKind::AlphaSweep: return run_alpha_sweep(spec, progress);
    case ExperimentKind::WindowSweep: return run_window_sweep(spec, progress);
    case ExperimentKind::TemperatureSweep: return run_temperature_sweep(spec, progress);
    case ExperimentKind::Comprehension: return run_comprehension_experiment(spec);
    case ExperimentKind::Replay: break;
  }
  throw ConfigError("replay needs an input path; use replay()");
}

std::vector<fs::path> write_summaries(ExperimentKind kind, const std::vector<Cell>& cells,
                                      const AnalysisSettings& settings, const fs::path& dir) {
  fs::create_directories(dir);
  switch (kind) {
    case ExperimentKind::AlphaSweep: return alpha_summaries(cells, settings, dir);
    case ExperimentKind::WindowSweep: return window_summaries(cells, settings, dir);
    case ExperimentKind::TemperatureSweep: return temperature_summaries(cells, settings, dir);
    case ExperimentKind::Comprehension:
    case ExperimentKind::Replay: break;
  }
  return {};
}

RunArtifact replay(const fs::path& input, const fs::path& out_dir) {
  RunArtifact art;
  art.output_dir = out_dir;
  std::vector<Cell> cells;
  ExperimentKind kind = ExperimentKind::AlphaSweep;
  AnalysisSettings settings;

  if (fs::is_directory(input)) {
    const auto m = nlohmann::json::parse(read_text(input / "manifest.json"));
    kind = parse_experiment_kind(m.at("experiment").get<std::string>());
    if (kind == ExperimentKind::Comprehension) {
      throw ConfigError("comprehension runs keep no traces to replay");
    }
    settings = analysis_from_json(m.at("analysis"));
    for (const auto& jc : m.at("cells")) {
      Cell c;
      c.id = jc.at("id").get<std::string>();
      if (!jc.at("alpha").is_null()) c.alpha = jc["alpha"].get<double>();
      if (!jc.at("window").is_null()) c.window = window_from_json(jc["window"]);
      if (!jc.at("temperature").is_null()) c.temperature = jc["temperature"].get<double>();
      c.opponent = jc.value("opponent", "");
      c.trace_file = jc.at("file").get<std::string>();
      c.traces = read_jsonl(input / c.trace_file);
      art.trace_paths.push_back(input / c.trace_file);
      cells.push_back(std::move(c));
    }
  } else {
    // Group a bare trace file into cells by alpha, in order of first appearance.
    for (auto& t : read_jsonl(input)) {
      auto it = std::find_if(cells.begin(), cells.end(),
                             [&](const Cell& c) { return c.alpha == t.alpha; });
      if (it == cells.end()) {
        Cell c;
        c.alpha = t.alpha;
        c.id = t.alpha ? alpha_id(*t.alpha) : "all";
        cells.push_back(std::move(c));
        it = cells.end() - 1;
      }
      it->traces.push_back(std::move(t));
    }
    art.trace_paths.push_back(input);
  }
  for (const auto& c : cells) art.games_failed += c.n_failed();
  art.summary_paths = write_summaries(kind, cells, settings, out_dir);
  return art;
}

}  // namespace ipd
