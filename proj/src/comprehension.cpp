#include "ipd/comprehension.hpp"

#include <algorithm>
#include <cctype>
#include <ostream>
#include <regex>

#include "ipd/format.hpp"
#include "ipd/game.hpp"
#include "ipd/strategy.hpp"
#include "json_extract.hpp"

namespace ipd {
namespace {

constexpr Action kActions[] = {Action::Cooperate, Action::Defect};
constexpr Player kPlayers[] = {Player::A, Player::B};

std::string quoted(Action a) { return "\"" + std::string(to_string(a)) + "\""; }
std::string name(Player p) { return std::string(to_string(p)); }

void add(std::vector<QuestionInstance>& out, QuestionTemplate t, std::string text,
         GroundTruth truth) {
  out.push_back({t, std::move(text), std::move(truth)});
}

void expand(QuestionTemplate t, const QuestionState& s, std::vector<QuestionInstance>& out) {
  const HistoryView shown = window_slice(s.history, s.window);
  const WindowTotals totals = window_totals(shown);
  const PayoffMatrix& m = s.matrix;
  switch (t) {
    case QuestionTemplate::MinMax: {
      int lo = m.points(Action::Cooperate, Action::Cooperate), hi = lo;
      for (Action a : kActions) {
        for (Action b : kActions) {
          lo = std::min(lo, m.points(a, b));
          hi = std::max(hi, m.points(a, b));
        }
      }
      add(out, t, "What is the lowest payoff player A can get in a single round?", GroundTruth::of(lo));
      add(out, t, "What is the highest payoff player A can get in a single round?", GroundTruth::of(hi));
      break;
    }
    case QuestionTemplate::Actions:
      add(out, t, "Which actions is player A allowed to play?",
          GroundTruth::of_set({Action::Cooperate, Action::Defect}));
      break;
    case QuestionTemplate::Payoff:
      for (Player x : kPlayers) {
        for (Action p : kActions) {
          for (Action q : kActions) {
            add(out, t,
                "Which is player " + name(x) + "'s payoff in a single round if " + name(x) +
                    " plays " + quoted(p) + " and " + name(other(x)) + " plays " + quoted(q) + "?",
                GroundTruth::of(m.points(p, q)));
          }
        }
      }
      break;
    case QuestionTemplate::Round:
      add(out, t, "Which is the current round of the game?", GroundTruth::of(s.current_round));
      break;
    case QuestionTemplate::ActionI:
      for (Player x : kPlayers) {
        for (const auto& r : shown) {
          add(out, t,
              "Which action did player " + name(x) + " play in round " +
                  std::to_string(r.round_index) + "?",
              GroundTruth::of(r.action_of(x)));
        }
      }
      break;
    case QuestionTemplate::PointsI:
      for (Player x : kPlayers) {
        for (const auto& r : shown) {
          add(out, t,
              "How many points did player " + name(x) + " collect in round " +
                  std::to_string(r.round_index) + "?",
              GroundTruth::of(r.payoff_of(x)));
        }
      }
      break;
    case QuestionTemplate::NActions:
      for (Player x : kPlayers) {
        for (Action p : kActions) {
          add(out, t, "How many times did player " + name(x) + " choose " + quoted(p) + "?",
              GroundTruth::of(totals.count(x, p)));
        }
      }
      break;
    case QuestionTemplate::NPoints:
      for (Player x : kPlayers) {
        add(out, t, "What is player " + name(x) + "'s current total payoff?",
            GroundTruth::of(totals.points(x)));
      }
      break;
  }
}

std::optional<Action> action_word(const std::string& lower) {
  if (lower == "cooperate") return Action::Cooperate;
  if (lower == "defect") return Action::Defect;
  return std::nullopt;
}

std::string strip_quotes(std::string s) {
  while (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

GradeOutcome grade_integer(const nlohmann::json& v, int expected) {
  const std::string text = v.is_string() ? v.get<std::string>() : v.dump();
  static const std::regex kInt("-?[0-9]+");
  std::smatch match;
  if (!std::regex_search(text, match, kInt)) return GradeOutcome::Unparseable;
  try {
    return std::stoi(match.str()) == expected ? GradeOutcome::Correct : GradeOutcome::Wrong;
  } catch (const std::out_of_range&) {
    return GradeOutcome::Wrong;
  }
}

GradeOutcome grade_action(const nlohmann::json& v, Action expected) {
  if (!v.is_string()) return GradeOutcome::Unparseable;
  const auto a = action_word(strip_quotes(detail::trim_lower(v.get<std::string>())));
  if (!a) return GradeOutcome::Unparseable;
  return *a == expected ? GradeOutcome::Correct : GradeOutcome::Wrong;
}

void collect_actions(const std::string& text, std::vector<Action>& out) {
  std::string word;
  auto flush = [&] {
    if (const auto a = action_word(word)) out.push_back(*a);
    word.clear();
  };
  for (char c : text) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      flush();
    }
  }
  flush();
}

GradeOutcome grade_set(const nlohmann::json& v, const std::vector<Action>& expected) {
  std::vector<Action> got;
  if (v.is_array()) {
    for (const auto& e : v) {
      if (e.is_string()) collect_actions(e.get<std::string>(), got);
    }
  } else if (v.is_string()) {
    collect_actions(v.get<std::string>(), got);
  }
  if (got.empty()) return GradeOutcome::Unparseable;
  std::sort(got.begin(), got.end());
  got.erase(std::unique(got.begin(), got.end()), got.end());
  return got == expected ? GradeOutcome::Correct : GradeOutcome::Wrong;
}

}  // namespace

std::string_view to_string(QuestionTemplate t) {
  switch (t) {
    case QuestionTemplate::MinMax: return "min_max";
    case QuestionTemplate::Actions: return "actions";
    case QuestionTemplate::Payoff: return "payoff";
    case QuestionTemplate::Round: return "round";
    case QuestionTemplate::ActionI: return "action_i";
    case QuestionTemplate::PointsI: return "points_i";
    case QuestionTemplate::NActions: return "n_actions";
    case QuestionTemplate::NPoints: return "n_points";
  }
  return "?";
}

std::string_view to_string(QuestionCategory c) {
  switch (c) {
    case QuestionCategory::Rules: return "Rules";
    case QuestionCategory::Time: return "Time";
    case QuestionCategory::State: return "State";
  }
  return "?";
}

QuestionCategory category_of(QuestionTemplate t) {
  switch (t) {
    case QuestionTemplate::MinMax:
    case QuestionTemplate::Actions:
    case QuestionTemplate::Payoff: return QuestionCategory::Rules;
    case QuestionTemplate::Round:
    case QuestionTemplate::ActionI:
    case QuestionTemplate::PointsI: return QuestionCategory::Time;
    case QuestionTemplate::NActions:
    case QuestionTemplate::NPoints: return QuestionCategory::State;
  }
  return QuestionCategory::Rules;
}

QuestionTemplate parse_question_template(std::string_view s) {
  for (auto t : kQuestionTemplates) {
    if (to_string(t) == s) return t;
  }
  throw ConfigError("unknown question template '" + std::string(s) + "'");
}

GroundTruth GroundTruth::of_set(std::vector<Action> s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return {Kind::ActionSet, 0, Action::Cooperate, std::move(s)};
}

std::string GroundTruth::to_json() const {
  switch (kind) {
    case Kind::Integer: return std::to_string(integer);
    case Kind::ActionName: return quoted(action);
    case Kind::ActionSet: {
      std::string s = "[";
      for (std::size_t i = 0; i < actions.size(); ++i) {
        if (i) s += ", ";
        s += quoted(actions[i]);
      }
      return s + "]";
    }
  }
  return "null";
}

std::vector<QuestionInstance> instantiate(std::span<const QuestionTemplate> templates,
                                          const QuestionState& state) {
  if (state.current_round < 1) throw std::invalid_argument("current_round must be >= 1");
  std::vector<QuestionInstance> out;
  for (auto t : templates) expand(t, state, out);
  return out;
}

GradeOutcome grade(const QuestionInstance& q, std::string_view reply_text) {
  const auto obj = detail::find_json_object(reply_text, "answer");
  if (!obj) return GradeOutcome::Unparseable;
  const auto& v = (*obj)["answer"];
  switch (q.truth.kind) {
    case GroundTruth::Kind::Integer: return grade_integer(v, q.truth.integer);
    case GroundTruth::Kind::ActionName: return grade_action(v, q.truth.action);
    case GroundTruth::Kind::ActionSet: return grade_set(v, q.truth.actions);
  }
  return GradeOutcome::Unparseable;
}

std::string build_question_prompt(const QuestionInstance& q, ChatFormat fmt) {
  const std::string close = fmt == ChatFormat::LlamaMarkers ? "[/INST]" : "";
  return "\nAnswer the following question about the game.\n" + q.text +
         "\n\nRemember to use only the following JSON format:\n"
         "{\"answer\": <YOUR_ANSWER>}\n\n"
         "Remember to answer using the right format." +
         close + "\n";
}

Action OracleAgent::decide(HistoryView, Rng& rng) {
  return rng.bernoulli(0.5) ? Action::Cooperate : Action::Defect;
}

std::string OracleAgent::answer(const QuestionState&, int, const QuestionInstance& q) {
  return "{\"answer\": " + q.truth.to_json() + "}";
}

std::string LlmAnswerer::answer(const QuestionState& state, int n_rounds,
                                const QuestionInstance& q) {
  const ChatFormat fmt = agent_.config().chat_format;
  const PromptBundle bundle{build_system_prompt(state.matrix, n_rounds, fmt),
                            build_contextual_prompt(state.history, state.window,
                                                    state.current_round),
                            build_question_prompt(q, fmt)};
  return agent_.complete_with_retries(to_messages(bundle));
}

const TemplateScore& GradeReport::operator[](QuestionTemplate t) const {
  for (const auto& s : per_template) {
    if (s.template_id == t) return s;
  }
  throw std::out_of_range("template not in report");
}

GradeReport run_comprehension(Agent& player, QuestionAnswerer& answerer,
                              const ComprehensionOptions& opts) {
  if (opts.n_games < 1 || opts.n_rounds < 1) {
    throw std::invalid_argument("n_games and n_rounds must be >= 1");
  }
  std::array<std::vector<double>, kQuestionTemplates.size()> samples;
  std::array<int, kQuestionTemplates.size()> unparseable{};
  GradeReport report;

  for (int g = 0; g < opts.n_games && !report.partial; ++g) {
    StrategyAgent opponent(StrategyKind::rnd());
    const GameTrace trace = play_game(player, opponent, opts.n_rounds, opts.matrix,
                                      derive_seed(opts.seed, "comprehension", g));
    if (trace.failed) {
      report.partial = true;
      report.failure = "game " + std::to_string(g) + ": " + trace.failure;
    }
    const HistoryView rounds(trace.rounds);
    for (std::size_t r = 0; r < rounds.size(); ++r) {
      const QuestionState state{opts.matrix, rounds.first(r), opts.window,
                                static_cast<int>(r) + 1};
      try {
        for (const auto& q : instantiate(kQuestionTemplates, state)) {
          const auto outcome = grade(q, answerer.answer(state, opts.n_rounds, q));
          const auto idx = static_cast<std::size_t>(q.template_id);
          samples[idx].push_back(outcome == GradeOutcome::Correct ? 1.0 : 0.0);
          if (outcome == GradeOutcome::Unparseable) ++unparseable[idx];
        }
      } catch (const AgentFailure& e) {
        report.partial = true;
        report.failure = "game " + std::to_string(g) + ", round " + std::to_string(r + 1) +
                         ": " + e.what();
        break;
      }
    }
  }

  for (std::size_t i = 0; i < kQuestionTemplates.size(); ++i) {
    TemplateScore s;
    s.template_id = kQuestionTemplates[i];
    s.n_asked = static_cast<int>(samples[i].size());
    s.n_correct = static_cast<int>(std::count(samples[i].begin(), samples[i].end(), 1.0));
    s.n_unparseable = unparseable[i];
    if (s.n_asked > 0) {
      s.accuracy = summarize(samples[i], true, opts.ci);
      s.accuracy.mean = static_cast<double>(s.n_correct) / s.n_asked;
    }
    report.per_template.push_back(s);
  }
  return report;
}

void write_report_csv(std::ostream& out, const GradeReport& report) {
  out << "template,category,n_asked,n_correct,accuracy,ci_low,ci_high,n_unparseable\n";
  for (const auto& s : report.per_template) {
    out << to_string(s.template_id) << ',' << to_string(category_of(s.template_id)) << ','
        << s.n_asked << ',' << s.n_correct << ',' << format_fixed(s.accuracy.mean) << ','
        << format_fixed(s.accuracy.low) << ',' << format_fixed(s.accuracy.high) << ','
        << s.n_unparseable << '\n';
  }
}

}  // namespace ipd
