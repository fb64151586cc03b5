#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ipd/agent.hpp"
#include "ipd/llm_agent.hpp"
#include "ipd/prompt.hpp"
#include "ipd/stats.hpp"

namespace ipd {

enum class QuestionTemplate { MinMax, Actions, Payoff, Round, ActionI, PointsI, NActions, NPoints };
enum class QuestionCategory { Rules, Time, State };

inline constexpr std::array<QuestionTemplate, 8> kQuestionTemplates{
    QuestionTemplate::MinMax, QuestionTemplate::Actions, QuestionTemplate::Payoff,
    QuestionTemplate::Round,  QuestionTemplate::ActionI, QuestionTemplate::PointsI,
    QuestionTemplate::NActions, QuestionTemplate::NPoints};

std::string_view to_string(QuestionTemplate t);
std::string_view to_string(QuestionCategory c);
QuestionCategory category_of(QuestionTemplate t);
QuestionTemplate parse_question_template(std::string_view s);

/// Expected answer: an integer, an action name or a set of action names.
struct GroundTruth {
  enum class Kind { Integer, ActionName, ActionSet };
  Kind kind = Kind::Integer;
  int integer = 0;
  Action action = Action::Cooperate;
  std::vector<Action> actions;  // sorted, for ActionSet

  static GroundTruth of(int v) { return {Kind::Integer, v, Action::Cooperate, {}}; }
  static GroundTruth of(Action a) { return {Kind::ActionName, 0, a, {}}; }
  static GroundTruth of_set(std::vector<Action> s);

  /// The value as a JSON fragment, e.g. 12, "Cooperate", ["Cooperate", "Defect"].
  std::string to_json() const;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct QuestionInstance {
  QuestionTemplate template_id = QuestionTemplate::Round;
  std::string text;
  GroundTruth truth;
};

/// A game state as seen by the agent: seat A is the agent.
struct QuestionState {
  PayoffMatrix matrix;
  HistoryView history;  // completed rounds
  MemoryWindow window;
  int current_round = 1;  // |history| + 1
};

/// All questions for one state. Round-specific questions cover only the rounds
/// inside the window; totals cover the window, like the contextual prompt.
std::vector<QuestionInstance> instantiate(std::span<const QuestionTemplate> templates,
                                          const QuestionState& state);

enum class GradeOutcome { Correct, Wrong, Unparseable };

/// Reads the "answer" field of the first JSON object that has one. Integers
/// compare on the first integer token, action names case-insensitively,
/// action sets as sets.
GradeOutcome grade(const QuestionInstance& q, std::string_view reply_text);

/// Replaces the action request while a question is being asked.
std::string build_question_prompt(const QuestionInstance& q, ChatFormat fmt);

class QuestionAnswerer {
 public:
  virtual ~QuestionAnswerer() = default;
  /// Raw reply text. Throws AgentFailure when no reply can be obtained.
  virtual std::string answer(const QuestionState& state, int n_rounds,
                             const QuestionInstance& q) = 0;
};

/// Replies with the ground truth. Plays uniformly at random.
class OracleAgent : public Agent, public QuestionAnswerer {
 public:
  std::string label() const override { return "oracle"; }
  Action decide(HistoryView history, Rng& rng) override;
  std::string answer(const QuestionState& state, int n_rounds,
                     const QuestionInstance& q) override;
};

/// Poses questions to a remote model using the agent's prompt settings.
class LlmAnswerer : public QuestionAnswerer {
 public:
  explicit LlmAnswerer(LlmAgent& agent) : agent_(agent) {}
  std::string answer(const QuestionState& state, int n_rounds,
                     const QuestionInstance& q) override;

 private:
  LlmAgent& agent_;
};

struct TemplateScore {
  QuestionTemplate template_id = QuestionTemplate::Round;
  int n_asked = 0;
  int n_correct = 0;
  int n_unparseable = 0;
  Interval accuracy;  // mean = n_correct / n_asked
};

struct GradeReport {
  std::vector<TemplateScore> per_template;  // in kQuestionTemplates order
  bool partial = false;
  std::string failure;

  const TemplateScore& operator[](QuestionTemplate t) const;
};

struct ComprehensionOptions {
  int n_games = 3;
  int n_rounds = 100;
  MemoryWindow window = 10;
  PayoffMatrix matrix;
  std::uint64_t seed = 0;
  CiOptions ci;
};

/// Plays `player` against RND and, at every round of every game, asks all
/// template instances about the state before that round's moves.
GradeReport run_comprehension(Agent& player, QuestionAnswerer& answerer,
                              const ComprehensionOptions& opts);

/// Columns: template, category, n_asked, n_correct, accuracy, ci_low, ci_high, n_unparseable.
void write_report_csv(std::ostream& out, const GradeReport& report);

}  // namespace ipd
