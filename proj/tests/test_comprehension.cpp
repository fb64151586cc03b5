#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "ipd/comprehension.hpp"
#include "ipd/game.hpp"
#include "ipd/strategy.hpp"

using namespace ipd;

namespace {

constexpr Action C = Action::Cooperate;
constexpr Action D = Action::Defect;

std::vector<QuestionInstance> of(QuestionTemplate t, const QuestionState& s) {
  const QuestionTemplate ts[] = {t};
  return instantiate(ts, s);
}

const QuestionInstance& find(const std::vector<QuestionInstance>& qs, std::string_view needle) {
  const auto it = std::find_if(qs.begin(), qs.end(), [&](const auto& q) {
    return q.text.find(needle) != std::string::npos;
  });
  REQUIRE_MESSAGE(it != qs.end(), needle);
  return *it;
}

// Answers every question with a constant JSON value.
class ConstantAnswerer : public QuestionAnswerer {
 public:
  explicit ConstantAnswerer(std::string value) : value_(std::move(value)) {}
  std::string answer(const QuestionState&, int, const QuestionInstance&) override {
    return "{\"answer\": " + value_ + "}";
  }

 private:
  std::string value_;
};

class FailingAnswerer : public QuestionAnswerer {
 public:
  std::string answer(const QuestionState& s, int, const QuestionInstance& q) override {
    if (s.current_round == 3) throw AgentFailure("backend down");
    return "{\"answer\": " + q.truth.to_json() + "}";
  }
};

const auto kState = trace_from_actions("CCDCDD", "CDDDCD", PayoffMatrix{}).rounds;

}  // namespace

TEST_CASE("rules questions derive from the configured matrix") {
  const QuestionState s{PayoffMatrix{}, {}, 10, 1};
  const auto pay = of(QuestionTemplate::Payoff, s);
  CHECK(pay.size() == 8);
  CHECK(find(pay, "player A's payoff in a single round if A plays \"Cooperate\" and B plays \"Defect\"")
            .truth == GroundTruth::of(0));
  CHECK(find(pay, "player B's payoff in a single round if B plays \"Defect\" and A plays \"Cooperate\"")
            .truth == GroundTruth::of(5));
  const auto mm = of(QuestionTemplate::MinMax, QuestionState{PayoffMatrix(7, 4, 2, 1), {}, 10, 1});
  CHECK(find(mm, "lowest").truth == GroundTruth::of(1));
  CHECK(find(mm, "highest").truth == GroundTruth::of(7));
  const auto acts = of(QuestionTemplate::Actions, s);
  REQUIRE(acts.size() == 1);
  CHECK(acts[0].truth.actions == std::vector<Action>{C, D});
}

TEST_CASE("time questions cover the current round and the visible window") {
  const QuestionState s{PayoffMatrix{}, kState, 5, 7};
  const auto round = of(QuestionTemplate::Round, s);
  REQUIRE(round.size() == 1);
  CHECK(round[0].truth == GroundTruth::of(7));
  const auto act = of(QuestionTemplate::ActionI, s);
  CHECK(act.size() == 10);
  CHECK(std::none_of(act.begin(), act.end(),
                     [](const auto& q) { return q.text.find("round 1?") != std::string::npos; }));
  CHECK(find(act, "player B play in round 5?").truth == GroundTruth::of(C));
  CHECK(find(of(QuestionTemplate::PointsI, s), "player A collect in round 5?").truth ==
        GroundTruth::of(5));
}

TEST_CASE("coverage is min(window, round - 1) per player") {
  std::string a, b;
  for (int i = 0; i < 30; ++i) {
    a += "CD"[i % 2];
    b += "DCC"[i % 3];
  }
  const auto h = trace_from_actions(a, b, PayoffMatrix{}).rounds;
  for (int window : {1, 5, 10, 50}) {
    for (int r = 1; r <= 31; r += 3) {
      const QuestionState s{PayoffMatrix{}, HistoryView(h).first(r - 1), window, r};
      const auto expected = 2 * std::min(window, r - 1);
      CHECK(static_cast<int>(of(QuestionTemplate::ActionI, s).size()) == expected);
      CHECK(static_cast<int>(of(QuestionTemplate::PointsI, s).size()) == expected);
    }
  }
}

TEST_CASE("state ground truths equal the prompt totals") {
  const QuestionState s{PayoffMatrix{}, kState, 5, 7};
  const auto pts = of(QuestionTemplate::NPoints, s);
  CHECK(find(pts, "player B's").truth == GroundTruth::of(12));
  CHECK(find(pts, "player A's").truth == GroundTruth::of(7));
  const auto prompt = build_contextual_prompt(kState, 5, 7);
  const auto n = of(QuestionTemplate::NActions, s);
  REQUIRE(n.size() == 4);
  auto count = [&](const char* who, const char* act) {
    return std::to_string(find(n, std::string("player ") + who + " choose \"" + act).truth.integer);
  };
  const std::string line = "A chose \"Cooperate\" " + count("A", "Cooperate") +
                           " times and chose \"Defect\" " + count("A", "Defect") +
                           " times, B chose \"Cooperate\" " + count("B", "Cooperate") +
                           " times and chose \"Defect\" " + count("B", "Defect") + " times.";
  CHECK(prompt.find(line) != std::string::npos);
}

TEST_CASE("grading rules") {
  QuestionInstance n{QuestionTemplate::NPoints, "", GroundTruth::of(12)};
  CHECK(grade(n, "{\"answer\": 12}") == GradeOutcome::Correct);
  CHECK(grade(n, "{\"answer\": \"12 points\"}") == GradeOutcome::Correct);
  CHECK(grade(n, "{\"answer\": 13}") == GradeOutcome::Wrong);
  CHECK(grade(n, "about twelve") == GradeOutcome::Unparseable);
  CHECK(grade(n, "{\"answer\": \"twelve\"}") == GradeOutcome::Unparseable);
  QuestionInstance a{QuestionTemplate::ActionI, "", GroundTruth::of(C)};
  CHECK(grade(a, "{\"answer\": \"cooperate\"}") == GradeOutcome::Correct);
  CHECK(grade(a, "{\"answer\": \" DEFECT\"}") == GradeOutcome::Wrong);
  CHECK(grade(a, "{\"answer\": 3}") == GradeOutcome::Unparseable);
  QuestionInstance set{QuestionTemplate::Actions, "", GroundTruth::of_set({D, C})};
  CHECK(grade(set, "{\"answer\": [\"Defect\", \"Cooperate\"]}") == GradeOutcome::Correct);
  CHECK(grade(set, "{\"answer\": \"Cooperate and Defect\"}") == GradeOutcome::Correct);
  CHECK(grade(set, "{\"answer\": [\"Cooperate\"]}") == GradeOutcome::Wrong);
}

TEST_CASE("oracle answers are graded correct") {
  const QuestionState s{PayoffMatrix{}, kState, std::nullopt, 7};
  OracleAgent oracle;
  for (const auto& q : instantiate(kQuestionTemplates, s)) {
    CHECK(grade(q, oracle.answer(s, 100, q)) == GradeOutcome::Correct);
  }
}

TEST_CASE("oracle closes the loop on a short run") {
  OracleAgent oracle;
  ComprehensionOptions o;
  o.n_games = 2;
  o.n_rounds = 20;
  o.seed = 3;
  const auto report = run_comprehension(oracle, oracle, o);
  CHECK_FALSE(report.partial);
  REQUIRE(report.per_template.size() == 8);
  for (const auto& s : report.per_template) {
    CHECK(s.n_asked > 0);
    CHECK(s.accuracy.mean == 1.0);
  }
  CHECK(report[QuestionTemplate::Round].n_asked == 40);
  CHECK(report[QuestionTemplate::MinMax].n_asked == 80);
}

TEST_CASE("constant Cooperate on action_i scores the cooperate fraction") {
  StrategyAgent player(StrategyKind::urnd(0.7));
  ConstantAnswerer ans("\"Cooperate\"");
  ComprehensionOptions o;
  o.n_games = 3;
  o.n_rounds = 30;
  o.window = 10;
  o.seed = 11;
  const auto report = run_comprehension(player, ans, o);
  // Recount from independently replayed games.
  int asked = 0, coop = 0;
  for (int g = 0; g < o.n_games; ++g) {
    StrategyAgent p(StrategyKind::urnd(0.7));
    StrategyAgent opp(StrategyKind::rnd());
    const auto t = play_game(p, opp, o.n_rounds, o.matrix, derive_seed(o.seed, "comprehension", g));
    for (int r = 1; r <= o.n_rounds; ++r) {
      for (int i = std::max(1, r - 10); i < r; ++i) {
        for (Player x : {Player::A, Player::B}) {
          ++asked;
          coop += t.rounds[i - 1].action_of(x) == C;
        }
      }
    }
  }
  const auto& s = report[QuestionTemplate::ActionI];
  CHECK(s.n_asked == asked);
  CHECK(s.n_correct == coop);
  CHECK(report[QuestionTemplate::Round].n_unparseable == report[QuestionTemplate::Round].n_asked);
}

TEST_CASE("constant zero answers the lowest payoff") {
  StrategyAgent player(StrategyKind::rnd());
  ConstantAnswerer ans("0");
  ComprehensionOptions o;
  o.n_games = 1;
  o.n_rounds = 10;
  const auto report = run_comprehension(player, ans, o);
  // Half the min_max instances ask for the lowest payoff, S = 0.
  CHECK(report[QuestionTemplate::MinMax].n_correct * 2 == report[QuestionTemplate::MinMax].n_asked);
}

TEST_CASE("answerer failure yields a partial report") {
  OracleAgent oracle;
  FailingAnswerer ans;
  ComprehensionOptions o;
  o.n_games = 2;
  o.n_rounds = 10;
  const auto report = run_comprehension(oracle, ans, o);
  CHECK(report.partial);
  CHECK(report.failure.find("round 3") != std::string::npos);
  CHECK(report[QuestionTemplate::Round].n_asked == 2);
}

TEST_CASE("report csv layout") {
  OracleAgent oracle;
  ComprehensionOptions o;
  o.n_games = 1;
  o.n_rounds = 5;
  std::ostringstream out;
  write_report_csv(out, run_comprehension(oracle, oracle, o));
  const auto s = out.str();
  CHECK(s.rfind("template,category,n_asked,n_correct,accuracy,ci_low,ci_high,n_unparseable\n", 0) == 0);
  CHECK(s.find("\nmin_max,Rules,10,10,1.000000,") != std::string::npos);
  CHECK(std::count(s.begin(), s.end(), '\n') == 9);
}
