#include "ipd/prompt.hpp"

#include <charconv>
#include <stdexcept>

namespace ipd {
namespace {

std::string quoted(Action a) { return "\"" + std::string(to_string(a)) + "\""; }

std::string payoff_line(Action a, Action b, const PayoffMatrix& m) {
  const auto [pa, pb] = payoff(a, b, m);
  return "If A plays " + quoted(a) + " and B plays " + quoted(b) + ", A collects " +
         std::to_string(pa) + " points and B collects " + std::to_string(pb) + " points.\n";
}

std::string round_line(const RoundRecord& r) {
  return "Round " + std::to_string(r.round_index) + ": A played " + quoted(r.action_a) +
         " and B played " + quoted(r.action_b) + " A collected " + std::to_string(r.payoff_a) +
         " points and B collected " + std::to_string(r.payoff_b) + " points.\n";
}

}  // namespace

ChatFormat parse_chat_format(std::string_view s) {
  if (s == "paper_llama_markers") return ChatFormat::LlamaMarkers;
  if (s == "plain_messages") return ChatFormat::PlainMessages;
  throw ConfigError("unknown chat_format '" + std::string(s) + "'");
}

InstructingVariant parse_instructing_variant(std::string_view s) {
  if (s == "plain") return InstructingVariant::Plain;
  if (s == "cot_kojima") return InstructingVariant::CotKojima;
  if (s == "cot_zhou") return InstructingVariant::CotZhou;
  throw ConfigError("unknown instructing_variant '" + std::string(s) + "'");
}

std::string_view to_string(ChatFormat f) {
  return f == ChatFormat::LlamaMarkers ? "paper_llama_markers" : "plain_messages";
}

std::string_view to_string(InstructingVariant v) {
  switch (v) {
    case InstructingVariant::Plain: return "plain";
    case InstructingVariant::CotKojima: return "cot_kojima";
    case InstructingVariant::CotZhou: return "cot_zhou";
  }
  return "?";
}

MemoryWindow parse_memory_window(std::string_view s) {
  if (s == "full") return std::nullopt;
  int w = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), w);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || w < 1) {
    throw ConfigError("memory window must be 'full' or a positive integer, got '" +
                      std::string(s) + "'");
  }
  return w;
}

std::string to_string(const MemoryWindow& w) { return w ? std::to_string(*w) : "full"; }

HistoryView window_slice(HistoryView history, const MemoryWindow& window) {
  if (!window || static_cast<std::size_t>(*window) >= history.size()) return history;
  return history.last(static_cast<std::size_t>(*window));
}

std::vector<ChatMessage> to_messages(const PromptBundle& bundle) {
  return {{"system", bundle.system_text},
          {"user", bundle.contextual_text + bundle.instructing_text}};
}

std::string build_system_prompt(const PayoffMatrix& m, int n_rounds, ChatFormat fmt) {
  constexpr Action C = Action::Cooperate;
  constexpr Action D = Action::Defect;
  const bool markers = fmt == ChatFormat::LlamaMarkers;
  std::string s;
  if (markers) s += "<s> [INST]\n<<SYS>>\n\n";
  s += "Context: Player A and player B are playing a multi-round game.\n";
  s += "At each turn player A and player B simultaneously perform one of the following "
       "actions: {\"Cooperate\", \"Defect\"}\n\n";
  s += "The payoffs for each combination of chosen actions are the following:\n";
  s += payoff_line(D, D, m);
  s += payoff_line(D, C, m);
  s += payoff_line(C, D, m);
  s += payoff_line(C, C, m);
  s += "\nThey will play a total of " + std::to_string(n_rounds) + " rounds of this game.\n\n";
  s += "Remember that a player's objective is to get the highest possible number of points in "
       "the long run.\n";
  if (markers) s += "\n<<SYS>>\n";
  return s;
}

int WindowTotals::count(Player p, Action a) const {
  if (p == Player::A) return a == Action::Cooperate ? cooperate_a : defect_a;
  return a == Action::Cooperate ? cooperate_b : defect_b;
}

WindowTotals window_totals(HistoryView shown) {
  WindowTotals t;
  for (const auto& r : shown) {
    (r.action_a == Action::Cooperate ? t.cooperate_a : t.defect_a)++;
    (r.action_b == Action::Cooperate ? t.cooperate_b : t.defect_b)++;
    t.points_a += r.payoff_a;
    t.points_b += r.payoff_b;
  }
  return t;
}

std::string build_contextual_prompt(HistoryView history, const MemoryWindow& window,
                                    int current_round) {
  if (current_round != static_cast<int>(history.size()) + 1) {
    throw std::invalid_argument("current_round must follow the last completed round");
  }
  const HistoryView shown = window_slice(history, window);
  const WindowTotals t = window_totals(shown);
  std::string s = "\nThe history of the game in the last " + std::to_string(shown.size()) +
                  " rounds is the following:\n\n";
  for (const auto& r : shown) s += round_line(r);
  s += "\nIn total, A chose \"Cooperate\" " + std::to_string(t.cooperate_a) +
       " times and chose \"Defect\" " + std::to_string(t.defect_a) + " times, B chose \"Cooperate\" " +
       std::to_string(t.cooperate_b) + " times and chose \"Defect\" " + std::to_string(t.defect_b) +
       " times.\n";
  s += "In total, A collected " + std::to_string(t.points_a) + " points and B collected " +
       std::to_string(t.points_b) + " points.\n\n";
  s += "Current round: " + std::to_string(current_round) + ".\n\n";
  return s;
}

std::string build_instructing_prompt(InstructingVariant variant, ChatFormat fmt) {
  const std::string close = fmt == ChatFormat::LlamaMarkers ? "[/INST]" : "";
  const std::string format_lines =
      "Remember to use only the following JSON format:\n"
      "{\"action\": <ACTION_of_A>, \"reason\": <YOUR_REASON>}\n";
  const std::string ask = "Answer saying which action player A should play.\n";
  const std::string reminder = "Remember to answer using the right format." + close + "\n";
  switch (variant) {
    case InstructingVariant::Plain:
      return "\n" + format_lines + "\n" + ask + "\n" + reminder + "\n";
    case InstructingVariant::CotKojima:
      return "\n" + format_lines + ask + reminder + "\nLet’s think step by step\n\n";
    case InstructingVariant::CotZhou:
      return "\n" + format_lines + ask + reminder +
             "\nLet's work this out in a step-by-step way to be sure we have the right answer\n\n";
  }
  throw ConfigError("unknown instructing variant");
}

}  // namespace ipd
