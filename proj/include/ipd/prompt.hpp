#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ipd/action.hpp"
#include "ipd/trace.hpp"

namespace ipd {

/// `paper_llama_markers` (LlamaMarkers) decorates the text with "<s> [INST]", "<<SYS>>" and
/// "[/INST]"; `plain_messages` keeps the same sentences without markers.
enum class ChatFormat { LlamaMarkers, PlainMessages };
enum class InstructingVariant { Plain, CotKojima, CotZhou };

ChatFormat parse_chat_format(std::string_view s);
InstructingVariant parse_instructing_variant(std::string_view s);
std::string_view to_string(ChatFormat f);
std::string_view to_string(InstructingVariant v);

/// Number of most recent rounds shown to the agent; std::nullopt means the
/// full history.
using MemoryWindow = std::optional<int>;

/// "full" or a positive integer.
MemoryWindow parse_memory_window(std::string_view s);
std::string to_string(const MemoryWindow& w);

/// The last min(window, |history|) rounds.
HistoryView window_slice(HistoryView history, const MemoryWindow& window);

struct PromptBundle {
  std::string system_text;
  std::string contextual_text;
  std::string instructing_text;

  std::string concatenated() const { return system_text + contextual_text + instructing_text; }
};

struct ChatMessage {
  std::string role;  // "system" or "user"
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

/// System message = system text; user message = contextual + instructing.
std::vector<ChatMessage> to_messages(const PromptBundle& bundle);

/// Rules, payoffs generated from `m`, the round count and the objective.
std::string build_system_prompt(const PayoffMatrix& m, int n_rounds, ChatFormat fmt);

/// The windowed history of the game, oriented so that seat A is the agent.
/// The "In total" counts and points cover the displayed rounds only.
/// Throws std::invalid_argument unless current_round == |history| + 1.
std::string build_contextual_prompt(HistoryView history, const MemoryWindow& window,
                                    int current_round);

std::string build_instructing_prompt(InstructingVariant variant, ChatFormat fmt);

/// Per-player totals over a window, as printed by the contextual prompt.
struct WindowTotals {
  int cooperate_a = 0, defect_a = 0, cooperate_b = 0, defect_b = 0;
  int points_a = 0, points_b = 0;

  int count(Player p, Action a) const;
  int points(Player p) const { return p == Player::A ? points_a : points_b; }
};

WindowTotals window_totals(HistoryView shown);

}  // namespace ipd
