#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ipd/agent.hpp"
#include "ipd/prompt.hpp"

namespace ipd {

/// The reply did not contain a usable action.
class ParseFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The backend could not be reached or answered with an error.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParsedAction {
  Action action = Action::Cooperate;
  std::string reason;
};

/// Finds the first well-formed JSON object with an "action" key and matches
/// its value, trimmed and case-insensitively, against cooperate/defect.
ParsedAction parse_action(std::string_view response_text);

struct AgentConfig {
  std::string endpoint_url = "https://api.openai.com/v1";
  std::string model_id = "gpt-3.5-turbo";
  double temperature = 0.7;
  std::string api_key_env_var = "OPENAI_API_KEY";  // empty: send no Authorization header
  int max_retries = 3;  // attempts after the first
  std::vector<std::chrono::milliseconds> retry_backoff{std::chrono::milliseconds(1000),
                                                       std::chrono::milliseconds(2000),
                                                       std::chrono::milliseconds(4000)};
  std::chrono::milliseconds request_timeout{60000};
  MemoryWindow memory_window = 10;
  InstructingVariant instructing_variant = InstructingVariant::Plain;
  ChatFormat chat_format = ChatFormat::LlamaMarkers;
  double requests_per_minute = 0.0;  // 0: unlimited

  /// Temperature in [0, 1], window >= 1, non-negative retries.
  void validate() const;
};

struct ChatRequest {
  std::string model;
  double temperature = 0.7;
  std::vector<ChatMessage> messages;
};

/// {"model", "temperature", "messages": [{"role", "content"}]}.
std::string chat_request_body(const ChatRequest& request);

/// choices[0].message.content of a chat-completion response body.
/// Throws TransportError when the body has another shape.
std::string chat_reply_content(std::string_view response_body);

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  /// Returns the reply content; throws TransportError on failure.
  virtual std::string complete(const ChatRequest& request) = 0;
};

/// Token bucket shared by every client of one endpoint.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_minute, int burst = 1);

  /// Blocks until a request may be issued.
  void acquire();

 private:
  std::mutex mu_;
  std::chrono::steady_clock::duration interval_{};
  std::chrono::steady_clock::duration burst_allowance_{};
  std::chrono::steady_clock::time_point theoretical_arrival_{};
  bool unlimited_ = false;
};

/// One limiter per endpoint URL for the lifetime of the process. A
/// non-positive rate returns nullptr.
std::shared_ptr<RateLimiter> shared_rate_limiter(const std::string& endpoint_url,
                                                 double requests_per_minute);

/// OpenAI-compatible client: POST {endpoint}/chat/completions.
class HttpChatClient : public ChatClient {
 public:
  HttpChatClient(std::string endpoint_url, std::string api_key,
                 std::chrono::milliseconds timeout, std::shared_ptr<RateLimiter> limiter = {});

  std::string complete(const ChatRequest& request) override;

  int requests_made() const { return requests_.load(); }

 private:
  std::string origin_;  // scheme://host[:port]
  std::string path_;    // prefix + /chat/completions
  std::string api_key_;
  std::chrono::milliseconds timeout_;
  std::shared_ptr<RateLimiter> limiter_;
  std::atomic<int> requests_{0};
};

/// Agent backed by a remote chat model. Seat A in the prompt is always the agent.
class LlmAgent : public Agent {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  LlmAgent(AgentConfig config, std::shared_ptr<ChatClient> client, std::string label = {});

  /// Builds the client from the configuration and reads the API key from the
  /// environment. Throws ConfigError when the variable is unset.
  static std::unique_ptr<LlmAgent> from_config(const AgentConfig& config,
                                               std::string label = {});

  std::string label() const override { return label_; }
  void begin_game(const GameSetup& setup) override { setup_ = setup; }
  Action decide(HistoryView history, Rng& rng) override;

  PromptBundle prompt_for(HistoryView history) const;

  /// One completion with the retry policy applied. `accept` may throw
  /// ParseFailure to request another attempt. Throws AgentFailure when
  /// retries are exhausted.
  std::string complete_with_retries(const std::vector<ChatMessage>& messages,
                                    const std::function<void(const std::string&)>& accept = {});

  const AgentConfig& config() const { return config_; }
  const GameSetup& setup() const { return setup_; }
  const std::string& last_reason() const { return last_reason_; }
  void set_sleeper(Sleeper s) { sleep_ = std::move(s); }

 private:
  AgentConfig config_;
  std::shared_ptr<ChatClient> client_;
  std::string label_;
  GameSetup setup_;
  std::string last_reason_;
  Sleeper sleep_;
};

/// Replays a fixed action list; running past its end is an AgentFailure.
class ScriptedAgent : public Agent {
 public:
  explicit ScriptedAgent(std::vector<Action> actions, std::string label = "scripted");

  std::string label() const override { return label_; }
  void begin_game(const GameSetup&) override { next_ = 0; }
  Action decide(HistoryView history, Rng& rng) override;

 private:
  std::vector<Action> actions_;
  std::string label_;
  std::size_t next_ = 0;
};

/// Reads the API key named by `env_var`; throws ConfigError when unset.
std::string api_key_from_env(const std::string& env_var);

}  // namespace ipd
