#include "ipd/llm_agent.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "json_extract.hpp"

namespace ipd {

namespace detail {

std::string trim_lower(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(first, last - first + 1));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

namespace {

// End of the balanced object starting at `open`, or npos.
std::size_t matching_brace(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i;
    }
  }
  return std::string_view::npos;
}

}  // namespace

std::optional<nlohmann::json> find_json_object(std::string_view text, std::string_view key) {
  for (std::size_t open = text.find('{'); open != std::string_view::npos;
       open = text.find('{', open + 1)) {
    const std::size_t close = matching_brace(text, open);
    if (close == std::string_view::npos) continue;
    auto j = nlohmann::json::parse(text.substr(open, close - open + 1), nullptr, false);
    if (j.is_discarded() || !j.is_object()) continue;
    if (j.contains(std::string(key))) return j;
  }
  return std::nullopt;
}

}  // namespace detail

ParsedAction parse_action(std::string_view response_text) {
  const auto obj = detail::find_json_object(response_text, "action");
  if (!obj) throw ParseFailure("no JSON object with an \"action\" key in reply");
  const auto& value = (*obj)["action"];
  if (!value.is_string()) throw ParseFailure("\"action\" is not a string");
  const std::string a = detail::trim_lower(value.get<std::string>());
  ParsedAction out;
  if (a == "cooperate") {
    out.action = Action::Cooperate;
  } else if (a == "defect") {
    out.action = Action::Defect;
  } else {
    throw ParseFailure("unrecognized action '" + value.get<std::string>() + "'");
  }
  if (const auto it = obj->find("reason"); it != obj->end()) {
    out.reason = it->is_string() ? it->get<std::string>() : it->dump();
  }
  return out;
}

void AgentConfig::validate() const {
  if (!(temperature >= 0.0 && temperature <= 1.0)) {
    throw ConfigError("temperature must lie in [0, 1]");
  }
  if (memory_window && *memory_window < 1) throw ConfigError("memory_window must be >= 1");
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (requests_per_minute < 0) throw ConfigError("requests_per_minute must be >= 0");
  if (endpoint_url.empty()) throw ConfigError("endpoint_url is empty");
  if (model_id.empty()) throw ConfigError("model_id is empty");
}

std::string chat_request_body(const ChatRequest& request) {
  nlohmann::ordered_json j;
  j["model"] = request.model;
  j["temperature"] = request.temperature;
  auto msgs = nlohmann::ordered_json::array();
  for (const auto& m : request.messages) {
    msgs.push_back({{"role", m.role}, {"content", m.content}});
  }
  j["messages"] = std::move(msgs);
  return j.dump();
}

std::string chat_reply_content(std::string_view response_body) {
  const auto j = nlohmann::json::parse(response_body, nullptr, false);
  if (j.is_discarded()) throw TransportError("response body is not JSON");
  try {
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw TransportError("response lacks choices[0].message.content");
  }
}

RateLimiter::RateLimiter(double requests_per_minute, int burst) {
  unlimited_ = requests_per_minute <= 0.0;
  if (unlimited_) return;
  interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(60.0 / requests_per_minute));
  burst_allowance_ = interval_ * std::max(0, burst - 1);
}

void RateLimiter::acquire() {
  if (unlimited_) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    theoretical_arrival_ = std::max(theoretical_arrival_, now);
    slot = std::max(now, theoretical_arrival_ - burst_allowance_);
    theoretical_arrival_ += interval_;
  }
  std::this_thread::sleep_until(slot);
}

std::shared_ptr<RateLimiter> shared_rate_limiter(const std::string& endpoint_url,
                                                 double requests_per_minute) {
  if (requests_per_minute <= 0.0) return nullptr;
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<RateLimiter>> registry;
  std::lock_guard lock(mu);
  auto& slot = registry[endpoint_url];
  if (!slot) slot = std::make_shared<RateLimiter>(requests_per_minute);
  return slot;
}

HttpChatClient::HttpChatClient(std::string endpoint_url, std::string api_key,
                               std::chrono::milliseconds timeout,
                               std::shared_ptr<RateLimiter> limiter)
    : api_key_(std::move(api_key)), timeout_(timeout), limiter_(std::move(limiter)) {
  const auto scheme_end = endpoint_url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint_url must start with http:// or https://");
  }
  const std::string scheme = endpoint_url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("unsupported endpoint scheme '" + scheme + "'");
  }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (scheme == "https") throw ConfigError("https endpoints need a build with OpenSSL");
#endif
  const auto path_start = endpoint_url.find('/', scheme_end + 3);
  origin_ = endpoint_url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : endpoint_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + "/chat/completions";
}

std::string HttpChatClient::complete(const ChatRequest& request) {
  if (limiter_) limiter_->acquire();
  httplib::Client cli(origin_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  cli.set_connection_timeout(secs.count(), usecs.count());
  cli.set_read_timeout(secs.count(), usecs.count());
  cli.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  ++requests_;
  const auto res = cli.Post(path_, headers, chat_request_body(request), "application/json");
  if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  }
  return chat_reply_content(res->body);
}

std::string api_key_from_env(const std::string& env_var) {
  if (env_var.empty()) return {};
  const char* v = std::getenv(env_var.c_str());
  if (v == nullptr || *v == '\0') {
    throw ConfigError("environment variable " + env_var + " is not set");
  }
  return v;
}

LlmAgent::LlmAgent(AgentConfig config, std::shared_ptr<ChatClient> client, std::string label)
    : config_(std::move(config)), client_(std::move(client)), label_(std::move(label)) {
  config_.validate();
  if (!client_) throw std::invalid_argument("LlmAgent needs a chat client");
  if (label_.empty()) label_ = config_.model_id;
  sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::unique_ptr<LlmAgent> LlmAgent::from_config(const AgentConfig& config, std::string label) {
  config.validate();
  auto client = std::make_shared<HttpChatClient>(
      config.endpoint_url, api_key_from_env(config.api_key_env_var), config.request_timeout,
      shared_rate_limiter(config.endpoint_url, config.requests_per_minute));
  return std::make_unique<LlmAgent>(config, std::move(client), std::move(label));
}

PromptBundle LlmAgent::prompt_for(HistoryView history) const {
  return {build_system_prompt(setup_.matrix, setup_.n_rounds, config_.chat_format),
          build_contextual_prompt(history, config_.memory_window,
                                  static_cast<int>(history.size()) + 1),
          build_instructing_prompt(config_.instructing_variant, config_.chat_format)};
}

std::string LlmAgent::complete_with_retries(
    const std::vector<ChatMessage>& messages,
    const std::function<void(const std::string&)>& accept) {
  const ChatRequest request{config_.model_id, config_.temperature, messages};
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0 && !config_.retry_backoff.empty()) {
      const auto idx = std::min<std::size_t>(attempt - 1, config_.retry_backoff.size() - 1);
      sleep_(config_.retry_backoff[idx]);
    }
    try {
      std::string reply = client_->complete(request);
      if (accept) accept(reply);
      return reply;
    } catch (const TransportError& e) {
      last_error = e.what();
    } catch (const ParseFailure& e) {
      last_error = e.what();
    }
  }
  throw AgentFailure("gave up after " + std::to_string(config_.max_retries + 1) +
                     " attempts: " + last_error);
}

Action LlmAgent::decide(HistoryView history, Rng&) {
  ParsedAction parsed;
  complete_with_retries(to_messages(prompt_for(history)),
                        [&](const std::string& reply) { parsed = parse_action(reply); });
  last_reason_ = parsed.reason;
  return parsed.action;
}

ScriptedAgent::ScriptedAgent(std::vector<Action> actions, std::string label)
    : actions_(std::move(actions)), label_(std::move(label)) {}

Action ScriptedAgent::decide(HistoryView, Rng&) {
  if (next_ >= actions_.size()) {
    throw AgentFailure("script exhausted after " + std::to_string(actions_.size()) + " actions");
  }
  return actions_[next_++];
}

}  // namespace ipd
