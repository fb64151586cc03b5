#include "ipd/trace_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace ipd {
namespace {

using Json = nlohmann::ordered_json;

const Json& field(const Json& obj, const char* name, int line) {
  const auto it = obj.find(name);
  if (it == obj.end()) throw TraceFormatError(line, std::string("missing field '") + name + "'");
  return *it;
}

Action action_field(const Json& j, int line) {
  if (!j.is_string()) throw TraceFormatError(line, "action must be a string");
  const auto s = j.get<std::string>();
  if (s == "Cooperate") return Action::Cooperate;
  if (s == "Defect") return Action::Defect;
  throw TraceFormatError(line, "unknown action '" + s + "'");
}

}  // namespace

TraceFormatError::TraceFormatError(int line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
      line_(line) {}

std::string to_jsonl_line(const GameTrace& t) {
  Json j;
  j["schema_version"] = kTraceSchemaVersion;
  j["agent_labels"] = Json::array({t.agent_labels[0], t.agent_labels[1]});
  j["alpha"] = t.alpha ? Json(*t.alpha) : Json(nullptr);
  j["seed"] = t.seed;
  j["n_rounds"] = t.n_rounds;
  Json rounds = Json::array();
  for (const auto& r : t.rounds) {
    Json o;
    o["i"] = r.round_index;
    o["a"] = std::string(to_string(r.action_a));
    o["b"] = std::string(to_string(r.action_b));
    o["pa"] = r.payoff_a;
    o["pb"] = r.payoff_b;
    rounds.push_back(std::move(o));
  }
  j["rounds"] = std::move(rounds);
  j["failed"] = t.failed;
  return j.dump();
}

GameTrace from_jsonl_line(std::string_view line, int n) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw TraceFormatError(n, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw TraceFormatError(n, "expected a JSON object");
  try {
    const int version = field(j, "schema_version", n).get<int>();
    if (version != kTraceSchemaVersion) {
      throw TraceFormatError(n, "schema_version " + std::to_string(version) + " is not supported (expected " +
                                    std::to_string(kTraceSchemaVersion) + ")");
    }
    GameTrace t;
    const auto& labels = field(j, "agent_labels", n);
    if (!labels.is_array() || labels.size() != 2) {
      throw TraceFormatError(n, "agent_labels must be a two-element array");
    }
    t.agent_labels = {labels[0].get<std::string>(), labels[1].get<std::string>()};
    const auto& alpha = field(j, "alpha", n);
    if (!alpha.is_null()) t.alpha = alpha.get<double>();
    t.seed = field(j, "seed", n).get<std::uint64_t>();
    t.n_rounds = field(j, "n_rounds", n).get<int>();
    t.failed = field(j, "failed", n).get<bool>();
    const auto& rounds = field(j, "rounds", n);
    if (!rounds.is_array()) throw TraceFormatError(n, "rounds must be an array");
    for (const auto& r : rounds) {
      RoundRecord rec;
      rec.round_index = field(r, "i", n).get<int>();
      rec.action_a = action_field(field(r, "a", n), n);
      rec.action_b = action_field(field(r, "b", n), n);
      rec.payoff_a = field(r, "pa", n).get<int>();
      rec.payoff_b = field(r, "pb", n).get<int>();
      if (rec.round_index != static_cast<int>(t.rounds.size()) + 1) {
        throw TraceFormatError(n, "round indices are not contiguous from 1");
      }
      t.rounds.push_back(rec);
    }
    if (!t.failed && static_cast<int>(t.rounds.size()) != t.n_rounds) {
      throw TraceFormatError(n, "completed game has " + std::to_string(t.rounds.size()) +
                                    " rounds but n_rounds is " + std::to_string(t.n_rounds));
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw TraceFormatError(n, std::string("bad field type: ") + e.what());
  }
}

void write_jsonl(std::ostream& out, std::span<const GameTrace> traces) {
  for (const auto& t : traces) out << to_jsonl_line(t) << '\n';
}

void write_jsonl(const std::filesystem::path& path, std::span<const GameTrace> traces) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_jsonl(out, traces);
}

std::vector<GameTrace> read_jsonl(std::istream& in) {
  std::vector<GameTrace> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(from_jsonl_line(line, n));
  }
  return out;
}

std::vector<GameTrace> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_jsonl(in);
}

}  // namespace ipd
