#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ipd/trace.hpp"

namespace ipd {

inline constexpr int kTraceSchemaVersion = 1;

/// Malformed trace input. `line()` is 1-based, 0 when not tied to a line.
class TraceFormatError : public std::runtime_error {
 public:
  TraceFormatError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

/// One game as a single JSON object with the fields, in order:
/// schema_version, agent_labels, alpha, seed, n_rounds, rounds, failed.
std::string to_jsonl_line(const GameTrace& trace);
GameTrace from_jsonl_line(std::string_view line, int line_number = 0);

void write_jsonl(std::ostream& out, std::span<const GameTrace> traces);
void write_jsonl(const std::filesystem::path& path, std::span<const GameTrace> traces);

/// Blank lines are skipped. Throws TraceFormatError naming the offending line.
std::vector<GameTrace> read_jsonl(std::istream& in);
std::vector<GameTrace> read_jsonl(const std::filesystem::path& path);

}  // namespace ipd
