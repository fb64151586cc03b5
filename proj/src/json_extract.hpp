#pragma once

#include <optional>
#include <string_view>

#include <json.hpp>

namespace ipd::detail {

/// First balanced {...} span in `text` that parses as a JSON object holding
/// `key`. Braces inside string literals are skipped while balancing.
std::optional<nlohmann::json> find_json_object(std::string_view text, std::string_view key);

std::string trim_lower(std::string_view s);

}  // namespace ipd::detail
