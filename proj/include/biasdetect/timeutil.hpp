#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace biasdetect {

using Instant = std::chrono::sys_seconds;

/// Parses `text` with a strptime-style format. The whole string must be
/// consumed (trailing whitespace allowed). `%z` offsets are honored.
std::optional<Instant> parse_instant(std::string_view text, std::string_view format);

/// Formats as "YYYY-MM-DD HH:MM:SS" in UTC.
std::string format_instant(Instant t);

/// Real-valued days from `from` to `to` (negative when `to` precedes `from`).
double days_between(Instant from, Instant to);

}  // namespace biasdetect
