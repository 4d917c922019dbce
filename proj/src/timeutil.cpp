#include "biasdetect/timeutil.hpp"

#include <cctype>
#include <cstdio>
#include <ctime>

namespace biasdetect {

std::optional<Instant> parse_instant(std::string_view text, std::string_view format) {
  const std::string input(text);
  const std::string fmt(format);
  std::tm tm{};
  const char* end = strptime(input.c_str(), fmt.c_str(), &tm);
  if (end == nullptr) return std::nullopt;
  while (*end != '\0' && std::isspace(static_cast<unsigned char>(*end))) ++end;
  if (*end != '\0') return std::nullopt;
  const long offset = tm.tm_gmtoff;
  const std::time_t t = timegm(&tm);
  return Instant{std::chrono::seconds{static_cast<long long>(t) - offset}};
}

std::string format_instant(Instant t) {
  const auto days = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::year_month_day ymd{days};
  const std::chrono::hh_mm_ss hms{t - days};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02ld:%02ld:%02lld", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long long>(hms.seconds().count()));
  return buf;
}

double days_between(Instant from, Instant to) {
  return static_cast<double>((to - from).count()) / 86400.0;
}

}  // namespace biasdetect
