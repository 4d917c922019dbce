#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

namespace biasdetect {

/// Shortest decimal text that round-trips to the same double.
std::string format_real(double value);

std::string format_optional(const std::optional<double>& value);

/// Writes via a temporary sibling file and renames it into place, so readers
/// never observe a truncated artifact.
void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& writer);

std::string read_file(const std::filesystem::path& path);

}  // namespace biasdetect
