#pragma once
// Small text and file helpers shared by the loaders and artifact writers.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace alarmrisk::io {

// Splits one delimited line. Surrounding whitespace and a single pair of
// double quotes are stripped from each cell. No embedded delimiters.
std::vector<std::string> split_row(std::string_view line, char delim = ',');

// Strict numeric parse of a whole cell; nullopt for anything else
// (including "NaN"/"inf", which the loaders reject).
std::optional<double> parse_finite(std::string_view cell);

// Shortest text that parses back to the identical double.
std::string format_double(double x);

std::string read_file(const std::filesystem::path& path);

// Writes through a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// FNV-1a 64-bit; stable content fingerprint for artifacts.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t h);

}  // namespace alarmrisk::io
