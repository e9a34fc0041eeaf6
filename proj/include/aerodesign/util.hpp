#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aerodesign {

// Shortest locale-independent text that parses back to the same double.
std::string format_double(double value);
// Fixed-point formatting with `decimals` digits; "-0.000" is normalised to "0.000".
std::string format_fixed(double value, int decimals);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
// Trim, lowercase and collapse inner whitespace runs to a single space.
std::string normalize_concept(std::string_view s);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
// Write to a sibling temporary file then rename over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace aerodesign
