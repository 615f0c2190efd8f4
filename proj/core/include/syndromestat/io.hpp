#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace syndromestat {

/// Shortest round-trip decimal of a double, locale independent ("inf", "-inf", "nan" for specials).
std::string format_double(double x);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t h);

/// Minimal RFC 4180 quoting.
std::string csv_escape(const std::string& field);
std::string csv_row(const std::vector<std::string>& fields);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace syndromestat
