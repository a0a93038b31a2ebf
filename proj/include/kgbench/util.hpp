#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace kgbench {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file, then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Splits on '\n', dropping a trailing '\r' from each line. A final empty
// line after the last newline is not reported.
std::vector<std::string_view> split_lines(std::string_view text);

std::vector<std::string_view> split(std::string_view s, char sep);

std::string_view trim(std::string_view s);

std::string sha256_hex(std::string_view data);

std::string to_lower_ascii(std::string_view s);

// True when needle occurs in haystack with no letter or digit directly on
// either side. Bytes >= 0x80 count as letters.
bool contains_word(std::string_view haystack, std::string_view needle);

// Lowercase, trimmed, internal whitespace runs collapsed to one space.
std::string normalize_label(std::string_view s);

}  // namespace kgbench
