#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace frontierlab {

// 17 significant digits: round-trips any double exactly.
std::string format_double(double v);

std::string read_file(const std::string& path);

// Writes via a temp file in the same directory, then renames into place, so
// readers never observe a partial file.
void write_file_atomic(const std::string& path, std::string_view content);

void ensure_directory(const std::string& path);

std::vector<std::vector<std::string>> parse_csv(std::string_view text);

std::vector<std::string> split(std::string_view text, char sep);
std::string trim(std::string_view text);

}  // namespace frontierlab
