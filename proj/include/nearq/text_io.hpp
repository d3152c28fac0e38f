#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nearq::text_io {

// Shortest decimal representation that parses back to the same double.
// Non-finite values are written as "nan", "inf", "-inf".
std::string format_double(double value);

double parse_double(std::string_view token);

std::vector<std::string_view> split(std::string_view line, char sep);

std::string join_doubles(const double *values, std::size_t count, char sep = ',');

void write_file(const std::filesystem::path &path, std::string_view contents);
std::string read_file(const std::filesystem::path &path);

}    // namespace nearq::text_io
