#pragma once
// Minimal CSV support: comma separated, optional double quotes with ""
// escapes, header row required, UTF-8 passed through untouched.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sqi::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based line number of each row in the source, for diagnostics.
  std::vector<std::size_t> line_numbers;

  std::optional<std::size_t> column(std::string_view name) const;
};

Table parse(std::string_view text, const std::string& source_name = "<csv>");
Table read_file(const std::filesystem::path& path);

// Strict decimal parse of a whole cell; nullopt for anything else.
std::optional<double> parse_double(std::string_view cell);

// Shortest representation that round-trips to the same double.
std::string format_double(double v);

std::string escape(std::string_view field);
std::string join_row(const std::vector<std::string>& fields);

// Writes text to path, replacing any existing file. Throws IoError.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace sqi::csv
