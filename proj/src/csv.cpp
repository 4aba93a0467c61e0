#include "sqi/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "sqi/error.hpp"

namespace sqi::csv {

std::optional<std::size_t> Table::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header.begin());
}

Table parse(std::string_view text, const std::string& source_name) {
  // Strip a UTF-8 byte order mark.
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> lines;
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool row_has_content = false;
  std::size_t line = 1;
  std::size_t record_line = 1;

  auto end_record = [&]() {
    fields.push_back(std::move(field));
    field.clear();
    if (row_has_content || fields.size() > 1 || !fields.front().empty()) {
      records.push_back(std::move(fields));
      lines.push_back(record_line);
    }
    fields.clear();
    row_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        row_has_content = true;
        break;
      case ',':
        fields.push_back(std::move(field));
        field.clear();
        row_has_content = true;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        field.push_back(c);
        row_has_content = true;
    }
  }
  if (in_quotes) throw FormatError(source_name + ": unterminated quoted field");
  if (row_has_content || !field.empty()) end_record();

  if (records.empty()) throw FormatError(source_name + ": missing header row");
  Table table;
  table.header = std::move(records.front());
  for (auto& h : table.header) {
    // Trim surrounding blanks in header names only.
    const auto first = h.find_first_not_of(" \t");
    const auto last = h.find_last_not_of(" \t");
    h = first == std::string::npos ? std::string() : h.substr(first, last - first + 1);
  }
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw FormatError(source_name + ":" + std::to_string(lines[r]) + ": expected " +
                        std::to_string(table.header.size()) + " fields, found " + std::to_string(records[r].size()));
    }
    table.rows.push_back(std::move(records[r]));
    table.line_numbers.push_back(lines[r]);
  }
  return table;
}

Table read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open CSV file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::optional<double> parse_double(std::string_view cell) {
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
  return v;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("format_double: conversion failed");
  return std::string(buf, ptr);
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out.push_back(',');
    out += escape(fields[i]);
  }
  out.push_back('\n');
  return out;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create file: " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing file: " + path.string());
}

}  // namespace sqi::csv
