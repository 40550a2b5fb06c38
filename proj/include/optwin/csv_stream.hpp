#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace optwin {

/// Raised for malformed cells; the message names the 1-based line.
class CsvParseError : public std::runtime_error {
 public:
  CsvParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace detail

/// Streams one numeric column of a CSV file. Line 1 is taken as a header
/// when its selected cell is not a number; blank lines are skipped.
class CsvStreamReader {
 public:
  /// `column` is either a 0-based index or a header name.
  CsvStreamReader(const std::string& path, std::string column = "0") : in_(path), column_(std::move(column)) {
    if (!in_) throw std::runtime_error("cannot open '" + path + "'");
    const auto idx = detail::parse_double(column_);
    if (idx && *idx >= 0 && *idx == static_cast<double>(static_cast<std::size_t>(*idx))) {
      index_ = static_cast<std::size_t>(*idx);
    }
  }

  /// Next value, or nullopt at end of file.
  std::optional<double> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      if (detail::trim(line).empty()) continue;
      const auto cells = detail::split_cells(line);
      if (line_ == 1 && !resolved_) {
        resolved_ = true;
        if (!index_) {
          for (std::size_t i = 0; i < cells.size(); ++i) {
            if (cells[i] == column_) index_ = i;
          }
          if (!index_) throw CsvParseError(line_, "no column named '" + column_ + "'");
          continue;
        }
        if (*index_ < cells.size() && !detail::parse_double(cells[*index_])) continue;  // header
      }
      resolved_ = true;
      if (!index_) throw CsvParseError(line_, "column '" + column_ + "' requires a header");
      if (*index_ >= cells.size()) throw CsvParseError(line_, "missing column " + std::to_string(*index_));
      const auto v = detail::parse_double(cells[*index_]);
      if (!v) throw CsvParseError(line_, "not a number: '" + std::string(cells[*index_]) + "'");
      return v;
    }
    if (in_.bad()) throw std::runtime_error("read error");
    return std::nullopt;
  }

  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::ifstream in_;
  std::string column_;
  std::optional<std::size_t> index_;
  std::size_t line_ = 0;
  bool resolved_ = false;
};

inline std::vector<double> read_csv_stream(const std::string& path, const std::string& column = "0") {
  CsvStreamReader r(path, column);
  std::vector<double> out;
  while (auto v = r.next()) out.push_back(*v);
  return out;
}

}  // namespace optwin
