#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pgig {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_number(double value);

/// Parses a full token as a finite double; nullopt on trailing garbage, nan or inf.
std::optional<double> parse_number(std::string_view token);

/// Splits on commas; no quoting (the toolkit never writes quoted fields).
std::vector<std::string_view> split_fields(std::string_view line);

/// Comma-separated, header row, '.' decimal point, LF line endings.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::optional<std::size_t> column(std::string_view name) const;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Reads a numeric CSV with a header row. Every data row must have the header's
/// field count. Throws ParseError with the offending line.
CsvTable read_csv(const std::filesystem::path& path);

/// Reads a headerless single row of numbers (an explain input).
std::vector<double> read_csv_row(const std::filesystem::path& path);

}  // namespace pgig
