#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace spolf {

/// Decimal with 17 significant digits; round-trips every finite double.
std::string format_real(double value);

/// Minimal CSV table: header row plus string cells. No quoting; fields in
/// this project never contain commas.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position by name; throws ParseError if absent.
  std::size_t column(std::string_view name) const;
};

std::vector<std::string> split_csv_line(std::string_view line);
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text);
std::string to_csv(const CsvTable& table);
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

double parse_real(std::string_view cell);
long long parse_int(std::string_view cell);

}  // namespace spolf
