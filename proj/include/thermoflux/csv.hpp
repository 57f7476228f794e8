#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace thermoflux {

/// Shortest text that still round-trips a double exactly (17 significant
/// digits, '.' decimal separator).
std::string format_double(double value);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Column index or -1.
  int column(const std::string& name) const;
  /// Column index; throws ConfigError naming the missing column.
  int require_column(const std::string& name) const;
};

/// All-numeric CSV with a header row. Throws ConfigError on malformed input
/// or a missing file.
CsvTable read_csv(const std::filesystem::path& path);

/// '\n' line endings, header exactly as given, values at 17 significant
/// digits.
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace thermoflux
