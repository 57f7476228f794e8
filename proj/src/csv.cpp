#include "thermoflux/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "thermoflux/errors.hpp"

namespace thermoflux {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

int CsvTable::require_column(const std::string& name) const {
  const int idx = column(name);
  if (idx < 0) throw ConfigError("missing CSV column '" + name + "'");
  return idx;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("empty CSV file '" + path.string() + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::stringstream hdr(line);
  std::string cell;
  while (std::getline(hdr, cell, ',')) table.header.push_back(cell);

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(table.header.size());
    const char* p = line.c_str();
    while (true) {
      char* end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p) {
        std::ostringstream msg;
        msg << path.string() << ":" << line_no << ": expected a number";
        throw ConfigError(msg.str());
      }
      row.push_back(v);
      p = end;
      if (*p == ',') {
        ++p;
        continue;
      }
      if (*p == '\0') break;
      std::ostringstream msg;
      msg << path.string() << ":" << line_no << ": unexpected '" << *p << "'";
      throw ConfigError(msg.str());
    }
    if (row.size() != table.header.size()) {
      std::ostringstream msg;
      msg << path.string() << ":" << line_no << ": expected "
          << table.header.size() << " columns, got " << row.size();
      throw ConfigError(msg.str());
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary);  // keep '\n' endings everywhere
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out << ',';
    out << header[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << format_double(row[i]);
    }
    out << '\n';
  }
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

}  // namespace thermoflux
