#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wheelforge/errors.hpp"

namespace wheelforge::csvio {

/// Minimal CSV: comma separators, newline rows, no quoting (writers here
/// never emit commas inside fields).
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return int(i);
    throw IoError("csv column not found: " + name);
  }
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline void write(const std::string& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);  // binary: stable line endings
  if (!out) throw IoError("cannot open for writing: " + path);
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  emit(table.header);
  for (const auto& row : table.rows) emit(row);
  if (!out.good()) throw IoError("write failed: " + path);
}

inline Table read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  Table table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");
    if (first)
      table.header = std::move(cells), first = false;
    else
      table.rows.push_back(std::move(cells));
  }
  if (first) throw IoError("empty csv: " + path);
  return table;
}

}  // namespace wheelforge::csvio
