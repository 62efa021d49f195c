#pragma once

#include <string>
#include <vector>

namespace entroflow {

// Numeric table with named columns; the CSV side of every file this tool
// emits.  Values are written as shortest-round-trip decimal (17 significant
// digits), so writing and re-reading reproduces the binary doubles exactly.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

std::string format_double(double v);  // %.17g

}  // namespace entroflow
