#pragma once

#include <cstdio>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "qtlab/errors.hpp"

namespace qtlab {

// 17 significant digits, scientific: round-trips doubles exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

inline std::string csv_row(std::span<const double> values) {
  std::string line;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) line += ',';
    line += format_double(values[i]);
  }
  line += '\n';
  return line;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw IoError("csv: cannot open '" + path + "' for writing");
  }

  void comment(const std::string& text) { out_ << "# " << text << '\n'; }

  void columns(const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (i) out_ << ',';
      out_ << names[i];
    }
    out_ << '\n';
  }

  void row(std::span<const double> values) { out_ << csv_row(values); }

  void raw_line(const std::string& line) { out_ << line << '\n'; }

  void close() {
    out_.flush();
    if (!out_) throw IoError("csv: write failure");
    out_.close();
  }

 private:
  std::ofstream out_;
};

// Numeric CSV: '#' lines skipped, comma-separated doubles, rectangular.
inline std::vector<std::vector<double>> read_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("csv: cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string body = line;
    const auto hash = body.find('#');
    if (hash != std::string::npos) body.erase(hash);
    bool blank = true;
    for (char c : body)
      if (c != ' ' && c != '\t') blank = false;
    if (blank) continue;
    std::vector<double> vals;
    std::size_t pos = 0;
    bool header = false;
    while (pos <= body.size()) {
      const auto comma = body.find(',', pos);
      const std::string cell =
          body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) {
        // one leading column-name line is tolerated; anything later is data
        if (rows.empty() && vals.empty()) {
          header = true;
          break;
        }
        throw ConfigError("csv: '" + path + "' line " + std::to_string(lineno) +
                          ": non-numeric cell '" + cell + "'");
      }
      vals.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (header || vals.empty()) continue;
    if (!rows.empty() && rows.front().size() != vals.size())
      throw ConfigError("csv: '" + path + "' line " + std::to_string(lineno) +
                        ": ragged row");
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw ConfigError("csv: '" + path + "' contains no data rows");
  return rows;
}

}
