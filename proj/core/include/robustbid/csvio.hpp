#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace robustbid {

// Shortest decimal string that round-trips to the same double. Keeps CSV
// files small and makes save/load byte-stable.
std::string format_double(double v);

// Minimal CSV layer for the fixed, comma-only, unquoted schemas this project
// emits. Not a general CSV parser by design.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void write_row(const std::vector<std::string>& fields);
  void close();

 private:
  std::ofstream out_;
  std::size_t width_;
  std::string path_;
};

struct CsvFile {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvFile read_csv(const std::string& path);

// Parse helpers that fail loudly with file/line context.
long parse_long(const std::string& s, const std::string& context);
double parse_double(const std::string& s, const std::string& context);

}  // namespace robustbid
