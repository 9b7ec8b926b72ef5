#include "robustbid/csvio.hpp"

#include <charconv>
#include <cstdlib>
#include <sstream>

#include "robustbid/errors.hpp"

namespace robustbid {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;  // 32 bytes always suffice for the shortest form
  return std::string(buf, ptr);
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), width_(header.size()), path_(path) {
  if (!out_) throw ParseError("cannot open " + path + " for writing");
  write_row(header);
}

void CsvWriter::write_row(const std::vector<std::string>& fields) {
  if (fields.size() != width_)
    throw ParseError(path_ + ": row width " + std::to_string(fields.size()) +
                     " does not match header width " + std::to_string(width_));
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << fields[i];
  }
  out_ << '\n';
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw ParseError("write to " + path_ + " failed");
}

CsvFile read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  CsvFile file;
  std::string line;
  bool first = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (line.empty() || line.back() == ',') fields.push_back("");
    if (first) {
      file.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != file.header.size())
        throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                         std::to_string(file.header.size()) + " fields, got " +
                         std::to_string(fields.size()));
      file.rows.push_back(std::move(fields));
    }
  }
  if (first) throw ParseError(path + ": missing header row");
  return file;
}

long parse_long(const std::string& s, const std::string& context) {
  long value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(context + ": bad integer '" + s + "'");
  return value;
}

double parse_double(const std::string& s, const std::string& context) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(context + ": bad number '" + s + "'");
  return value;
}

}  // namespace robustbid
