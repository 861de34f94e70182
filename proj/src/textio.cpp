#include "densecap/textio.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "densecap/error.hpp"

namespace densecap::textio {

std::string format_real(double value) {
  char buffer[64];
  auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

std::vector<Line> tokenize(const std::string& text) {
  std::vector<Line> lines;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::istringstream fields(raw);
    Line line;
    line.number = number;
    std::string field;
    while (fields >> field) line.fields.push_back(field);
    if (!line.fields.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

namespace {

[[noreturn]] void field_error(const Line& line, std::size_t field,
                              const std::string& what) {
  throw Error(ErrorKind::parse, "line " + std::to_string(line.number) +
                                    ", field " + std::to_string(field + 1) +
                                    ": " + what);
}

}  // namespace

double parse_real(const Line& line, std::size_t field) {
  if (field >= line.fields.size()) field_error(line, field, "missing value");
  const std::string& s = line.fields[field];
  double value = 0.0;
  auto result = std::from_chars(s.data(), s.data() + s.size(), value);
  if (result.ec != std::errc() || result.ptr != s.data() + s.size())
    field_error(line, field, "expected a real number, got '" + s + "'");
  return value;
}

long long parse_int(const Line& line, std::size_t field) {
  if (field >= line.fields.size()) field_error(line, field, "missing value");
  const std::string& s = line.fields[field];
  long long value = 0;
  auto result = std::from_chars(s.data(), s.data() + s.size(), value);
  if (result.ec != std::errc() || result.ptr != s.data() + s.size())
    field_error(line, field, "expected an integer, got '" + s + "'");
  return value;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::parse, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::parameter, "cannot write '" + path + "'");
  out << contents;
  if (!out) throw Error(ErrorKind::parameter, "failed writing '" + path + "'");
}

}  // namespace densecap::textio
