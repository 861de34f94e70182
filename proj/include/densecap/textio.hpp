#pragma once

#include <string>
#include <vector>

namespace densecap::textio {

/// Shortest decimal text that parses back to exactly the same double.
std::string format_real(double value);

/// One line of a text record, split into whitespace separated fields.
struct Line {
  int number = 0;  ///< 1-based line number in the source text
  std::vector<std::string> fields;
};

/// Split text into non-empty lines of fields (blank lines are skipped).
std::vector<Line> tokenize(const std::string& text);

/// Parse a real / integer field, throwing a parse Error naming line and field.
double parse_real(const Line& line, std::size_t field);
long long parse_int(const Line& line, std::size_t field);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace densecap::textio
