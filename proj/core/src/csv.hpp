#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace metalearn::detail {

struct CsvTable {
  char delimiter = ',';
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

char detect_delimiter(std::string_view header_line);

// Throws Error(kParse) with the offending line/column.
CsvTable parse_delimited(std::string_view text);

std::string quote_field(std::string_view field, char delimiter);

bool is_missing_token(std::string_view cell);

// Full-string numeric parse, surrounding blanks allowed.
bool parse_number(std::string_view cell, double& out);

std::string format_double(double value);

}  // namespace metalearn::detail
