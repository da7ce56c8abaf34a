#include "csv.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

#include "metalearn/error.hpp"

namespace metalearn::detail {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

char detect_delimiter(std::string_view header_line) {
  constexpr std::array<char, 3> kCandidates{',', ';', '\t'};
  std::array<std::size_t, 3> counts{};
  bool quoted = false;
  for (char ch : header_line) {
    if (ch == '"') quoted = !quoted;
    if (quoted) continue;
    for (std::size_t i = 0; i < kCandidates.size(); ++i) {
      if (ch == kCandidates[i]) ++counts[i];
    }
  }
  auto best = std::max_element(counts.begin(), counts.end());
  return kCandidates[static_cast<std::size_t>(best - counts.begin())];
}

CsvTable parse_delimited(std::string_view text) {
  CsvTable table;
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  const auto first_newline = text.find('\n');
  table.delimiter = detect_delimiter(text.substr(0, first_newline));
  const char delim = table.delimiter;

  std::vector<std::string> record;
  std::string field;
  std::size_t line = 1;
  std::size_t record_line = 1;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool header_done = false;

  auto finish_record = [&]() {
    record.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
    const bool blank = record.size() == 1 && record.front().empty();
    if (!blank) {
      if (!header_done) {
        table.header = std::move(record);
        header_done = true;
      } else {
        if (record.size() != table.header.size()) {
          throw Error(ErrorCode::kParse,
                      "line " + std::to_string(record_line) + ", column " +
                          std::to_string(std::min(record.size(), table.header.size()) + 1) +
                          ": expected " + std::to_string(table.header.size()) +
                          " fields, found " + std::to_string(record.size()));
        }
        table.rows.push_back(std::move(record));
        table.line_numbers.push_back(record_line);
      }
    }
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"') {
      if (!field.empty() && !std::all_of(field.begin(), field.end(), [](char c) {
            return std::isspace(static_cast<unsigned char>(c));
          })) {
        throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ", column " +
                                           std::to_string(record.size() + 1) +
                                           ": unexpected quote inside unquoted field");
      }
      field.clear();
      in_quotes = true;
      field_was_quoted = true;
    } else if (ch == delim) {
      record.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
    } else if (ch == '\n') {
      if (!field_was_quoted && !field.empty() && field.back() == '\r') field.pop_back();
      finish_record();
      ++line;
      record_line = line;
    } else {
      field.push_back(ch);
    }
  }
  if (in_quotes) {
    throw Error(ErrorCode::kParse,
                "line " + std::to_string(record_line) + ": unterminated quoted field");
  }
  if (!field.empty() || !record.empty()) {
    if (!field_was_quoted && !field.empty() && field.back() == '\r') field.pop_back();
    finish_record();
  }
  if (!header_done) throw Error(ErrorCode::kParse, "line 1: missing header row");
  return table;
}

std::string quote_field(std::string_view field, char delimiter) {
  const bool needs = field.find(delimiter) != std::string_view::npos ||
                     field.find('"') != std::string_view::npos ||
                     field.find('\n') != std::string_view::npos ||
                     field.find('\r') != std::string_view::npos;
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

bool is_missing_token(std::string_view cell) {
  cell = trim(cell);
  return cell.empty() || cell == "?" || iequals(cell, "na") || iequals(cell, "nan") ||
         iequals(cell, "null");
}

bool parse_number(std::string_view cell, double& out) {
  cell = trim(cell);
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  (void)ec;
  return std::string(buf.data(), ptr);
}

}  // namespace metalearn::detail
