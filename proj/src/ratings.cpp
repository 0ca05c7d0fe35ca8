#include "simeval/ratings.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <set>

#include "simeval/error.hpp"
#include "simeval/jsonl.hpp"

namespace simeval {

namespace {

const std::vector<std::string> kFixedColumns{"item_id", "input", "output", "simplicity", "fluency", "adequacy"};

std::optional<double> parse_number(const std::string& cell, const std::string& column, std::size_t row) {
  const auto first = cell.find_first_not_of(" \t");
  if (first == std::string::npos) return std::nullopt;
  const auto last = cell.find_last_not_of(" \t");
  const char* begin = cell.data() + first;
  const char* end = cell.data() + last + 1;
  if (*begin == '+') ++begin;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value))
    throw ParseError("column " + column + ": \"" + cell + "\" is not a finite number", row);
  return value;
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  const std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool row_started = false;
  std::size_t line = 1;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const char c = data[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < data.size() && data[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty()) throw ParseError("quote inside an unquoted field", line);
        quoted = true;
        row_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        row_started = true;
        break;
      case '\r':
        break;
      case '\n':
        if (row_started || !field.empty()) {
          row.push_back(std::move(field));
          rows.push_back(std::move(row));
        }
        field.clear();
        row.clear();
        row_started = false;
        ++line;
        break;
      default:
        field += c;
        row_started = true;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line);
  if (row_started || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<RatedItem> load_ratings(std::istream& in) {
  const auto rows = parse_csv(in);
  if (rows.empty()) throw ParseError("ratings file is empty");
  const auto& header = rows.front();
  if (header.size() < kFixedColumns.size() ||
      !std::equal(kFixedColumns.begin(), kFixedColumns.end(), header.begin()))
    throw ParseError("ratings header must start with item_id,input,output,simplicity,fluency,adequacy", 1);
  std::set<std::string> seen_metrics;
  for (std::size_t c = kFixedColumns.size(); c < header.size(); ++c) {
    if (header[c].empty() || !seen_metrics.insert(header[c]).second)
      throw ParseError("empty or duplicate metric column \"" + header[c] + "\"", 1);
  }

  std::vector<RatedItem> items;
  std::set<std::string> ids;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::size_t row_no = r + 1;
    if (row.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(row.size()),
                       row_no);
    RatedItem item;
    item.item_id = row[0];
    if (item.item_id.empty()) throw ParseError("empty item_id", row_no);
    if (!ids.insert(item.item_id).second) throw ParseError("duplicate item_id " + item.item_id, row_no);
    item.input_text = row[1];
    item.output_text = row[2];
    auto simplicity = parse_number(row[3], "simplicity", row_no);
    if (!simplicity) throw ValidationError("item " + item.item_id + " has no simplicity rating");
    item.simplicity = *simplicity;
    item.fluency = parse_number(row[4], "fluency", row_no);
    item.adequacy = parse_number(row[5], "adequacy", row_no);
    for (std::size_t c = kFixedColumns.size(); c < header.size(); ++c)
      item.metric_scores[header[c]] = parse_number(row[c], header[c], row_no);
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<RatedItem> load_ratings(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return load_ratings(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::vector<std::string> load_id_list(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    ids.push_back(line.substr(first, last - first + 1));
  }
  return ids;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace simeval
