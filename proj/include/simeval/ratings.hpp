#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "simeval/evaluation.hpp"

namespace simeval {

// RFC 4180 rows: quoted fields may hold commas, doubled quotes and newlines.
std::vector<std::vector<std::string>> parse_csv(std::istream& in);

// Ratings table with header
//   item_id,input,output,simplicity,fluency,adequacy,<metric>...
// Empty fluency/adequacy/metric cells are read as missing.
std::vector<RatedItem> load_ratings(std::istream& in);
std::vector<RatedItem> load_ratings(const std::filesystem::path& path);

// One item id per line; blank lines are ignored.
std::vector<std::string> load_id_list(const std::filesystem::path& path);

std::string csv_escape(const std::string& field);

}  // namespace simeval
