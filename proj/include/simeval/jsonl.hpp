#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iosfwd>
#include <string>

#include "json.hpp"

namespace simeval {

using Json = nlohmann::ordered_json;

// Calls `visit(line_number, object)` for every non-blank line of a JSONL
// stream. Lines that are not JSON objects raise ParseError with the 1-based
// line number.
void for_each_jsonl(std::istream& in, const std::function<void(std::size_t, const Json&)>& visit);
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t, const Json&)>& visit);

// Opens `path` for reading, raising IoError when it does not exist.
std::ifstream open_input(const std::filesystem::path& path);
// Opens `path` for writing (truncating), creating parent directories.
std::ofstream open_output(const std::filesystem::path& path);

void write_jsonl_line(std::ostream& out, const Json& object);

// Whole-file helpers for small JSON documents (models, reports, configs).
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& document);

}  // namespace simeval
