#include "simeval/jsonl.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "simeval/error.hpp"

namespace simeval {

void for_each_jsonl(std::istream& in, const std::function<void(std::size_t, const Json&)>& visit) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Json object;
    try {
      object = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    if (!object.is_object()) throw ParseError("expected a JSON object", line_no);
    visit(line_no, object);
  }
}

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t, const Json&)>& visit) {
  auto in = open_input(path);
  try {
    for_each_jsonl(in, visit);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw IoError("no such file", path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading", path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing", path.string());
  return out;
}

void write_jsonl_line(std::ostream& out, const Json& object) {
  out << object.dump(-1, ' ', false, Json::error_handler_t::replace) << '\n';
}

Json read_json_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return Json::parse(buffer.str());
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": malformed JSON: " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& document) {
  auto out = open_output(path);
  out << document.dump(2, ' ', false, Json::error_handler_t::replace) << '\n';
  if (!out) throw IoError("write failed", path.string());
}

}  // namespace simeval
