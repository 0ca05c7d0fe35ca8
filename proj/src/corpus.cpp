#include "simeval/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>

#include "simeval/error.hpp"
#include "simeval/jsonl.hpp"
#include "simeval/random.hpp"

namespace simeval {

namespace {

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

const Json& require(const Json& object, const char* key) {
  auto it = object.find(key);
  if (it == object.end()) throw ValidationError(std::string("missing key \"") + key + "\"");
  return *it;
}

std::string require_string(const Json& object, const char* key) {
  const Json& v = require(object, key);
  if (!v.is_string()) throw ValidationError(std::string("\"") + key + "\" must be a string");
  return v.get<std::string>();
}

SentenceRecord record_from_json(const Json& object, bool keep_soft_label) {
  SentenceRecord record;
  record.article_id = require_string(object, "article_id");
  record.doc_id = require_string(object, "doc_id");
  const Json& level = require(object, "level");
  if (!level.is_number_integer()) throw ValidationError("\"level\" must be an integer");
  const auto raw_level = level.get<long long>();
  if (raw_level < kMinLevel || raw_level > kMaxLevel)
    throw ValidationError("level " + std::to_string(raw_level) + " outside 0..4");
  record.level = static_cast<int>(raw_level);
  record.text = require_string(object, "text");
  if (keep_soft_label) {
    if (auto it = object.find("soft_label"); it != object.end() && !it->is_null()) {
      if (!it->is_number()) throw ValidationError("\"soft_label\" must be a number");
      record.soft_label = it->get<double>();
    }
  }
  validate(record);
  return record;
}

std::vector<SentenceRecord> load(std::istream& in, bool keep_soft_label) {
  std::vector<SentenceRecord> records;
  for_each_jsonl(in, [&](std::size_t line, const Json& object) {
    try {
      records.push_back(record_from_json(object, keep_soft_label));
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line) + ": " + e.what());
    }
  });
  return records;
}

std::vector<SentenceRecord> load(const std::filesystem::path& path, bool keep_soft_label) {
  auto in = open_input(path);
  try {
    return load(in, keep_soft_label);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace

void validate(const SentenceRecord& record) {
  if (record.level < kMinLevel || record.level > kMaxLevel)
    throw ValidationError("level " + std::to_string(record.level) + " outside 0..4");
  if (is_blank(record.text)) throw ValidationError("empty text in doc " + record.doc_id);
  if (record.soft_label && !std::isfinite(*record.soft_label))
    throw ValidationError("non-finite soft_label in doc " + record.doc_id);
}

std::vector<SentenceRecord> load_corpus(const std::filesystem::path& path) { return load(path, false); }
std::vector<SentenceRecord> load_corpus(std::istream& in) { return load(in, false); }
std::vector<SentenceRecord> load_labeled_corpus(const std::filesystem::path& path) {
  return load(path, true);
}
std::vector<SentenceRecord> load_labeled_corpus(std::istream& in) { return load(in, true); }

void write_corpus(std::ostream& out, const std::vector<SentenceRecord>& records) {
  for (const auto& r : records) {
    Json object{{"article_id", r.article_id}, {"doc_id", r.doc_id}, {"level", r.level}, {"text", r.text}};
    if (r.soft_label) object["soft_label"] = *r.soft_label;
    write_jsonl_line(out, object);
  }
}

void write_corpus(const std::filesystem::path& path, const std::vector<SentenceRecord>& records) {
  auto out = open_output(path);
  write_corpus(out, records);
  if (!out) throw IoError("write failed", path.string());
}

void validate_documents(const std::vector<SentenceRecord>& records) {
  std::unordered_map<std::string, const SentenceRecord*> first;
  for (const auto& r : records) {
    auto [it, inserted] = first.emplace(r.doc_id, &r);
    if (inserted) continue;
    if (it->second->level != r.level)
      throw ValidationError("doc " + r.doc_id + " has sentences at levels " +
                            std::to_string(it->second->level) + " and " + std::to_string(r.level));
    if (it->second->article_id != r.article_id)
      throw ValidationError("doc " + r.doc_id + " belongs to articles " + it->second->article_id +
                            " and " + r.article_id);
  }
}

SplitCounts split_counts(std::size_t groups, const SplitRatios& ratios) {
  if (groups < 3)
    throw ValidationError("need at least 3 article groups to split, got " + std::to_string(groups));
  if (!(ratios.train >= 0 && ratios.dev >= 0 && ratios.test >= 0))
    throw ValidationError("split ratios must be non-negative");
  const double total = ratios.train + ratios.dev + ratios.test;
  if (std::abs(total - 1.0) > 1e-6) throw ValidationError("split ratios must sum to 1");

  const auto n = static_cast<double>(groups);
  SplitCounts counts;
  // The small epsilon keeps e.g. 100 * 0.05 from flooring to 4.
  counts.dev = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(n * ratios.dev + 1e-9)));
  counts.test = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(n * ratios.test + 1e-9)));
  if (counts.dev + counts.test >= groups)
    throw ValidationError("split ratios leave no article groups for training");
  counts.train = groups - counts.dev - counts.test;
  return counts;
}

CorpusSplit split_corpus(const std::vector<SentenceRecord>& records, const SplitRatios& ratios,
                         std::uint64_t seed) {
  std::set<std::string> unique_articles;
  for (const auto& r : records) unique_articles.insert(r.article_id);
  std::vector<std::string> articles(unique_articles.begin(), unique_articles.end());

  const SplitCounts counts = split_counts(articles.size(), ratios);
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(articles));

  enum Part { train, dev, test };
  std::unordered_map<std::string, Part> assignment;
  for (std::size_t i = 0; i < articles.size(); ++i) {
    Part part = i < counts.dev ? dev : i < counts.dev + counts.test ? test : train;
    assignment.emplace(articles[i], part);
  }

  CorpusSplit split;
  split.seed = seed;
  for (const auto& r : records) {
    switch (assignment.at(r.article_id)) {
      case train: split.train.push_back(r); break;
      case dev: split.dev.push_back(r); break;
      case test: split.test.push_back(r); break;
    }
  }
  return split;
}

}  // namespace simeval
