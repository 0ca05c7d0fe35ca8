#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace simeval {

inline constexpr int kMinLevel = 0;
inline constexpr int kMaxLevel = 4;
inline constexpr int kLevelCount = kMaxLevel - kMinLevel + 1;

// One sentence of a level-annotated corpus. All rewrite versions of an article
// share `article_id`; a document is one article at one level.
struct SentenceRecord {
  std::string article_id;
  std::string doc_id;
  int level = 0;
  std::string text;
  std::optional<double> soft_label;

  friend bool operator==(const SentenceRecord&, const SentenceRecord&) = default;
};

// Throws ValidationError if the record breaks a per-record invariant.
void validate(const SentenceRecord& record);

// Reads the corpus JSONL format. Records come back in file order with no soft
// label, even if the file carries one (use load_labeled_corpus for that).
std::vector<SentenceRecord> load_corpus(const std::filesystem::path& path);
std::vector<SentenceRecord> load_corpus(std::istream& in);

// Like load_corpus, but keeps an optional "soft_label" field.
std::vector<SentenceRecord> load_labeled_corpus(const std::filesystem::path& path);
std::vector<SentenceRecord> load_labeled_corpus(std::istream& in);

void write_corpus(std::ostream& out, const std::vector<SentenceRecord>& records);
void write_corpus(const std::filesystem::path& path, const std::vector<SentenceRecord>& records);

// Checks the cross-record invariant that a doc_id maps to exactly one level
// (and one article).
void validate_documents(const std::vector<SentenceRecord>& records);

struct SplitRatios {
  double train = 0.90;
  double dev = 0.05;
  double test = 0.05;
};

struct CorpusSplit {
  std::vector<SentenceRecord> train;
  std::vector<SentenceRecord> dev;
  std::vector<SentenceRecord> test;
  std::uint64_t seed = 0;
};

// Group counts for `groups` article groups: dev and test get
// floor(groups * ratio), but at least one group each; train gets the rest.
struct SplitCounts {
  std::size_t train = 0;
  std::size_t dev = 0;
  std::size_t test = 0;
};
SplitCounts split_counts(std::size_t groups, const SplitRatios& ratios);

// Shuffles article groups with `seed` and allocates them to train/dev/test.
// Sentences of one article never straddle splits, and each split keeps the
// input order of its records.
CorpusSplit split_corpus(const std::vector<SentenceRecord>& records, const SplitRatios& ratios,
                         std::uint64_t seed);

// Synthetic leveled corpus: every article rewritten at all five
// levels, sentences drawn from word banks whose difficulty tracks the level.
// `label_noise` is the base spread of per-sentence difficulty around the
// document level; with `heteroscedastic` the spread grows with the distance
// from the simplest level.
struct FixtureOptions {
  std::size_t articles = 50;
  std::size_t sentences_per_doc = 4;
  double label_noise = 0.6;
  bool heteroscedastic = true;
  std::uint64_t seed = 13;
};

std::vector<SentenceRecord> generate_fixture(const FixtureOptions& options);

}  // namespace simeval
