#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string_view>

#include "simeval/corpus.hpp"
#include "simeval/error.hpp"
#include "simeval/random.hpp"

namespace simeval {

namespace {

constexpr std::array<std::string_view, 24> kShortWords{
    "the", "a", "cat", "dog", "sun", "ran", "big", "red", "is", "was", "on", "in",
    "man", "day", "went", "saw", "got", "new", "old", "had", "to", "and", "it", "we"};

constexpr std::array<std::string_view, 16> kMediumWords{
    "people", "water", "city", "river", "simple", "garden", "happy", "morning",
    "teacher", "village", "open", "little", "student", "market", "over", "table"};

constexpr std::array<std::string_view, 16> kLongWords{
    "government",     "international", "development",  "environmental",
    "extraordinary",  "responsibility", "organization", "information",
    "community",      "significantly", "economic",     "administration",
    "investigation",  "legislation",   "infrastructure", "unprecedented"};

template <std::size_t N>
std::string_view pick(Rng& rng, const std::array<std::string_view, N>& bank) {
  return bank[static_cast<std::size_t>(rng.below(N))];
}

// Difficulty 0 reads like level 4; difficulty 4 like an original article.
std::string make_sentence(Rng& rng, double difficulty) {
  const double words = std::round(7.0 + 2.5 * difficulty + rng.normal(0.0, 1.5));
  const auto count = static_cast<std::size_t>(std::clamp(words, 3.0, 40.0));
  const double p_long = std::clamp(0.05 + 0.09 * difficulty, 0.0, 0.6);
  const double p_medium = 0.25;

  std::string sentence;
  for (std::size_t i = 0; i < count; ++i) {
    const double u = rng.uniform();
    std::string_view word = u < p_long ? pick(rng, kLongWords)
                            : u < p_long + p_medium ? pick(rng, kMediumWords)
                                                    : pick(rng, kShortWords);
    if (i > 0) sentence += ' ';
    sentence += word;
  }
  sentence[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(sentence[0])));
  sentence += '.';
  return sentence;
}

std::string article_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "art-%04zu", index);
  return buf;
}

}  // namespace

std::vector<SentenceRecord> generate_fixture(const FixtureOptions& options) {
  if (options.articles == 0 || options.sentences_per_doc == 0)
    throw ValidationError("fixture needs at least one article and one sentence per document");
  if (!(options.label_noise >= 0.0)) throw ValidationError("label_noise must be non-negative");

  Rng rng(options.seed);
  std::vector<SentenceRecord> records;
  records.reserve(options.articles * kLevelCount * options.sentences_per_doc);
  for (std::size_t a = 0; a < options.articles; ++a) {
    const std::string article = article_name(a);
    for (int level = kMinLevel; level <= kMaxLevel; ++level) {
      const double base = static_cast<double>(kMaxLevel - level);
      const double spread =
          options.label_noise * (options.heteroscedastic ? 0.5 + 0.25 * base : 1.0);
      const std::string doc = article + ".L" + std::to_string(level);
      for (std::size_t s = 0; s < options.sentences_per_doc; ++s) {
        const double difficulty = base + rng.normal(0.0, spread);
        records.push_back({article, doc, level, make_sentence(rng, difficulty), std::nullopt});
      }
    }
  }
  return records;
}

}  // namespace simeval
