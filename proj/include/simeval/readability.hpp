#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace simeval {

// Surface counts behind FKGL. A valid TextStats has every count >= 1 and
// syllable_count >= word_count.
struct TextStats {
  std::size_t sentence_count = 1;
  std::size_t word_count = 1;
  std::size_t syllable_count = 1;

  friend bool operator==(const TextStats&, const TextStats&) = default;
};

// Dictionary-free syllable estimate for one word:
//   - lowercase, count maximal runs of [aeiouy];
//   - a final "e" after a non-vowel is silent (-1), unless that leaves 0;
//   - a final consonant + "le" is its own syllable (+1);
//   - never less than 1.
// Throws ValidationError if the word has no alphabetic character.
std::size_t count_syllables(std::string_view word);

// Word tokens: maximal runs of letters/digits with internal apostrophes or
// hyphens. Bytes >= 0x80 are treated as letters so UTF-8 words stay whole.
std::vector<std::string_view> tokenize_words(std::string_view text);

// Segments ended by '.', '!' or '?' followed by whitespace or end of text.
// Only segments containing a word are counted; the result is at least 1.
std::size_t count_sentences(std::string_view text);

// Syllables of a token from tokenize_words; digit-only tokens count as one.
std::size_t token_syllables(std::string_view token);

// Number of UTF-8 code points in `token`.
std::size_t char_length(std::string_view token);

// Throws ValidationError when `text` has no words.
TextStats analyze(std::string_view text);

// Flesch-Kincaid grade level, unclamped:
//   0.39 * words/sentences + 11.8 * syllables/words - 15.59
double fkgl(const TextStats& stats);

inline double fkgl(std::string_view text) { return fkgl(analyze(text)); }

}  // namespace simeval
