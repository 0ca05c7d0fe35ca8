#include "simeval/readability.hpp"

#include <algorithm>
#include <cctype>

#include "simeval/error.hpp"

namespace simeval {

namespace {

bool is_ascii_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_high(char c) { return static_cast<unsigned char>(c) >= 0x80; }
bool is_word_char(char c) { return is_ascii_alpha(c) || is_digit(c) || is_high(c); }
bool is_joiner(char c) { return c == '\'' || c == '-'; }

bool is_vowel(char c) {
  switch (c) {
    case 'a': case 'e': case 'i': case 'o': case 'u': case 'y':
      return true;
    default:
      return false;
  }
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

}  // namespace

std::size_t count_syllables(std::string_view word) {
  std::string lower;
  lower.reserve(word.size());
  for (char c : word) {
    if (is_ascii_alpha(c)) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    else if (is_high(c)) lower += c;
    else lower += ' ';
  }
  if (std::none_of(word.begin(), word.end(), [](char c) { return is_ascii_alpha(c) || is_high(c); }))
    throw ValidationError("no alphabetic characters in \"" + std::string(word) + "\"");

  std::size_t groups = 0;
  bool in_group = false;
  for (char c : lower) {
    const bool v = is_vowel(c);
    if (v && !in_group) ++groups;
    in_group = v;
  }

  // Trailing-letter rules look at the word as written, ignoring the
  // characters after the last letter.
  const auto last = lower.find_last_not_of(' ');
  const std::string_view tail(lower.data(), last + 1);
  const auto n = tail.size();
  if (n >= 2 && tail[n - 1] == 'e' && is_ascii_alpha(tail[n - 2]) && !is_vowel(tail[n - 2]) &&
      groups > 1) {
    --groups;
  }
  if (n >= 3 && tail[n - 2] == 'l' && tail[n - 1] == 'e' && is_ascii_alpha(tail[n - 3]) &&
      !is_vowel(tail[n - 3])) {
    ++groups;
  }
  return std::max<std::size_t>(groups, 1);
}

std::vector<std::string_view> tokenize_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_word_char(text[i])) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < text.size()) {
      if (is_word_char(text[i])) {
        ++i;
      } else if (is_joiner(text[i]) && i + 1 < text.size() && is_word_char(text[i + 1])) {
        i += 2;
      } else {
        break;
      }
    }
    words.push_back(text.substr(start, i - start));
  }
  return words;
}

std::size_t count_sentences(std::string_view text) {
  std::size_t sentences = 0;
  bool segment_has_word = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (is_word_char(c)) segment_has_word = true;
    if (is_terminator(c) && (i + 1 == text.size() || is_space(text[i + 1]))) {
      if (segment_has_word) ++sentences;
      segment_has_word = false;
    }
  }
  if (segment_has_word) ++sentences;
  return std::max<std::size_t>(sentences, 1);
}

std::size_t token_syllables(std::string_view token) {
  if (std::all_of(token.begin(), token.end(), [](char c) { return !is_ascii_alpha(c) && !is_high(c); }))
    return 1;
  return count_syllables(token);
}

std::size_t char_length(std::string_view token) {
  return static_cast<std::size_t>(std::count_if(token.begin(), token.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

TextStats analyze(std::string_view text) {
  const auto words = tokenize_words(text);
  if (words.empty()) throw ValidationError("text has no words: \"" + std::string(text) + "\"");
  TextStats stats;
  stats.word_count = words.size();
  stats.sentence_count = count_sentences(text);
  stats.syllable_count = 0;
  for (auto w : words) stats.syllable_count += token_syllables(w);
  return stats;
}

double fkgl(const TextStats& stats) {
  const auto words = static_cast<double>(stats.word_count);
  return 0.39 * (words / static_cast<double>(stats.sentence_count)) +
         11.8 * (static_cast<double>(stats.syllable_count) / words) - 15.59;
}

}  // namespace simeval
