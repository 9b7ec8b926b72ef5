#include "robustbid/text.hpp"

#include <array>
#include <cctype>
#include <unordered_set>

namespace robustbid {
namespace {

// Classic English stop-word list (Snowball variant), frozen here so results
// do not depend on any external resource.
constexpr std::array<std::string_view, 174> kStopWords = {
    "a",          "about",      "above",     "after",    "again",    "against",
    "all",        "am",         "an",        "and",      "any",      "are",
    "aren",       "as",         "at",        "be",       "because",  "been",
    "before",     "being",      "below",     "between",  "both",     "but",
    "by",         "can",        "cannot",    "could",    "couldn",   "did",
    "didn",       "do",         "does",      "doesn",    "doing",    "don",
    "down",       "during",     "each",      "few",      "for",      "from",
    "further",    "had",        "hadn",      "has",      "hasn",     "have",
    "haven",      "having",     "he",        "her",      "here",     "hers",
    "herself",    "him",        "himself",   "his",      "how",      "i",
    "if",         "in",         "into",      "is",       "isn",      "it",
    "its",        "itself",     "let",       "me",       "more",     "most",
    "mustn",      "my",         "myself",    "no",       "nor",      "not",
    "of",         "off",        "on",        "once",     "only",     "or",
    "other",      "ought",      "our",       "ours",     "ourselves", "out",
    "over",       "own",        "same",      "shan",     "she",      "should",
    "shouldn",    "so",         "some",      "such",     "than",     "that",
    "the",        "their",      "theirs",    "them",     "themselves", "then",
    "there",      "these",      "they",      "this",     "those",    "through",
    "to",         "too",        "under",     "until",    "up",       "very",
    "was",        "wasn",       "we",        "were",     "weren",    "what",
    "when",       "where",      "which",     "while",    "who",      "whom",
    "why",        "with",       "won",       "would",    "wouldn",   "you",
    "your",       "yours",      "yourself",  "yourselves", "above",  "across",
    "also",       "among",      "anyone",    "become",   "becomes",  "becoming",
    "been",       "besides",    "beyond",    "everyone", "everything", "however",
    "indeed",     "instead",    "many",      "much",     "must",     "neither",
    "nevertheless", "nobody",   "none",      "nothing",  "now",      "often",
    "otherwise",  "perhaps",    "rather",    "several",  "someone",  "something",
};

const std::unordered_set<std::string_view>& stop_word_set() {
  static const std::unordered_set<std::string_view> set(kStopWords.begin(),
                                                        kStopWords.end());
  return set;
}

}  // namespace

bool is_stop_word(std::string_view token) {
  return stop_word_set().count(token) != 0;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (current.size() >= 2 && !is_stop_word(current)) out.push_back(current);
    current.clear();
  };
  for (char ch : text) {
    const auto uc = static_cast<unsigned char>(ch);
    if (std::isalnum(uc)) {
      current += static_cast<char>(std::tolower(uc));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

BagOfWords bag_of_words(std::string_view text) {
  BagOfWords bag;
  for (auto& tok : tokenize(text)) ++bag[tok];
  return bag;
}

}  // namespace robustbid
