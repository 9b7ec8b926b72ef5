#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace robustbid {

// Tokenization used everywhere text is consumed (titles, abstracts, language
// models): lowercase, split on non-alphanumeric bytes, drop tokens shorter
// than two characters, drop stop words from a fixed embedded list. The list
// is part of the data contract; changing it changes every downstream model.
std::vector<std::string> tokenize(std::string_view text);

bool is_stop_word(std::string_view token);

// Token -> count. Multiset semantics: repeated tokens accumulate.
using BagOfWords = std::unordered_map<std::string, int>;

BagOfWords bag_of_words(std::string_view text);

inline int bag_total(const BagOfWords& bag) {
  int t = 0;
  for (const auto& [w, c] : bag) t += c;
  return t;
}

}  // namespace robustbid
