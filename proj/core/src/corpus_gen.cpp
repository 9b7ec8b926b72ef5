#include "robustbid/corpus_gen.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "robustbid/errors.hpp"
#include "robustbid/rng.hpp"

namespace robustbid::corpus_gen {

namespace {

const char* const kSyllables[] = {"ba", "ce", "di", "fo", "gu", "la", "me",
                                  "ni", "po", "ra", "su", "te", "vo", "xa",
                                  "ze", "ki", "mo", "ne", "ta", "ri"};
constexpr int kSyllableCount = 20;

std::string pseudo_word(Rng& rng) {
  const int parts = 2 + static_cast<int>(rng.below(3));
  std::string w;
  for (int i = 0; i < parts; ++i) w += kSyllables[rng.below(kSyllableCount)];
  return w;
}

std::vector<std::string> word_bank(std::uint64_t seed, int count) {
  Rng rng(seed);
  std::vector<std::string> bank;
  std::unordered_set<std::string> seen;
  while (static_cast<int>(bank.size()) < count) {
    std::string w = pseudo_word(rng);
    if (seen.insert(w).second) bank.push_back(std::move(w));
  }
  return bank;
}

std::string pad_index(const char* prefix, int i, int width) {
  std::string digits = std::to_string(i);
  std::string out = prefix;
  out.append(width - static_cast<int>(digits.size()), '0');
  out += digits;
  return out;
}

void validate(const CorpusGenParams& p) {
  if (p.papers < 1) throw ParamError("corpus papers must be positive");
  if (p.communities < 1 || p.communities > p.papers)
    throw ParamError("communities must be in [1, papers]");
  if (p.authors < p.communities)
    throw ParamError("need at least one author per community");
  if (p.vocab_per_community < 10 || p.shared_vocab < 10)
    throw ParamError("vocabulary banks must hold at least 10 words");
  if (p.title_words < 1 || p.abstract_words < 1)
    throw ParamError("title and abstract lengths must be positive");
  if (p.cites_per_paper < 1) throw ParamError("cites_per_paper must be positive");
  if (p.cross_community_rate < 0.0 || p.cross_community_rate >= 1.0)
    throw ParamError("cross_community_rate must be in [0, 1)");
  if (p.year_max < p.year_min || p.year_min < 1)
    throw ParamError("year range is invalid");
}

}  // namespace

Corpus generate_corpus(const CorpusGenParams& params) {
  validate(params);
  const int paper_width = static_cast<int>(std::to_string(params.papers - 1).size());
  const int author_width =
      static_cast<int>(std::to_string(params.authors - 1).size());

  std::vector<std::vector<std::string>> community_words(params.communities);
  for (int c = 0; c < params.communities; ++c)
    community_words[c] = word_bank(
        derive_seed(params.seed, "vocab", static_cast<std::uint64_t>(c)),
        params.vocab_per_community);
  const std::vector<std::string> shared_words =
      word_bank(derive_seed(params.seed, "vocab-shared"), params.shared_vocab);

  std::vector<std::vector<int>> community_papers(params.communities);
  for (int i = 0; i < params.papers; ++i)
    community_papers[i % params.communities].push_back(i);
  std::vector<std::vector<int>> community_authors(params.communities);
  for (int a = 0; a < params.authors; ++a)
    community_authors[a % params.communities].push_back(a);

  std::vector<PaperRecord> papers;
  papers.reserve(params.papers);
  for (int i = 0; i < params.papers; ++i) {
    const int c = i % params.communities;
    Rng rng(derive_seed(params.seed, "paper", static_cast<std::uint64_t>(i)));
    PaperRecord rec;
    rec.paper_id = pad_index("p", i, paper_width);
    rec.venue = "venue-" + std::to_string(c % 4);
    rec.year = params.year_min +
               static_cast<int>(rng.below(params.year_max - params.year_min + 1));

    const auto& pool = community_authors[c];
    const int author_count = std::min<int>(1 + static_cast<int>(rng.below(2)),
                                           static_cast<int>(pool.size()));
    auto picks = rng.sample_without_replacement(static_cast<int>(pool.size()),
                                               author_count);
    std::sort(picks.begin(), picks.end());
    for (int k : picks)
      rec.author_ids.push_back(pad_index("a", pool[k], author_width));

    auto sample_words = [&](int count, double shared_rate) {
      std::string text;
      for (int w = 0; w < count; ++w) {
        const auto& bank =
            rng.real01() < shared_rate ? shared_words : community_words[c];
        if (w) text += ' ';
        text += bank[rng.below(bank.size())];
      }
      return text;
    };
    rec.title = sample_words(params.title_words, 0.3);
    rec.abstract_text = sample_words(params.abstract_words, 0.4);

    const int want =
        std::max(1, params.cites_per_paper - 3 + static_cast<int>(rng.below(7)));
    std::set<int> cited;
    const int attempts = 6 * want;
    for (int a = 0; a < attempts && static_cast<int>(cited.size()) < want; ++a) {
      int target;
      if (params.communities > 1 && rng.real01() < params.cross_community_rate) {
        target = static_cast<int>(rng.below(params.papers));
        if (target % params.communities == c) continue;
      } else {
        const auto& own = community_papers[c];
        target = own[rng.below(own.size())];
      }
      if (target != i) cited.insert(target);
    }
    for (int q : cited) rec.out_citations.push_back(pad_index("p", q, paper_width));

    papers.push_back(std::move(rec));
  }
  return Corpus(std::move(papers));
}

}  // namespace robustbid::corpus_gen
