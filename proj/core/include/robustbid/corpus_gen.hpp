#pragma once

#include <cstdint>

#include "robustbid/corpus.hpp"

namespace robustbid::corpus_gen {

// Planted-community citation corpus: papers and authors split into topical
// communities with their own vocabularies, citations mostly staying inside a
// community. Sized so that typical authors cite a few dozen distinct corpus
// papers, which puts them inside the reviewer-qualification band downstream.
struct CorpusGenParams {
  int papers = 600;
  int authors = 360;
  int communities = 8;
  int vocab_per_community = 120;
  int shared_vocab = 200;
  int title_words = 9;
  int abstract_words = 80;
  int cites_per_paper = 18;  // per-paper counts vary a little around this
  double cross_community_rate = 0.08;
  int year_min = 2016;
  int year_max = 2020;
  std::uint64_t seed = 1;
};

Corpus generate_corpus(const CorpusGenParams& params);

}  // namespace robustbid::corpus_gen
