#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "robustbid/conference.hpp"
#include "robustbid/corpus.hpp"
#include "robustbid/text.hpp"

namespace robustbid::synthgen {

// Co-citation similarity between two corpus papers:
//   |N(p) & N(q)| / (sqrt(|N(p)|) * sqrt(|N(q)|))
// where N(x) is the resolved citation neighborhood (in- plus out-citations).
// Zero when either neighborhood is empty.
double cocitation_similarity(const Corpus& corpus, int p, int q);

struct ClusterResult {
  // Retained clusters in deterministic id order (ascending smallest member),
  // each a sorted list of corpus paper indices.
  std::vector<std::vector<int>> clusters;
  // Corpus paper -> retained cluster id, or -1 for papers whose cluster was
  // dropped by the minimum-size rule.
  std::vector<int> member_of;
};

// Agglomerative average-linkage clustering on distance 1 - similarity,
// merging until target_clusters remain, then dropping clusters smaller than
// min_size. Merge ties take the lexicographically smallest cluster pair.
ClusterResult cluster_subject_areas(const Corpus& corpus, int target_clusters,
                                    int min_size);

// Mean similarity between paper p and the members of one cluster.
double subject_relatedness(const Corpus& corpus, int p, const std::vector<int>& cluster);

// Top min(5, #clusters) clusters per corpus paper by relatedness, ties by
// cluster id ascending. Index 0 is the paper's primary subject area.
std::vector<std::vector<int>> assign_paper_subjects(const Corpus& corpus,
                                                    const ClusterResult& clusters);

// Authors whose distinct citation count into the year window lies in
// [min_cites, max_cites]. year bounds of 0 mean unbounded. Sorted author ids.
std::vector<std::string> select_reviewers(const Corpus& corpus, int min_cites,
                                          int max_cites, int year_min, int year_max);

// Up to 5 subject areas per reviewer: cluster frequencies over the subject
// lists of the papers the reviewer cites, ranked by count descending. Only
// clusters that actually occur are eligible; ties are broken by a seeded
// per-reviewer sub-stream.
std::vector<std::vector<int>> assign_reviewer_subjects(
    const Corpus& corpus, const std::vector<std::vector<int>>& paper_subjects,
    const std::vector<std::string>& reviewer_ids, std::uint64_t master_seed);

struct TpmsResult {
  std::vector<double> raw;         // m*n log-likelihoods (0 for empty abstracts)
  std::vector<double> normalized;  // min-max per paper column into [0,1]
};

// Dirichlet-smoothed unigram language model score of each paper abstract
// under each reviewer's authored-abstract profile, normalized per paper.
TpmsResult simulate_tpms(const Corpus& corpus, const std::vector<int>& paper_indices,
                         const std::vector<std::string>& reviewer_ids, double beta);

// Citation-weighted subject affinity. Each corpus paper q cited by the
// reviewer contributes icf(q)/|C*(q)| to every member of its primary cluster
// C*(q), where icf(q) = log(total in-citations / in-citations(q)). Papers
// that received more than icf_citation_cap citations are forced to score 0.
std::vector<double> subject_score_matrix(const Corpus& corpus,
                                         const std::vector<int>& paper_indices,
                                         const std::vector<std::string>& reviewer_ids,
                                         const ClusterResult& clusters,
                                         const std::vector<std::vector<int>>& paper_subjects,
                                         int icf_citation_cap);

using IdfTable = std::unordered_map<std::string, double>;

enum class TextField { kTitle, kAbstract };

// idf(w) = log(N / document-frequency(w)) over the chosen corpus field.
IdfTable build_idf(const Corpus& corpus, TextField field);

// Inner product of the tf-idf vectors of two token bags.
double tfidf_score(const BagOfWords& a, const BagOfWords& b, const IdfTable& idf);

std::vector<double> tfidf_score_matrix(const Corpus& corpus,
                                       const std::vector<int>& paper_indices,
                                       const std::vector<std::string>& reviewer_ids,
                                       TextField field);

// Probability that the paper at 1-based rank `rank` of a reviewer's
// preference order receives a positive bid: 1 / (1 + exp(alpha*(rank - mu))).
double retention_probability(double rank, double alpha, double mu);

// Per-reviewer sigmoid retention over the total-score ranking, then global
// quantile quantization of retained pairs into bids {1,2,3} at cumulative
// boundaries 8% / 61% (an 8:53:39 split).
BidMatrix sample_bids(const std::vector<double>& total_scores, int m, int n,
                      double alpha, double mu, std::uint64_t master_seed);

// Keeps the target_papers papers and target_reviewers reviewers with the
// most positive bids (ties shuffled by seed), so the per-entity bid-count
// histogram can only shift right. Targets of 0 keep everything. TPMS columns
// are re-normalized when reviewers were dropped.
Conference rebalance_subsample(const Conference& conf, int target_papers,
                               int target_reviewers, std::uint64_t master_seed);

struct GenParams {
  int target_clusters = 1000;
  int min_cluster_size = 5;
  int min_cites = 15;
  int max_cites = 50;
  int icf_citation_cap = 1000;
  double alpha = 0.2;
  double mu = 80.0;
  double beta = 1000.0;
  int year_min = 0;  // 0 = unbounded
  int year_max = 0;
  int target_papers = 0;  // 0 = keep all
  int target_reviewers = 0;
};

// Full generation pipeline: cluster subjects, pick reviewers, simulate
// affinity scores, sample bids, subsample to the target sizes.
Conference generate_conference(const Corpus& corpus, const GenParams& params,
                               std::uint64_t master_seed);

}  // namespace robustbid::synthgen
