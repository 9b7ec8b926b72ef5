#include "robustbid/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "robustbid/csvio.hpp"
#include "robustbid/errors.hpp"
#include "robustbid/rng.hpp"

namespace robustbid::synthgen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t common_count(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t count = 0, i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (a[i] > b[j]) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

}  // namespace

double cocitation_similarity(const Corpus& corpus, int p, int q) {
  const auto np = corpus.neighborhood(p);
  const auto nq = corpus.neighborhood(q);
  if (np.empty() || nq.empty()) return 0.0;
  const auto common = common_count(np, nq);
  return static_cast<double>(common) /
         (std::sqrt(static_cast<double>(np.size())) *
          std::sqrt(static_cast<double>(nq.size())));
}

ClusterResult cluster_subject_areas(const Corpus& corpus, int target_clusters,
                                    int min_size) {
  const int n = corpus.size();
  if (target_clusters < 1) throw ParamError("target_clusters must be >= 1");
  if (min_size < 1) throw ParamError("min_size must be >= 1");

  // Neighborhoods once, then the dense distance matrix 1 - similarity.
  std::vector<std::vector<int>> nb(n);
  for (int i = 0; i < n; ++i) nb[i] = corpus.neighborhood(i);
  std::vector<double> dist(static_cast<std::size_t>(n) * n, kInf);
  auto d = [&](int i, int j) -> double& { return dist[static_cast<std::size_t>(i) * n + j]; };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double sim = 0.0;
      if (!nb[i].empty() && !nb[j].empty())
        sim = static_cast<double>(common_count(nb[i], nb[j])) /
              (std::sqrt(static_cast<double>(nb[i].size())) *
               std::sqrt(static_cast<double>(nb[j].size())));
      d(i, j) = d(j, i) = 1.0 - sim;
    }
  }

  std::vector<bool> alive(n, true);
  std::vector<int> size(n, 1);
  std::vector<std::vector<int>> members(n);
  for (int i = 0; i < n; ++i) members[i] = {i};

  // Cached per-row minimum over alive j > i; ties keep the smallest j, and
  // the global scan keeps the smallest i, so merges always pick the
  // lexicographically smallest minimizing pair.
  std::vector<double> rowmin_d(n, kInf);
  std::vector<int> rowmin_j(n, -1);
  auto recompute_row = [&](int i) {
    rowmin_d[i] = kInf;
    rowmin_j[i] = -1;
    for (int j = i + 1; j < n; ++j) {
      if (!alive[j]) continue;
      if (d(i, j) < rowmin_d[i]) {
        rowmin_d[i] = d(i, j);
        rowmin_j[i] = j;
      }
    }
  };
  for (int i = 0; i < n; ++i) recompute_row(i);

  int active = n;
  while (active > target_clusters) {
    int best_i = -1;
    double best_d = kInf;
    for (int i = 0; i < n; ++i) {
      if (!alive[i] || rowmin_j[i] < 0) continue;
      if (rowmin_d[i] < best_d) {
        best_d = rowmin_d[i];
        best_i = i;
      }
    }
    if (best_i < 0) break;  // fewer than two clusters left
    const int i = best_i;
    const int j = rowmin_j[i];

    // Average linkage via Lance-Williams: the merged cluster's distance to k
    // is the size-weighted mean of the parts' distances.
    for (int k = 0; k < n; ++k) {
      if (!alive[k] || k == i || k == j) continue;
      const double dk = (size[i] * d(i, k) + size[j] * d(j, k)) /
                        static_cast<double>(size[i] + size[j]);
      d(i, k) = d(k, i) = dk;
    }
    size[i] += size[j];
    members[i].insert(members[i].end(), members[j].begin(), members[j].end());
    members[j].clear();
    alive[j] = false;
    --active;

    for (int k = 0; k < n; ++k) {
      if (!alive[k]) continue;
      if (k < i) {
        if (rowmin_j[k] == i || rowmin_j[k] == j) {
          recompute_row(k);
        } else {
          const double dk = d(k, i);
          if (dk < rowmin_d[k] || (dk == rowmin_d[k] && i < rowmin_j[k])) {
            rowmin_d[k] = dk;
            rowmin_j[k] = i;
          }
        }
      } else if (k > i && rowmin_j[k] == j) {
        recompute_row(k);
      }
    }
    recompute_row(i);
  }

  ClusterResult result;
  result.member_of.assign(n, -1);
  std::vector<std::vector<int>> retained;
  for (int i = 0; i < n; ++i) {
    if (!alive[i] || size[i] < min_size) continue;
    std::sort(members[i].begin(), members[i].end());
    retained.push_back(std::move(members[i]));
  }
  std::sort(retained.begin(), retained.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  for (std::size_t c = 0; c < retained.size(); ++c)
    for (int p : retained[c]) result.member_of[p] = static_cast<int>(c);
  result.clusters = std::move(retained);
  return result;
}

double subject_relatedness(const Corpus& corpus, int p, const std::vector<int>& cluster) {
  if (cluster.empty()) return 0.0;
  double acc = 0.0;
  for (int q : cluster) acc += cocitation_similarity(corpus, p, q);
  return acc / static_cast<double>(cluster.size());
}

std::vector<std::vector<int>> assign_paper_subjects(const Corpus& corpus,
                                                    const ClusterResult& clusters) {
  const int n = corpus.size();
  const int c = static_cast<int>(clusters.clusters.size());
  const int want = std::min(5, c);
  std::vector<std::vector<int>> out(n);
  if (want == 0) return out;
  std::vector<std::pair<double, int>> scored(c);
  for (int p = 0; p < n; ++p) {
    for (int k = 0; k < c; ++k)
      scored[k] = {subject_relatedness(corpus, p, clusters.clusters[k]), k};
    // descending relatedness, ascending cluster id on ties
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    out[p].reserve(want);
    for (int k = 0; k < want; ++k) out[p].push_back(scored[k].second);
  }
  return out;
}

namespace {

bool in_window(int year, int year_min, int year_max) {
  if (year_min > 0 && year < year_min) return false;
  if (year_max > 0 && year > year_max) return false;
  return true;
}

// Distinct corpus papers cited by the author across authored papers.
std::vector<int> author_citations(const Corpus& corpus, const std::string& author_id) {
  std::vector<int> cited;
  for (int paper : corpus.papers_of_author(author_id))
    for (int q : corpus.cited_by_paper(paper)) cited.push_back(q);
  std::sort(cited.begin(), cited.end());
  cited.erase(std::unique(cited.begin(), cited.end()), cited.end());
  return cited;
}

}  // namespace

std::vector<std::string> select_reviewers(const Corpus& corpus, int min_cites,
                                          int max_cites, int year_min, int year_max) {
  if (min_cites < 0 || max_cites < min_cites)
    throw ParamError("reviewer citation bounds must satisfy 0 <= min <= max");
  std::vector<std::string> out;
  for (const auto& author : corpus.author_ids()) {
    int count = 0;
    for (int q : author_citations(corpus, author))
      if (in_window(corpus.paper(q).year, year_min, year_max)) ++count;
    if (count >= min_cites && count <= max_cites) out.push_back(author);
  }
  return out;  // author_ids() is sorted, so this is too
}

std::vector<std::vector<int>> assign_reviewer_subjects(
    const Corpus& corpus, const std::vector<std::vector<int>>& paper_subjects,
    const std::vector<std::string>& reviewer_ids, std::uint64_t master_seed) {
  std::vector<std::vector<int>> out(reviewer_ids.size());
  for (std::size_t r = 0; r < reviewer_ids.size(); ++r) {
    std::unordered_map<int, int> freq;
    for (int q : author_citations(corpus, reviewer_ids[r]))
      for (int c : paper_subjects[q]) ++freq[c];
    if (freq.empty()) continue;
    std::vector<std::pair<int, int>> items(freq.begin(), freq.end());  // (cluster, count)
    // Random keys from a per-reviewer sub-stream break count ties; the
    // stream is keyed by reviewer id, not index, so later subsampling does
    // not disturb it.
    Rng rng(derive_seed(master_seed, "subject-ties", fnv1a64(reviewer_ids[r])));
    std::sort(items.begin(), items.end());  // canonical order before keying
    std::vector<std::uint64_t> key(items.size());
    for (auto& k : key) k = rng.next_u64();
    std::vector<std::size_t> order(items.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (items[a].second != items[b].second) return items[a].second > items[b].second;
      if (key[a] != key[b]) return key[a] < key[b];
      return items[a].first < items[b].first;
    });
    const std::size_t want = std::min<std::size_t>(5, items.size());
    for (std::size_t k = 0; k < want; ++k) out[r].push_back(items[order[k]].first);
  }
  return out;
}

namespace {

BagOfWords pooled_field_bag(const Corpus& corpus, const std::string& author_id,
                            TextField field) {
  BagOfWords bag;
  for (int paper : corpus.papers_of_author(author_id)) {
    const auto& text = field == TextField::kTitle ? corpus.paper(paper).title
                                                  : corpus.paper(paper).abstract_text;
    for (auto& tok : tokenize(text)) ++bag[tok];
  }
  return bag;
}

}  // namespace

TpmsResult simulate_tpms(const Corpus& corpus, const std::vector<int>& paper_indices,
                         const std::vector<std::string>& reviewer_ids, double beta) {
  if (beta < 0) throw ParamError("beta must be nonnegative");
  const int m = static_cast<int>(reviewer_ids.size());
  const int n = static_cast<int>(paper_indices.size());

  // Corpus-wide abstract unigram counts.
  BagOfWords corpus_counts;
  long corpus_total = 0;
  for (const auto& p : corpus.papers())
    for (auto& tok : tokenize(p.abstract_text)) {
      ++corpus_counts[tok];
      ++corpus_total;
    }

  std::vector<std::vector<std::string>> paper_tokens(n);
  for (int p = 0; p < n; ++p)
    paper_tokens[p] = tokenize(corpus.paper(paper_indices[p]).abstract_text);

  TpmsResult result;
  result.raw.assign(static_cast<std::size_t>(m) * n, 0.0);
  for (int r = 0; r < m; ++r) {
    const BagOfWords profile = pooled_field_bag(corpus, reviewer_ids[r], TextField::kAbstract);
    const double profile_total = bag_total(profile);
    for (int p = 0; p < n; ++p) {
      double ll = 0.0;
      for (const auto& tok : paper_tokens[p]) {
        auto pit = profile.find(tok);
        const double own = pit == profile.end() ? 0.0 : pit->second;
        auto cit = corpus_counts.find(tok);
        const double background =
            cit == corpus_counts.end() ? 0.0 : static_cast<double>(cit->second) / corpus_total;
        const double f = (own + beta * background) / (profile_total + beta);
        if (f <= 0.0)
          throw ParseError("tpms: token '" + tok + "' has zero probability mass");
        ll += std::log(f);
      }
      result.raw[static_cast<std::size_t>(r) * n + p] = ll;
    }
  }

  // Min-max per paper column into [0,1]; a constant column maps to 1.
  result.normalized = result.raw;
  for (int p = 0; p < n; ++p) {
    double lo = kInf, hi = -kInf;
    for (int r = 0; r < m; ++r) {
      const double v = result.raw[static_cast<std::size_t>(r) * n + p];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    for (int r = 0; r < m; ++r) {
      auto& v = result.normalized[static_cast<std::size_t>(r) * n + p];
      v = hi > lo ? (v - lo) / (hi - lo) : 1.0;
    }
  }
  return result;
}

std::vector<double> subject_score_matrix(const Corpus& corpus,
                                         const std::vector<int>& paper_indices,
                                         const std::vector<std::string>& reviewer_ids,
                                         const ClusterResult& clusters,
                                         const std::vector<std::vector<int>>& paper_subjects,
                                         int icf_citation_cap) {
  const int m = static_cast<int>(reviewer_ids.size());
  const int n = static_cast<int>(paper_indices.size());
  const double total = static_cast<double>(corpus.total_in_citations());
  std::vector<double> out(static_cast<std::size_t>(m) * n, 0.0);
  if (clusters.clusters.empty() || total <= 0.0) return out;

  for (int r = 0; r < m; ++r) {
    // Aggregate each cited paper's weight onto its primary cluster; every
    // member of that cluster then shares the summed weight.
    std::vector<double> cluster_weight(clusters.clusters.size(), 0.0);
    for (int q : author_citations(corpus, reviewer_ids[r])) {
      const int cites = corpus.in_citation_count(q);
      if (cites <= 0) continue;
      if (paper_subjects[q].empty()) continue;
      const int primary = paper_subjects[q].front();
      const double icf = std::log(total / static_cast<double>(cites));
      cluster_weight[primary] +=
          icf / static_cast<double>(clusters.clusters[primary].size());
    }
    for (int p = 0; p < n; ++p) {
      const int corpus_p = paper_indices[p];
      if (corpus.in_citation_count(corpus_p) > icf_citation_cap) continue;
      const int home = clusters.member_of[corpus_p];
      if (home >= 0)
        out[static_cast<std::size_t>(r) * n + p] = cluster_weight[home];
    }
  }
  return out;
}

IdfTable build_idf(const Corpus& corpus, TextField field) {
  std::unordered_map<std::string, int> df;
  for (const auto& p : corpus.papers()) {
    const auto& text = field == TextField::kTitle ? p.title : p.abstract_text;
    BagOfWords bag = bag_of_words(text);
    for (const auto& [w, c] : bag) ++df[w];
  }
  IdfTable idf;
  const double n = static_cast<double>(corpus.size());
  for (const auto& [w, d] : df) idf[w] = std::log(n / static_cast<double>(d));
  return idf;
}

double tfidf_score(const BagOfWords& a, const BagOfWords& b, const IdfTable& idf) {
  const double ta = bag_total(a), tb = bag_total(b);
  if (ta == 0 || tb == 0) return 0.0;
  const BagOfWords& small = a.size() <= b.size() ? a : b;
  const BagOfWords& large = a.size() <= b.size() ? b : a;
  double acc = 0.0;
  for (const auto& [w, cs] : small) {
    auto it = large.find(w);
    if (it == large.end()) continue;
    auto wi = idf.find(w);
    if (wi == idf.end()) continue;
    const double weight = wi->second;
    acc += (cs / ta) * weight * (it->second / tb) * weight;
  }
  return acc;
}

std::vector<double> tfidf_score_matrix(const Corpus& corpus,
                                       const std::vector<int>& paper_indices,
                                       const std::vector<std::string>& reviewer_ids,
                                       TextField field) {
  const int m = static_cast<int>(reviewer_ids.size());
  const int n = static_cast<int>(paper_indices.size());
  const IdfTable idf = build_idf(corpus, field);
  std::vector<BagOfWords> paper_bags(n);
  for (int p = 0; p < n; ++p) {
    const auto& rec = corpus.paper(paper_indices[p]);
    paper_bags[p] = bag_of_words(field == TextField::kTitle ? rec.title : rec.abstract_text);
  }
  std::vector<double> out(static_cast<std::size_t>(m) * n, 0.0);
  for (int r = 0; r < m; ++r) {
    const BagOfWords profile = pooled_field_bag(corpus, reviewer_ids[r], field);
    for (int p = 0; p < n; ++p)
      out[static_cast<std::size_t>(r) * n + p] = tfidf_score(profile, paper_bags[p], idf);
  }
  return out;
}

double retention_probability(double rank, double alpha, double mu) {
  const double x = alpha * (rank - mu);
  // Overflow-safe logistic; exact 0.5 at rank == mu.
  if (x >= 0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

BidMatrix sample_bids(const std::vector<double>& total_scores, int m, int n,
                      double alpha, double mu, std::uint64_t master_seed) {
  if (total_scores.size() != static_cast<std::size_t>(m) * n)
    throw ParamError("total_scores size does not match m*n");
  struct Retained {
    int r, p;
    double score;
  };
  std::vector<Retained> retained;
  std::vector<int> order(n);
  for (int r = 0; r < m; ++r) {
    std::iota(order.begin(), order.end(), 0);
    const double* row = total_scores.data() + static_cast<std::size_t>(r) * n;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (row[a] != row[b]) return row[a] > row[b];
      return a < b;
    });
    Rng rng(derive_seed(master_seed, "bid-retention", static_cast<std::uint64_t>(r)));
    for (int k = 0; k < n; ++k) {
      const double pr = retention_probability(static_cast<double>(k + 1), alpha, mu);
      if (rng.bernoulli(pr)) retained.push_back({r, order[k], row[order[k]]});
    }
  }

  BidMatrix bids(m, n);
  if (retained.empty()) return bids;

  // Global empirical quantiles at cumulative 8% and 61%: the lowest slice
  // bids 1, the middle 2, the top 3. Thresholding on the sorted score list
  // keeps quantization monotone in the total score.
  std::vector<double> sorted_scores(retained.size());
  for (std::size_t i = 0; i < retained.size(); ++i) sorted_scores[i] = retained[i].score;
  std::sort(sorted_scores.begin(), sorted_scores.end());
  const auto quantile = [&](double q) {
    const auto idx = static_cast<std::size_t>(q * static_cast<double>(sorted_scores.size()));
    return sorted_scores[std::min(idx, sorted_scores.size() - 1)];
  };
  const double t1 = quantile(0.08);
  const double t2 = quantile(0.61);

  std::vector<Bid> triplets;
  triplets.reserve(retained.size());
  for (const auto& item : retained) {
    int value = 3;
    if (item.score < t1)
      value = 1;
    else if (item.score < t2)
      value = 2;
    triplets.push_back({item.r, item.p, value});
  }
  return BidMatrix(m, n, triplets);
}

Conference rebalance_subsample(const Conference& conf, int target_papers,
                               int target_reviewers, std::uint64_t master_seed) {
  const int m = conf.m(), n = conf.n();
  const bool keep_all_papers = target_papers <= 0 || target_papers >= n;
  const bool keep_all_reviewers = target_reviewers <= 0 || target_reviewers >= m;
  if (keep_all_papers && keep_all_reviewers) return conf;

  // Keep the entities with the most positive bids, random order among ties.
  // Top-count selection guarantees the kept bid-count histogram first-order
  // stochastically dominates the original one.
  auto pick_top = [&](const std::vector<long>& counts, int target,
                      const char* stream) {
    const int total = static_cast<int>(counts.size());
    std::vector<int> order(total);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(master_seed, stream));
    std::vector<std::uint64_t> key(total);
    for (auto& k : key) k = rng.next_u64();
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (counts[a] != counts[b]) return counts[a] > counts[b];
      if (key[a] != key[b]) return key[a] < key[b];
      return a < b;
    });
    order.resize(target);
    std::sort(order.begin(), order.end());  // restore sorted-id order
    return order;
  };

  std::vector<int> kept_papers(n);
  std::iota(kept_papers.begin(), kept_papers.end(), 0);
  if (!keep_all_papers) {
    std::vector<long> paper_counts(n, 0);
    for (const auto& b : conf.bids().to_triplets()) ++paper_counts[b.paper];
    kept_papers = pick_top(paper_counts, target_papers, "subsample-papers");
  }
  std::vector<int> paper_new_index(n, -1);
  for (std::size_t i = 0; i < kept_papers.size(); ++i)
    paper_new_index[kept_papers[i]] = static_cast<int>(i);

  std::vector<int> kept_reviewers(m);
  std::iota(kept_reviewers.begin(), kept_reviewers.end(), 0);
  if (!keep_all_reviewers) {
    std::vector<long> reviewer_counts(m, 0);
    for (const auto& b : conf.bids().to_triplets())
      if (paper_new_index[b.paper] >= 0) ++reviewer_counts[b.reviewer];
    kept_reviewers = pick_top(reviewer_counts, target_reviewers, "subsample-reviewers");
  }
  std::vector<int> reviewer_new_index(m, -1);
  for (std::size_t i = 0; i < kept_reviewers.size(); ++i)
    reviewer_new_index[kept_reviewers[i]] = static_cast<int>(i);

  const int new_m = static_cast<int>(kept_reviewers.size());
  const int new_n = static_cast<int>(kept_papers.size());

  std::vector<PaperRecord> papers;
  papers.reserve(new_n);
  std::vector<std::vector<int>> paper_subjects;
  paper_subjects.reserve(new_n);
  for (int p : kept_papers) {
    papers.push_back(conf.papers()[p]);
    paper_subjects.push_back(conf.paper_subjects(p));
  }
  std::vector<ReviewerRecord> reviewers;
  reviewers.reserve(new_m);
  for (int r : kept_reviewers) reviewers.push_back(conf.reviewers()[r]);

  std::vector<double> tpms(static_cast<std::size_t>(new_m) * new_n);
  for (int r = 0; r < new_m; ++r)
    for (int p = 0; p < new_n; ++p)
      tpms[static_cast<std::size_t>(r) * new_n + p] =
          conf.tpms(kept_reviewers[r], kept_papers[p]);
  if (!keep_all_reviewers) {
    // Column extrema may have been dropped with their reviewers.
    for (int p = 0; p < new_n; ++p) {
      double lo = kInf, hi = -kInf;
      for (int r = 0; r < new_m; ++r) {
        const double v = tpms[static_cast<std::size_t>(r) * new_n + p];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      for (int r = 0; r < new_m; ++r) {
        auto& v = tpms[static_cast<std::size_t>(r) * new_n + p];
        v = hi > lo ? (v - lo) / (hi - lo) : 1.0;
      }
    }
  }

  std::vector<Bid> bids;
  for (const auto& b : conf.bids().to_triplets()) {
    const int r = reviewer_new_index[b.reviewer];
    const int p = paper_new_index[b.paper];
    if (r >= 0 && p >= 0) bids.push_back({r, p, b.value});
  }

  return Conference(std::move(papers), std::move(reviewers), std::move(paper_subjects),
                    conf.n_clusters(), std::move(tpms),
                    BidMatrix(new_m, new_n, bids), conf.meta());
}

Conference generate_conference(const Corpus& corpus, const GenParams& params,
                               std::uint64_t master_seed) {
  std::vector<int> window;
  for (int i = 0; i < corpus.size(); ++i)
    if (in_window(corpus.paper(i).year, params.year_min, params.year_max))
      window.push_back(i);
  if (window.empty()) throw ParamError("no corpus papers in the year window");

  // Conference papers in sorted-id order; dense indices follow this order.
  std::sort(window.begin(), window.end(), [&](int a, int b) {
    return corpus.paper(a).paper_id < corpus.paper(b).paper_id;
  });

  const ClusterResult clusters =
      cluster_subject_areas(corpus, params.target_clusters, params.min_cluster_size);
  const auto paper_subjects_all = assign_paper_subjects(corpus, clusters);

  const auto reviewer_ids = select_reviewers(corpus, params.min_cites, params.max_cites,
                                             params.year_min, params.year_max);
  if (reviewer_ids.empty())
    throw ParamError("no authors satisfy the reviewer citation bounds");
  const auto reviewer_subjects =
      assign_reviewer_subjects(corpus, paper_subjects_all, reviewer_ids, master_seed);

  const int m = static_cast<int>(reviewer_ids.size());
  const int n = static_cast<int>(window.size());

  const TpmsResult tpms = simulate_tpms(corpus, window, reviewer_ids, params.beta);
  const auto subject = subject_score_matrix(corpus, window, reviewer_ids, clusters,
                                            paper_subjects_all, params.icf_citation_cap);
  const auto title = tfidf_score_matrix(corpus, window, reviewer_ids, TextField::kTitle);
  const auto abstract =
      tfidf_score_matrix(corpus, window, reviewer_ids, TextField::kAbstract);

  std::vector<double> total(static_cast<std::size_t>(m) * n);
  for (std::size_t i = 0; i < total.size(); ++i)
    total[i] = (title[i] + abstract[i]) * subject[i];

  const BidMatrix bids =
      sample_bids(total, m, n, params.alpha, params.mu, master_seed);

  std::vector<PaperRecord> papers;
  papers.reserve(n);
  std::vector<std::vector<int>> paper_subjects;
  paper_subjects.reserve(n);
  for (int idx : window) {
    papers.push_back(corpus.paper(idx));
    paper_subjects.push_back(paper_subjects_all[idx]);
  }
  std::vector<ReviewerRecord> reviewers;
  reviewers.reserve(m);
  for (int r = 0; r < m; ++r) {
    ReviewerRecord rec;
    rec.reviewer_id = reviewer_ids[r];
    for (int paper : corpus.papers_of_author(reviewer_ids[r]))
      rec.authored.push_back(corpus.paper(paper).paper_id);
    std::sort(rec.authored.begin(), rec.authored.end());
    rec.subjects = reviewer_subjects[r];
    reviewers.push_back(std::move(rec));
  }

  ConferenceMeta meta;
  meta.seed = master_seed;
  auto add = [&](const std::string& k, const std::string& v) {
    meta.params.emplace_back(k, v);
  };
  add("target_clusters", std::to_string(params.target_clusters));
  add("min_cluster_size", std::to_string(params.min_cluster_size));
  add("min_cites", std::to_string(params.min_cites));
  add("max_cites", std::to_string(params.max_cites));
  add("icf_citation_cap", std::to_string(params.icf_citation_cap));
  add("alpha", format_double(params.alpha));
  add("mu", format_double(params.mu));
  add("beta", format_double(params.beta));
  add("year_min", std::to_string(params.year_min));
  add("year_max", std::to_string(params.year_max));
  add("target_papers", std::to_string(params.target_papers));
  add("target_reviewers", std::to_string(params.target_reviewers));

  Conference conf(std::move(papers), std::move(reviewers), std::move(paper_subjects),
                  static_cast<int>(clusters.clusters.size()), tpms.normalized, bids,
                  std::move(meta));
  return rebalance_subsample(conf, params.target_papers, params.target_reviewers,
                             master_seed);
}

}  // namespace robustbid::synthgen
