#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "robustbid/scoring.hpp"
#include "robustbid/sparse.hpp"

namespace robustbid::defense {

// Per paper, the reviewers holding ranks 1..k under the score column (ties
// by reviewer index). Stored in rank order.
struct CandidateSet {
  int k = 0;
  std::vector<std::vector<int>> per_paper;

  bool contains(int r, int p) const;
};

CandidateSet build_candidate_set(const scoring::ScoreMatrix& scores, int k);

struct RobustScore {
  double s_dagger = 0.0;
  std::vector<int> party;  // sorted ascending, always includes the pair's reviewer
};

// Fixed-Hessian influence of each reviewer's labels on s_{r,p}:
// c_t = x_{(r,p)} H^{-1} X_t^T y_t. Summing over all t recovers s_{r,p}.
std::vector<double> influence_contributions(const scoring::ScoreModel& model,
                                            const CsrMatrix& X,
                                            const std::vector<double>& y, int m,
                                            int n, int r, int p);

// Robust score under the fixed-Hessian approximation: subtract the largest
// achievable total contribution of a party of exactly m_d reviewers that
// includes r. The additive structure makes top-(m_d - 1) selection exactly
// optimal for this objective.
RobustScore robust_score_approx(const scoring::ScoreModel& model, const CsrMatrix& X,
                                const std::vector<double>& y, int m, int n, int r,
                                int p, int m_d);

// Same, given precomputed contributions (shared across detector budgets).
RobustScore robust_score_from_contributions(const std::vector<double>& contributions,
                                            double score, int r, int m_d);

enum class ExactStrategy { kEnumerate, kGreedyRefit };

// Robust score with true refits: the model is retrained without the party's
// rows, so the Hessian changes per party. kEnumerate minimizes over every
// size-m_d party containing r (m <= 15); kGreedyRefit grows the party one
// reviewer at a time, re-ranking contributions under each refit model, and
// returns the better of the greedy party and the fixed-Hessian party, both
// evaluated with true refits.
RobustScore robust_score_exact(const CsrMatrix& X, const std::vector<double>& y,
                               double lambda, int m, int n, int r, int p, int m_d,
                               ExactStrategy strategy);

struct DetectionVerdict {
  int reviewer = 0;
  int paper = 0;
  double score = 0.0;
  double robust_score = 0.0;
  std::vector<int> party;
  bool removed = false;
};

enum class Detector { kApprox, kExact };

struct FilterResult {
  CandidateSet pruned;
  std::vector<DetectionVerdict> verdicts;  // sorted by (paper, reviewer)
};

// For every candidate pair, compute the robust score and drop the pair when
// that score would rank strictly below k against the other reviewers'
// original scores for the paper. Papers are processed independently, so the
// work parallelizes along them.
FilterResult filter_candidates(const CandidateSet& candidates,
                               const scoring::ScoreMatrix& scores,
                               const scoring::ScoreModel& model, const CsrMatrix& X,
                               const std::vector<double>& y, Detector detector,
                               int m_d, int threads = 1);

struct TrimResult {
  scoring::ScoreModel model;
  std::vector<char> keep;       // final inlier mask over rows
  std::vector<int> removed;     // complement of keep, sorted
  std::vector<double> objectives;  // trimmed loss after each refit
  int iterations = 0;
  bool converged = false;
};

// Trimmed ridge: alternately fit on the keep set and re-select the
// mn - l_remove rows with the smallest squared residuals until the set
// stabilizes. Initialized from the full-data fit (or warm_keep when given).
// The seed is reserved for randomized restarts; the deterministic
// initializer ignores it.
TrimResult trim_fit(const CsrMatrix& X, const std::vector<double>& y, long l_remove,
                    double lambda, int max_iters = 50, std::uint64_t seed = 0,
                    const std::vector<char>* warm_keep = nullptr);

// Full-refit minimum over every size-m_d party containing r, built densely
// and solved by a different factorization than the fast path. m <= 12.
double brute_force_detection_oracle(const CsrMatrix& X, const std::vector<double>& y,
                                    double lambda, int m, int n, int r, int p,
                                    int m_d);

void save_verdicts(const std::vector<DetectionVerdict>& verdicts,
                   const std::string& path);
std::vector<DetectionVerdict> load_verdicts(const std::string& path);

}  // namespace robustbid::defense
