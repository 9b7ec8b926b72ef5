#pragma once

#include <string>
#include <utility>
#include <vector>

#include "robustbid/conference.hpp"
#include "robustbid/defense.hpp"
#include "robustbid/scoring.hpp"

namespace robustbid::assign {

struct Assignment {
  int reviewers = 0, papers = 0;
  int r_demand = 0;  // reviewers wanted per paper
  int p_cap = 0;     // papers allowed per reviewer
  std::vector<std::pair<int, int>> pairs;  // (reviewer, paper), sorted
  std::vector<int> paper_load;
  std::vector<int> reviewer_load;
  std::vector<int> deficit;  // per paper, r_demand - paper_load
  double total_score = 0.0;

  long total_deficit() const;
  std::vector<std::vector<int>> reviewers_by_paper() const;
};

// Conference-style composite rule: positive bids dominate, expertise and
// subject overlap split the rest, a small floor keeps zero rows rankable.
// A stand-in, not the historical formula, and labeled as such in the docs.
scoring::ScoreMatrix neurips2014_score(const Conference& conf);

scoring::ScoreMatrix tpms_only_score(const Conference& conf);

// Maximize total score subject to exactly r_demand reviewers per paper and
// at most p_cap papers per reviewer, over permitted pairs (null = all).
// Infeasible demand appears as per-paper deficits; among deficit-minimal
// assignments the score is exactly optimal. Scores are quantized to integers
// at 1e-9 resolution inside the solver, which also fixes the tie behavior.
Assignment solve_assignment(const scoring::ScoreMatrix& scores,
                            const defense::CandidateSet* permitted = nullptr,
                            int r_demand = 3, int p_cap = 6);

// Exhaustive optimum, lexicographic on (assigned count, total score).
// Guards: m <= 6, n <= 4, r_demand <= 2.
Assignment brute_force_assignment_oracle(const scoring::ScoreMatrix& scores,
                                         const defense::CandidateSet* permitted,
                                         int r_demand, int p_cap);

// CSV of (paper_index, reviewer_index) rows; deficits appear as
// reviewer_index = -1, one row per missing slot.
void save_assignment(const Assignment& a, const std::string& path);
Assignment load_assignment(const std::string& path,
                           const scoring::ScoreMatrix& scores, int r_demand,
                           int p_cap);

}  // namespace robustbid::assign
