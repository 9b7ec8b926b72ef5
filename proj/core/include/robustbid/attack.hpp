#pragma once

#include <string>
#include <utility>
#include <vector>

#include "robustbid/conference.hpp"
#include "robustbid/scoring.hpp"
#include "robustbid/sparse.hpp"

namespace robustbid::attack {

// A full replacement bid row: (paper, bid) sorted by paper, bids in {1,2,3},
// at most U positives for feasibility.
using BidRow = std::vector<std::pair<int, int>>;

struct AttackPlan {
  std::string kind;  // "simple" | "whitebox" | "blackbox"
  int target_reviewer = 0;
  int target_paper = 0;
  // Predicted target-score gain under the fixed-Hessian model. Black-box
  // attackers cannot predict, so 0 there.
  double predicted_gain = 0.0;
  // Party members with their replacement rows; the target reviewer is always
  // included.
  std::vector<std::pair<int, BidRow>> party_bids;

  std::vector<int> party() const {
    std::vector<int> out;
    out.reserve(party_bids.size());
    for (const auto& [t, row] : party_bids) out.push_back(t);
    return out;
  }
};

// The naive attack: drop everything, bid 3 on the target paper only.
BidRow simple_blackbox_bids(int target_paper);

struct BestResponse {
  BidRow bids;
  double delta = 0.0;  // objective improvement over the current row
};

// Optimal feasible bid row against influence weights z: bid the maximum on
// the top-u strictly positive weights (ties by paper index) and 0 elsewhere.
// delta is measured relative to `current`, so it is always >= 0 when
// `current` is itself feasible.
BestResponse best_response(const std::vector<double>& z, const BidRow& current,
                           int u_cap, int max_bid = 3);

// Optimal single-reviewer white-box bid change for target (r, p).
BestResponse whitebox_single(const CsrMatrix& X, const scoring::ScoreModel& model,
                             const BidMatrix& capped_bids, int r, int p, int u_cap);

// Optimal colluding white-box attack. The per-reviewer gains decompose
// additively (label edits leave the Hessian untouched), so picking the
// m_a - 1 accomplices with the largest individual gains is exactly optimal.
AttackPlan whitebox_colluding(const CsrMatrix& X, const scoring::ScoreModel& model,
                              const BidMatrix& capped_bids, int r, int p, int m_a,
                              int u_cap);

// Black-box collusion: accomplices are the reviewers with the most similar
// subject profile (inner product of subject indicators); every member bids 3
// on the u_cap papers whose pair features align best with the target pair.
// Reads only the party's own label rows, none at all in fact.
AttackPlan colluding_blackbox(const Conference& conf, const CsrMatrix& X, int r,
                              int p, int m_a, int u_cap);

// Exhaustive maximization of the fixed-Hessian objective over every party
// containing r and every feasible bid row per member. Guards: m <= 8,
// n <= 5, u_cap <= 2, m_a <= 3. Independent of the fast path: rebuilds the
// Hessian densely and enumerates rather than selecting greedily.
double brute_force_attack_oracle(const CsrMatrix& X, const BidMatrix& capped_bids,
                                 double lambda, int r, int p, int m_a, int u_cap);

// Bid matrix with the plan's rows swapped in.
BidMatrix apply_plan(const BidMatrix& bids, const AttackPlan& plan);

// Sparse label delta (row index, new - old) the plan causes, for incremental
// rescoring.
std::vector<std::pair<long, double>> plan_label_delta(const BidMatrix& bids,
                                                      const AttackPlan& plan);

void save_plan(const AttackPlan& plan, const std::string& path);
AttackPlan load_plan(const std::string& path);

}  // namespace robustbid::attack
