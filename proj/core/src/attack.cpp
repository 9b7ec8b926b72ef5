#include "robustbid/attack.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "robustbid/errors.hpp"

#include <nlohmann/json.hpp>

namespace robustbid::attack {

namespace {

void check_target(int m, int n, int r, int p, int m_a, int u_cap) {
  if (r < 0 || r >= m) throw ParamError("target reviewer out of range");
  if (p < 0 || p >= n) throw ParamError("target paper out of range");
  if (m_a < 1 || m_a > m) throw ParamError("party size must be in [1, reviewer count]");
  if (u_cap < 0) throw ParamError("positive-bid cap must be nonnegative");
}

// Influence weights for every (t, q) pair against the target pair (r, p):
// z[t*n + q] = x_{(t,q)} . H^{-1} x_{(r,p)}. One solve, mn sparse dots.
std::vector<double> influence_weights(const CsrMatrix& X,
                                      const scoring::ScoreModel& model, int n,
                                      int r, int p) {
  Eigen::VectorXd v = model.solve_row(X, static_cast<long>(r) * n + p);
  std::vector<double> z(X.rows());
  for (int i = 0; i < X.rows(); ++i) z[i] = X.dot_row(i, v.data());
  return z;
}

double row_objective(const std::vector<double>& z, const BidRow& row) {
  double s = 0.0;
  for (const auto& [q, b] : row) s += z[q] * static_cast<double>(b);
  return s;
}

BidRow row_of(const BidMatrix& bids, int t) {
  BidRow out;
  for (const auto& [q, b] : bids.row(t)) out.emplace_back(q, b);
  return out;
}

}  // namespace

BidRow simple_blackbox_bids(int target_paper) {
  if (target_paper < 0) throw ParamError("target paper out of range");
  return {{target_paper, 3}};
}

BestResponse best_response(const std::vector<double>& z, const BidRow& current,
                           int u_cap, int max_bid) {
  const int n = static_cast<int>(z.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (z[a] != z[b]) return z[a] > z[b];
    return a < b;
  });
  BestResponse out;
  double best = 0.0;
  for (int k = 0; k < n && k < u_cap; ++k) {
    const int q = order[k];
    if (z[q] <= 0.0) break;  // a positive bid on q could only hurt
    out.bids.emplace_back(q, max_bid);
    best += z[q] * static_cast<double>(max_bid);
  }
  std::sort(out.bids.begin(), out.bids.end());
  out.delta = best - row_objective(z, current);
  return out;
}

BestResponse whitebox_single(const CsrMatrix& X, const scoring::ScoreModel& model,
                             const BidMatrix& capped_bids, int r, int p, int u_cap) {
  const int m = capped_bids.reviewer_count();
  const int n = capped_bids.paper_count();
  check_target(m, n, r, p, 1, u_cap);
  const std::vector<double> z = influence_weights(X, model, n, r, p);
  std::vector<double> zr(z.begin() + static_cast<long>(r) * n,
                         z.begin() + static_cast<long>(r + 1) * n);
  return best_response(zr, row_of(capped_bids, r), u_cap);
}

AttackPlan whitebox_colluding(const CsrMatrix& X, const scoring::ScoreModel& model,
                              const BidMatrix& capped_bids, int r, int p, int m_a,
                              int u_cap) {
  const int m = capped_bids.reviewer_count();
  const int n = capped_bids.paper_count();
  check_target(m, n, r, p, m_a, u_cap);
  const std::vector<double> z = influence_weights(X, model, n, r, p);

  std::vector<BestResponse> responses(m);
  for (int t = 0; t < m; ++t) {
    std::vector<double> zt(z.begin() + static_cast<long>(t) * n,
                           z.begin() + static_cast<long>(t + 1) * n);
    responses[t] = best_response(zt, row_of(capped_bids, t), u_cap);
  }

  std::vector<int> order;
  order.reserve(m - 1);
  for (int t = 0; t < m; ++t)
    if (t != r) order.push_back(t);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (responses[a].delta != responses[b].delta)
      return responses[a].delta > responses[b].delta;
    return a < b;
  });

  std::vector<int> party = {r};
  for (int k = 0; k < m_a - 1 && k < static_cast<int>(order.size()); ++k)
    party.push_back(order[k]);
  std::sort(party.begin(), party.end());

  AttackPlan plan;
  plan.kind = "whitebox";
  plan.target_reviewer = r;
  plan.target_paper = p;
  for (int t : party) {
    plan.predicted_gain += responses[t].delta;
    plan.party_bids.emplace_back(t, responses[t].bids);
  }
  return plan;
}

AttackPlan colluding_blackbox(const Conference& conf, const CsrMatrix& X, int r,
                              int p, int m_a, int u_cap) {
  const int m = conf.m();
  const int n = conf.n();
  check_target(m, n, r, p, m_a, u_cap);
  if (X.rows() != static_cast<long>(m) * n)
    throw ParamError("feature matrix does not match the conference shape");

  // Subject-profile similarity: size of the subject intersection with the
  // target reviewer, ties by reviewer index.
  // Subject lists are rank-ordered; sort copies before intersecting.
  std::vector<int> target_subj = conf.reviewers()[r].subjects;
  std::sort(target_subj.begin(), target_subj.end());
  std::vector<int> overlap(m, 0);
  for (int t = 0; t < m; ++t) {
    std::vector<int> other = conf.reviewers()[t].subjects;
    std::sort(other.begin(), other.end());
    std::vector<int> inter;
    std::set_intersection(target_subj.begin(), target_subj.end(), other.begin(),
                          other.end(), std::back_inserter(inter));
    overlap[t] = static_cast<int>(inter.size());
  }
  std::vector<int> order;
  order.reserve(m - 1);
  for (int t = 0; t < m; ++t)
    if (t != r) order.push_back(t);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (overlap[a] != overlap[b]) return overlap[a] > overlap[b];
    return a < b;
  });
  std::vector<int> party = {r};
  for (int k = 0; k < m_a - 1 && k < static_cast<int>(order.size()); ++k)
    party.push_back(order[k]);
  std::sort(party.begin(), party.end());

  // Each member bids 3 on the u_cap papers whose pair features align best
  // with the target pair's, measured by sparse inner product.
  const int target_row = r * n + p;
  const auto target_view = X.row(target_row);
  // Dense scatter of the target feature row for fast repeated dots.
  std::vector<double> target_dense(static_cast<std::size_t>(X.cols()), 0.0);
  for (std::size_t k = 0; k < target_view.len; ++k)
    target_dense[target_view.col[k]] = target_view.val[k];

  AttackPlan plan;
  plan.kind = "blackbox";
  plan.target_reviewer = r;
  plan.target_paper = p;
  for (int t : party) {
    std::vector<double> align(n);
    for (int q = 0; q < n; ++q)
      align[q] = X.dot_row(t * n + q, target_dense.data());
    std::vector<int> paper_order(n);
    std::iota(paper_order.begin(), paper_order.end(), 0);
    std::stable_sort(paper_order.begin(), paper_order.end(), [&](int a, int b) {
      if (align[a] != align[b]) return align[a] > align[b];
      return a < b;
    });
    BidRow row;
    for (int k = 0; k < n && k < u_cap; ++k) row.emplace_back(paper_order[k], 3);
    std::sort(row.begin(), row.end());
    plan.party_bids.emplace_back(t, row);
  }
  return plan;
}

double brute_force_attack_oracle(const CsrMatrix& X, const BidMatrix& capped_bids,
                                 double lambda, int r, int p, int m_a, int u_cap) {
  const int m = capped_bids.reviewer_count();
  const int n = capped_bids.paper_count();
  check_target(m, n, r, p, m_a, u_cap);
  if (m > 8 || n > 5 || u_cap > 2 || m_a > 3)
    throw ParamError("attack oracle limits: m <= 8, n <= 5, u_cap <= 2, m_a <= 3");

  // Dense rebuild of the Hessian, inverted outright; nothing shared with the
  // Cholesky path.
  const int d = X.cols();
  Eigen::MatrixXd dense(X.rows(), d);
  dense.setZero();
  for (int i = 0; i < X.rows(); ++i) {
    const auto view = X.row(i);
    for (std::size_t k = 0; k < view.len; ++k) dense(i, view.col[k]) = view.val[k];
  }
  Eigen::MatrixXd hessian = dense.transpose() * dense;
  hessian += lambda * Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd hinv = hessian.fullPivLu().inverse();
  Eigen::VectorXd v = hinv * dense.row(static_cast<long>(r) * n + p).transpose();

  // Per reviewer: exhaustive best over every feasible bid row.
  std::vector<double> best_delta(m, 0.0);
  for (int t = 0; t < m; ++t) {
    std::vector<double> z(n);
    for (int q = 0; q < n; ++q)
      z[q] = dense.row(static_cast<long>(t) * n + q).dot(v);
    double current = 0.0;
    for (const auto& [q, b] : capped_bids.row(t))
      current += z[q] * static_cast<double>(b);

    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> bids(n, 0);
    // Odometer over {0,1,2,3}^n, skipping rows with more than u_cap positives.
    while (true) {
      int positives = 0;
      for (int q = 0; q < n; ++q) positives += bids[q] > 0 ? 1 : 0;
      if (positives <= u_cap) {
        double s = 0.0;
        for (int q = 0; q < n; ++q) s += z[q] * static_cast<double>(bids[q]);
        best = std::max(best, s);
      }
      int q = 0;
      while (q < n && bids[q] == 3) bids[q++] = 0;
      if (q == n) break;
      ++bids[q];
    }
    best_delta[t] = best - current;
  }

  // Exhaustive parties of size m_a containing r.
  std::vector<int> others;
  for (int t = 0; t < m; ++t)
    if (t != r) others.push_back(t);
  double best_total = -std::numeric_limits<double>::infinity();
  const int want = m_a - 1;
  std::vector<int> pick;
  auto recurse = [&](auto&& self, size_t start) -> void {
    if (static_cast<int>(pick.size()) == want) {
      double total = best_delta[r];
      for (int t : pick) total += best_delta[t];
      best_total = std::max(best_total, total);
      return;
    }
    for (size_t i = start; i < others.size(); ++i) {
      pick.push_back(others[i]);
      self(self, i + 1);
      pick.pop_back();
    }
  };
  recurse(recurse, 0);
  return best_total;
}

BidMatrix apply_plan(const BidMatrix& bids, const AttackPlan& plan) {
  BidMatrix out = bids;
  for (const auto& [t, row] : plan.party_bids) out.set_row(t, row);
  return out;
}

std::vector<std::pair<long, double>> plan_label_delta(const BidMatrix& bids,
                                                      const AttackPlan& plan) {
  const int n = bids.paper_count();
  std::vector<std::pair<long, double>> delta;
  for (const auto& [t, row] : plan.party_bids) {
    std::vector<double> newvals(n, 0.0);
    for (const auto& [q, b] : row) newvals[q] = static_cast<double>(b);
    std::vector<double> oldvals(n, 0.0);
    for (const auto& [q, b] : bids.row(t)) oldvals[q] = static_cast<double>(b);
    for (int q = 0; q < n; ++q) {
      if (newvals[q] != oldvals[q])
        delta.emplace_back(static_cast<long>(t) * n + q, newvals[q] - oldvals[q]);
    }
  }
  std::sort(delta.begin(), delta.end());
  return delta;
}

void save_plan(const AttackPlan& plan, const std::string& path) {
  nlohmann::json j;
  j["kind"] = plan.kind;
  j["target_reviewer"] = plan.target_reviewer;
  j["target_paper"] = plan.target_paper;
  j["predicted_gain"] = plan.predicted_gain;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [t, row] : plan.party_bids) {
    nlohmann::json jr;
    jr["reviewer"] = t;
    nlohmann::json jb = nlohmann::json::array();
    for (const auto& [q, b] : row) jb.push_back({q, b});
    jr["bids"] = jb;
    rows.push_back(jr);
  }
  j["party_bids"] = rows;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out << j.dump(2) << '\n';
}

AttackPlan load_plan(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  AttackPlan plan;
  try {
    plan.kind = j.at("kind").get<std::string>();
    plan.target_reviewer = j.at("target_reviewer").get<int>();
    plan.target_paper = j.at("target_paper").get<int>();
    plan.predicted_gain = j.at("predicted_gain").get<double>();
    for (const auto& jr : j.at("party_bids")) {
      BidRow row;
      for (const auto& jb : jr.at("bids"))
        row.emplace_back(jb.at(0).get<int>(), jb.at(1).get<int>());
      plan.party_bids.emplace_back(jr.at("reviewer").get<int>(), row);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return plan;
}

}  // namespace robustbid::attack
