#include "robustbid/defense.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "robustbid/csvio.hpp"
#include "robustbid/errors.hpp"
#include "robustbid/parallel.hpp"

namespace robustbid::defense {

namespace {

void check_pair(int m, int n, int r, int p, int m_d) {
  if (r < 0 || r >= m) throw ParamError("reviewer out of range");
  if (p < 0 || p >= n) throw ParamError("paper out of range");
  if (m_d < 0) throw ParamError("party budget must be nonnegative");
  if (m_d > m) throw ParamError("party budget exceeds reviewer count");
}

std::vector<char> mask_without(int m, int n, const std::vector<int>& party) {
  std::vector<char> keep(static_cast<std::size_t>(m) * n, 1);
  for (int t : party)
    std::fill_n(keep.begin() + static_cast<std::size_t>(t) * n, n, 0);
  return keep;
}

// Score of the target pair after retraining without the party's rows.
double refit_score(const CsrMatrix& X, const std::vector<double>& y, double lambda,
                   int m, int n, const std::vector<int>& party, int target_row) {
  const std::vector<char> keep = mask_without(m, n, party);
  scoring::ScoreModel model = scoring::train_ridge(X, y, lambda, keep);
  return X.dot_row(target_row, model.weights().data());
}

std::vector<double> contributions_for_model(const scoring::ScoreModel& model,
                                            const CsrMatrix& X,
                                            const std::vector<double>& y, int m,
                                            int n, int r, int p) {
  const Eigen::VectorXd v = model.solve_row(X, static_cast<long>(r) * n + p);
  std::vector<double> c(m, 0.0);
  for (int t = 0; t < m; ++t) {
    double acc = 0.0;
    for (int q = 0; q < n; ++q) {
      const int i = t * n + q;
      if (y[i] != 0.0) acc += y[i] * X.dot_row(i, v.data());
    }
    c[t] = acc;
  }
  return c;
}

}  // namespace

bool CandidateSet::contains(int r, int p) const {
  const auto& col = per_paper[p];
  return std::find(col.begin(), col.end(), r) != col.end();
}

CandidateSet build_candidate_set(const scoring::ScoreMatrix& scores, int k) {
  if (k < 1) throw ParamError("candidate rank cutoff must be at least 1");
  if (k > scores.m) throw ParamError("candidate rank cutoff exceeds reviewer count");
  CandidateSet out;
  out.k = k;
  out.per_paper.resize(scores.n);
  for (int p = 0; p < scores.n; ++p) {
    std::vector<int> order = scores.column_order(p);
    order.resize(k);
    out.per_paper[p] = std::move(order);
  }
  return out;
}

std::vector<double> influence_contributions(const scoring::ScoreModel& model,
                                            const CsrMatrix& X,
                                            const std::vector<double>& y, int m,
                                            int n, int r, int p) {
  check_pair(m, n, r, p, 1);
  if (static_cast<long>(y.size()) != X.rows() || X.rows() != m * n)
    throw ParamError("labels and features do not match the conference shape");
  return contributions_for_model(model, X, y, m, n, r, p);
}

RobustScore robust_score_from_contributions(const std::vector<double>& contributions,
                                            double score, int r, int m_d) {
  const int m = static_cast<int>(contributions.size());
  check_pair(m, 1, r, 0, m_d);
  if (m_d == 0) return {score, {}};  // budget 0 disables removal entirely
  std::vector<int> order;
  order.reserve(m - 1);
  for (int t = 0; t < m; ++t)
    if (t != r) order.push_back(t);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (contributions[a] != contributions[b])
      return contributions[a] > contributions[b];
    return a < b;
  });
  RobustScore out;
  out.party = {r};
  double removed = contributions[r];
  // The party has exactly m_d members even when that forces negative
  // contributions in; the detector budget is a set size, not a sum floor.
  for (int k = 0; k < m_d - 1; ++k) {
    out.party.push_back(order[k]);
    removed += contributions[order[k]];
  }
  std::sort(out.party.begin(), out.party.end());
  out.s_dagger = score - removed;
  return out;
}

RobustScore robust_score_approx(const scoring::ScoreModel& model, const CsrMatrix& X,
                                const std::vector<double>& y, int m, int n, int r,
                                int p, int m_d) {
  check_pair(m, n, r, p, m_d);
  if (static_cast<long>(y.size()) != X.rows() || X.rows() != m * n)
    throw ParamError("labels and features do not match the conference shape");
  const std::vector<double> c = contributions_for_model(model, X, y, m, n, r, p);
  const double score = X.dot_row(r * n + p, model.weights().data());
  return robust_score_from_contributions(c, score, r, m_d);
}

RobustScore robust_score_exact(const CsrMatrix& X, const std::vector<double>& y,
                               double lambda, int m, int n, int r, int p, int m_d,
                               ExactStrategy strategy) {
  check_pair(m, n, r, p, m_d);
  if (static_cast<long>(y.size()) != X.rows() || X.rows() != m * n)
    throw ParamError("labels and features do not match the conference shape");
  const int target_row = r * n + p;

  if (m_d == 0) {
    scoring::ScoreModel full = scoring::train_ridge(X, y, lambda);
    return {X.dot_row(target_row, full.weights().data()), {}};
  }

  if (strategy == ExactStrategy::kEnumerate) {
    if (m > 15) throw ParamError("exact enumeration limited to m <= 15 reviewers");
    std::vector<int> others;
    for (int t = 0; t < m; ++t)
      if (t != r) others.push_back(t);
    RobustScore best;
    best.s_dagger = std::numeric_limits<double>::infinity();
    std::vector<int> pick = {r};
    auto recurse = [&](auto&& self, std::size_t start) -> void {
      if (static_cast<int>(pick.size()) == m_d) {
        std::vector<int> party = pick;
        std::sort(party.begin(), party.end());
        const double s = refit_score(X, y, lambda, m, n, party, target_row);
        if (s < best.s_dagger) {
          best.s_dagger = s;
          best.party = party;
        }
        return;
      }
      for (std::size_t i = start; i < others.size(); ++i) {
        pick.push_back(others[i]);
        self(self, i + 1);
        pick.pop_back();
      }
    };
    recurse(recurse, 0);
    return best;
  }

  // Greedy with refits: contributions are re-ranked under the shrinking
  // training set after every pick.
  std::vector<int> greedy = {r};
  std::vector<char> in_party(m, 0);
  in_party[r] = 1;
  while (static_cast<int>(greedy.size()) < m_d) {
    const std::vector<char> keep = mask_without(m, n, greedy);
    scoring::ScoreModel partial = scoring::train_ridge(X, y, lambda, keep);
    const std::vector<double> c = contributions_for_model(partial, X, y, m, n, r, p);
    int pick = -1;
    for (int t = 0; t < m; ++t) {
      if (in_party[t]) continue;
      if (pick < 0 || c[t] > c[pick]) pick = t;
    }
    greedy.push_back(pick);
    in_party[pick] = 1;
  }
  std::sort(greedy.begin(), greedy.end());
  const double greedy_value = refit_score(X, y, lambda, m, n, greedy, target_row);

  // Also evaluate the party the fixed-Hessian detector would pick; keep the
  // lower of the two refit values.
  scoring::ScoreModel full = scoring::train_ridge(X, y, lambda);
  RobustScore approx = robust_score_approx(full, X, y, m, n, r, p, m_d);
  const double approx_value = refit_score(X, y, lambda, m, n, approx.party, target_row);

  RobustScore out;
  if (greedy_value <= approx_value) {
    out.s_dagger = greedy_value;
    out.party = std::move(greedy);
  } else {
    out.s_dagger = approx_value;
    out.party = std::move(approx.party);
  }
  return out;
}

FilterResult filter_candidates(const CandidateSet& candidates,
                               const scoring::ScoreMatrix& scores,
                               const scoring::ScoreModel& model, const CsrMatrix& X,
                               const std::vector<double>& y, Detector detector,
                               int m_d, int threads) {
  const int m = scores.m, n = scores.n;
  if (static_cast<int>(candidates.per_paper.size()) != n)
    throw ParamError("candidate set does not match the score matrix");
  check_pair(m, n, 0, 0, m_d);

  std::vector<std::vector<DetectionVerdict>> by_paper(n);
  parallel_for(n, threads, [&](int p) {
    for (int r : candidates.per_paper[p]) {
      DetectionVerdict v;
      v.reviewer = r;
      v.paper = p;
      v.score = scores.at(r, p);
      RobustScore rs;
      if (detector == Detector::kApprox) {
        rs = robust_score_approx(model, X, y, m, n, r, p, m_d);
      } else {
        rs = robust_score_exact(X, y, model.lambda(), m, n, r, p, m_d,
                                ExactStrategy::kEnumerate);
      }
      v.robust_score = rs.s_dagger;
      v.party = std::move(rs.party);
      v.removed = scores.rank_with_value(p, r, rs.s_dagger) > candidates.k;
      by_paper[p].push_back(std::move(v));
    }
  });

  FilterResult out;
  out.pruned.k = candidates.k;
  out.pruned.per_paper.resize(n);
  for (int p = 0; p < n; ++p) {
    for (const auto& v : by_paper[p]) {
      if (!v.removed) out.pruned.per_paper[p].push_back(v.reviewer);
    }
    std::sort(by_paper[p].begin(), by_paper[p].end(),
              [](const DetectionVerdict& a, const DetectionVerdict& b) {
                return a.reviewer < b.reviewer;
              });
    for (auto& v : by_paper[p]) out.verdicts.push_back(std::move(v));
  }
  return out;
}

TrimResult trim_fit(const CsrMatrix& X, const std::vector<double>& y, long l_remove,
                    double lambda, int max_iters, std::uint64_t seed,
                    const std::vector<char>* warm_keep) {
  (void)seed;
  const long rows = X.rows();
  if (static_cast<long>(y.size()) != rows)
    throw ParamError("label vector length does not match feature rows");
  if (l_remove < 0 || l_remove >= rows)
    throw ParamError("removal budget must be in [0, rows)");
  if (max_iters < 1) throw ParamError("max_iters must be at least 1");

  const long keep_count = rows - l_remove;
  std::vector<char> current(rows, 1);
  if (warm_keep) {
    if (static_cast<long>(warm_keep->size()) != rows)
      throw ParamError("warm-start mask length does not match feature rows");
    current = *warm_keep;
  }

  TrimResult out;
  std::vector<double> residual(rows);
  std::vector<long> order(rows);
  for (int iter = 0; iter < max_iters; ++iter) {
    scoring::ScoreModel model = scoring::train_ridge(X, y, lambda, current);
    ++out.iterations;

    double obj = lambda * model.weights().squaredNorm();
    for (long i = 0; i < rows; ++i) {
      const double ri = X.dot_row(static_cast<int>(i), model.weights().data()) - y[i];
      residual[i] = ri * ri;
      if (current[i]) obj += residual[i];
    }
    out.objectives.push_back(obj);
    out.model = std::move(model);

    std::iota(order.begin(), order.end(), 0L);
    std::nth_element(order.begin(), order.begin() + keep_count, order.end(),
                     [&](long a, long b) {
                       if (residual[a] != residual[b])
                         return residual[a] < residual[b];
                       return a < b;
                     });
    std::vector<char> next(rows, 0);
    for (long k = 0; k < keep_count; ++k) next[order[k]] = 1;

    if (next == current) {
      out.converged = true;
      current = std::move(next);
      break;
    }
    current = std::move(next);
  }

  out.keep = std::move(current);
  for (long i = 0; i < rows; ++i)
    if (!out.keep[i]) out.removed.push_back(static_cast<int>(i));
  return out;
}

double brute_force_detection_oracle(const CsrMatrix& X, const std::vector<double>& y,
                                    double lambda, int m, int n, int r, int p,
                                    int m_d) {
  check_pair(m, n, r, p, m_d);
  if (m > 12) throw ParamError("detection oracle limited to m <= 12 reviewers");
  if (static_cast<long>(y.size()) != X.rows() || X.rows() != m * n)
    throw ParamError("labels and features do not match the conference shape");

  const int d = X.cols();
  Eigen::MatrixXd dense(X.rows(), d);
  dense.setZero();
  for (int i = 0; i < X.rows(); ++i) {
    const auto view = X.row(i);
    for (std::size_t k = 0; k < view.len; ++k) dense(i, view.col[k]) = view.val[k];
  }
  const Eigen::VectorXd target = dense.row(r * n + p);

  std::vector<int> others;
  for (int t = 0; t < m; ++t)
    if (t != r) others.push_back(t);

  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick = {r};
  auto evaluate = [&]() {
    std::vector<char> drop(m, 0);
    for (int t : pick) drop[t] = 1;
    std::vector<int> kept_rows;
    for (int t = 0; t < m; ++t) {
      if (drop[t]) continue;
      for (int q = 0; q < n; ++q) kept_rows.push_back(t * n + q);
    }
    Eigen::MatrixXd xs(kept_rows.size(), d);
    Eigen::VectorXd ys(kept_rows.size());
    for (std::size_t i = 0; i < kept_rows.size(); ++i) {
      xs.row(i) = dense.row(kept_rows[i]);
      ys[i] = y[kept_rows[i]];
    }
    Eigen::MatrixXd h = xs.transpose() * xs;
    h += lambda * Eigen::MatrixXd::Identity(d, d);
    const Eigen::VectorXd b = xs.transpose() * ys;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    Eigen::VectorXd w = ldlt.solve(b);
    w += ldlt.solve(b - h * w);
    best = std::min(best, target.dot(w));
  };
  auto recurse = [&](auto&& self, std::size_t start) -> void {
    if (static_cast<int>(pick.size()) == m_d) {
      evaluate();
      return;
    }
    for (std::size_t i = start; i < others.size(); ++i) {
      pick.push_back(others[i]);
      self(self, i + 1);
      pick.pop_back();
    }
  };
  recurse(recurse, 0);
  return best;
}

void save_verdicts(const std::vector<DetectionVerdict>& verdicts,
                   const std::string& path) {
  CsvWriter out(path, {"reviewer_index", "paper_index", "score", "robust_score",
                       "removed", "party"});
  for (const auto& v : verdicts) {
    std::string party;
    for (std::size_t i = 0; i < v.party.size(); ++i) {
      if (i) party += '|';
      party += std::to_string(v.party[i]);
    }
    out.write_row({std::to_string(v.reviewer), std::to_string(v.paper),
                   format_double(v.score), format_double(v.robust_score),
                   v.removed ? "1" : "0", party});
  }
  out.close();
}

std::vector<DetectionVerdict> load_verdicts(const std::string& path) {
  const CsvFile table = read_csv(path);
  const std::vector<std::string> want = {"reviewer_index", "paper_index", "score",
                                         "robust_score", "removed", "party"};
  if (table.header != want) throw ParseError(path + ": unexpected verdict columns");
  std::vector<DetectionVerdict> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    DetectionVerdict v;
    v.reviewer = static_cast<int>(parse_long(row[0], path));
    v.paper = static_cast<int>(parse_long(row[1], path));
    v.score = parse_double(row[2], path);
    v.robust_score = parse_double(row[3], path);
    const long flag = parse_long(row[4], path);
    if (flag != 0 && flag != 1) throw ParseError(path + ": removed must be 0 or 1");
    v.removed = flag == 1;
    if (!row[5].empty()) {
      std::size_t start = 0;
      while (start <= row[5].size()) {
        const std::size_t bar = row[5].find('|', start);
        const std::string tok = row[5].substr(
            start, bar == std::string::npos ? std::string::npos : bar - start);
        v.party.push_back(static_cast<int>(parse_long(tok, path)));
        if (bar == std::string::npos) break;
        start = bar + 1;
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace robustbid::defense
