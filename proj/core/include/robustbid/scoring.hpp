#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "robustbid/conference.hpp"
#include "robustbid/sparse.hpp"

namespace robustbid::scoring {

// Keeps at most u_cap positive bids per reviewer, a uniform choice from that
// reviewer's positives drawn from a per-reviewer sub-stream. Rows at or
// under the cap are untouched.
BidMatrix cap_positive_bids(const BidMatrix& bids, int u_cap,
                            std::uint64_t master_seed);

// Dense Gram matrix X^T X + lambda*I.
Eigen::MatrixXd build_hessian(const CsrMatrix& X, double lambda);

// Same, over the subset of rows with keep_row[i] != 0.
Eigen::MatrixXd build_hessian(const CsrMatrix& X, double lambda,
                              const std::vector<char>& keep_row);

// Ridge model: weights plus the Cholesky factor of the Hessian. The factor
// is kept because nearly everything downstream (attacks, influence scores,
// incremental retraining) needs H^{-1} applied to vectors.
class ScoreModel {
 public:
  ScoreModel() = default;
  ScoreModel(double lambda, Eigen::VectorXd w, Eigen::MatrixXd l_factor)
      : lambda_(lambda), w_(std::move(w)), l_(std::move(l_factor)) {}

  double lambda() const { return lambda_; }
  int dim() const { return static_cast<int>(w_.size()); }
  const Eigen::VectorXd& weights() const { return w_; }
  const Eigen::MatrixXd& l_factor() const { return l_; }

  // H^{-1} b via the stored factor.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve_many(const Eigen::MatrixXd& b) const;

  // H^{-1} x_row^T for one feature row.
  Eigen::VectorXd solve_row(const CsrMatrix& X, long row) const;

 private:
  double lambda_ = 0.0;
  Eigen::VectorXd w_;
  Eigen::MatrixXd l_;
};

// Solves (X^T X + lambda I) w = X^T y and certifies the result: the normal
// equation residual must come out below 1e-8 relative, or training throws.
ScoreModel train_ridge(const CsrMatrix& X, const std::vector<double>& y,
                       double lambda);

// Ridge restricted to kept rows; dropped rows feed neither the Gram matrix
// nor the right-hand side, exactly as if they were deleted from X and y.
ScoreModel train_ridge(const CsrMatrix& X, const std::vector<double>& y,
                       double lambda, const std::vector<char>& keep_row);

struct ScoreMatrix {
  int m = 0, n = 0;
  std::vector<double> s;  // row-major r*n + p

  double at(int r, int p) const { return s[static_cast<std::size_t>(r) * n + p]; }
  double& at(int r, int p) { return s[static_cast<std::size_t>(r) * n + p]; }

  // Reviewers of one paper, best first; ties by reviewer index ascending.
  std::vector<int> column_order(int p) const;
  // 1-based rank r would hold in column p if its score were `value`, ranked
  // against the other reviewers' stored scores under the same tie rule.
  int rank_with_value(int p, int r, double value) const;
  int rank_of(int p, int r) const { return rank_with_value(p, r, at(r, p)); }
};

ScoreMatrix predict_scores(const CsrMatrix& X, const ScoreModel& model, int m, int n);

// Score change over every pair caused by a sparse label edit, using the
// fixed Hessian: delta_s = X H^{-1} X^T delta_y. Exact for ridge, because H
// does not depend on y.
std::vector<double> score_shift(const CsrMatrix& X, const ScoreModel& model,
                                const std::vector<std::pair<long, double>>& delta_y);

enum class Axis { kPerReviewer, kPerPaper };

// Mean fraction of the top-k slots occupied by positives, over entities that
// have at least one positive. `exclude` removes items (e.g. training
// positives) from an entity's ranking before counting.
double average_precision_at_k(const ScoreMatrix& scores, Axis axis,
                              const std::vector<std::vector<int>>& positives, int k,
                              const std::vector<std::vector<int>>* exclude = nullptr);

void save_model(const ScoreModel& model, const std::string& path);
ScoreModel load_model(const std::string& path);

void save_scores(const ScoreMatrix& scores, const std::string& path);
ScoreMatrix load_scores(const std::string& path);

}  // namespace robustbid::scoring
