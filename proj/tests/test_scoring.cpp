#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "robustbid/conference.hpp"
#include "robustbid/errors.hpp"
#include "robustbid/rng.hpp"
#include "robustbid/scoring.hpp"
#include "support.hpp"

using namespace robustbid;
using testsupport::TempDir;

namespace {

Eigen::MatrixXd to_dense(const CsrMatrix& X) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(X.rows(), X.cols());
  for (int i = 0; i < X.rows(); ++i) {
    const auto row = X.row(i);
    for (std::size_t k = 0; k < row.len; ++k) out(i, row.col[k]) = row.val[k];
  }
  return out;
}

// Independent solver: plain gradient descent on the ridge objective.
Eigen::VectorXd ridge_by_gradient_descent(const Eigen::MatrixXd& X,
                                          const Eigen::VectorXd& y, double lambda) {
  const double lipschitz = X.squaredNorm() + lambda;  // Frobenius bound on ||X||_2^2
  const double lr = 1.0 / (2.0 * lipschitz);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(X.cols());
  for (int it = 0; it < 200000; ++it) {
    const Eigen::VectorXd grad = 2.0 * (X.transpose() * (X * w - y)) + 2.0 * lambda * w;
    if (grad.lpNorm<Eigen::Infinity>() < 1e-10) break;
    w -= lr * grad;
  }
  return w;
}

}  // namespace

TEST_SUITE("scoring") {

TEST_CASE("the positive-bid cap keeps compliant rows untouched") {
  Rng rng(41);
  BidMatrix bids = testsupport::random_bids(rng, 3, 60, 1.0);  // every pair positive
  bids.set_row(1, {{0, 3}, {5, 2}});
  const BidMatrix capped = scoring::cap_positive_bids(bids, 60, 9);
  CHECK(capped.positive_count(0) == 60);  // exactly at the cap
  CHECK(capped.row(1) == bids.row(1));    // under the cap
}

TEST_CASE("the cap subsamples oversized rows from their own bids") {
  Rng rng(42);
  const BidMatrix bids = testsupport::random_bids(rng, 2, 100, 1.0);
  const BidMatrix capped = scoring::cap_positive_bids(bids, 60, 9);
  for (int r = 0; r < 2; ++r) {
    CHECK(capped.positive_count(r) == 60);
    for (const auto& [p, v] : capped.row(r)) CHECK(bids.value_at(r, p) == v);
  }
  const BidMatrix again = scoring::cap_positive_bids(bids, 60, 9);
  CHECK(capped == again);
  const BidMatrix other = scoring::cap_positive_bids(bids, 60, 10);
  CHECK(!(capped == other));
}

TEST_CASE("ridge on identity features has a closed form") {
  CsrMatrix X(2, 2);
  X.append_row({{0, 1.0}});
  X.append_row({{1, 1.0}});
  const scoring::ScoreModel model = scoring::train_ridge(X, {1.0, 3.0}, 1.0);
  CHECK(model.weights()(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(model.weights()(1) == doctest::Approx(1.5).epsilon(1e-12));

  const scoring::ScoreMatrix scores = scoring::predict_scores(X, model, 2, 1);
  CHECK(scores.at(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(scores.at(1, 0) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("zero labels give a zero model and index-ordered ranks") {
  Rng rng(43);
  const CsrMatrix X = testsupport::random_features(rng, 3, 4, 6);
  const scoring::ScoreModel model =
      scoring::train_ridge(X, std::vector<double>(12, 0.0), 1.0);
  CHECK(model.weights().norm() == 0.0);
  const scoring::ScoreMatrix scores = scoring::predict_scores(X, model, 3, 4);
  for (int p = 0; p < 4; ++p) {
    CHECK(scores.column_order(p) == std::vector<int>{0, 1, 2});
    for (int r = 0; r < 3; ++r) CHECK(scores.rank_of(p, r) == r + 1);
  }
}

TEST_CASE("training matches an independent gradient-descent solver") {
  Rng rng(44);
  const CsrMatrix X = testsupport::random_features(rng, 10, 5, 8, 4, 2.0);
  std::vector<double> y(50);
  for (auto& v : y) v = rng.real01() * 3.0;
  const scoring::ScoreModel model = scoring::train_ridge(X, y, 1.0);

  const Eigen::MatrixXd dense = to_dense(X);
  const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), 50);
  const Eigen::VectorXd oracle = ridge_by_gradient_descent(dense, yv, 1.0);
  CHECK((model.weights() - oracle).lpNorm<Eigen::Infinity>() <= 1e-6);
}

TEST_CASE("the normal-equation residual stays certified") {
  Rng rng(45);
  for (int inst = 0; inst < 10; ++inst) {
    const int m = 4 + inst % 3, n = 3 + inst % 2, d = 6 + inst;
    const CsrMatrix X = testsupport::random_features(rng, m, n, d);
    std::vector<double> y(static_cast<std::size_t>(m) * n);
    for (auto& v : y) v = rng.real01() * 3.0 - 1.0;
    const scoring::ScoreModel model = scoring::train_ridge(X, y, 0.7);

    const Eigen::MatrixXd dense = to_dense(X);
    const Eigen::VectorXd yv =
        Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<long>(y.size()));
    const Eigen::MatrixXd h =
        dense.transpose() * dense + 0.7 * Eigen::MatrixXd::Identity(d, d);
    const Eigen::VectorXd rhs = dense.transpose() * yv;
    const double residual = (h * model.weights() - rhs).norm();
    CHECK(residual <= 1e-8 * std::max(1.0, rhs.norm()));
  }
}

TEST_CASE("predictions are linear in the labels") {
  Rng rng(46);
  const int m = 6, n = 5, d = 9;
  const CsrMatrix X = testsupport::random_features(rng, m, n, d);
  std::vector<double> y1(30), y2(30), sum(30);
  for (int i = 0; i < 30; ++i) {
    y1[i] = rng.real01() * 3.0;
    y2[i] = rng.real01() * 3.0;
    sum[i] = y1[i] + y2[i];
  }
  const auto s1 = scoring::predict_scores(X, scoring::train_ridge(X, y1, 1.0), m, n);
  const auto s2 = scoring::predict_scores(X, scoring::train_ridge(X, y2, 1.0), m, n);
  const auto s12 = scoring::predict_scores(X, scoring::train_ridge(X, sum, 1.0), m, n);
  for (int i = 0; i < 30; ++i)
    CHECK(std::abs(s12.s[i] - s1.s[i] - s2.s[i]) <= 1e-8);
}

TEST_CASE("stronger regularization shrinks the weights") {
  Rng rng(47);
  const CsrMatrix X = testsupport::random_features(rng, 5, 5, 7);
  std::vector<double> y(25);
  for (auto& v : y) v = rng.real01() * 3.0;
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {0.5, 5.0, 50.0}) {
    const double norm = scoring::train_ridge(X, y, lambda).weights().norm();
    CHECK(norm <= prev + 1e-12);
    prev = norm;
  }
}

TEST_CASE("direct prediction agrees with the Hessian-solve identity") {
  Rng rng(48);
  const int m = 5, n = 4, d = 8;
  const CsrMatrix X = testsupport::random_features(rng, m, n, d);
  std::vector<double> y(20);
  for (auto& v : y) v = rng.real01() * 3.0;
  const scoring::ScoreModel model = scoring::train_ridge(X, y, 1.3);
  const scoring::ScoreMatrix direct = scoring::predict_scores(X, model, m, n);

  // s = X H^{-1} X^T y assembled through the exposed solver.
  Eigen::VectorXd t = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < 20; ++i) {
    const auto row = X.row(i);
    for (std::size_t k = 0; k < row.len; ++k) t(row.col[k]) += row.val[k] * y[i];
  }
  const Eigen::VectorXd u = model.solve(t);
  for (int i = 0; i < 20; ++i)
    CHECK(std::abs(direct.s[i] - X.dot_row(i, u.data())) <= 1e-8);
}

TEST_CASE("score shifts reproduce a full retrain on edited labels") {
  Rng rng(49);
  const int m = 5, n = 4;
  const CsrMatrix X = testsupport::random_features(rng, m, n, 7);
  std::vector<double> y(20);
  for (auto& v : y) v = rng.real01() * 3.0;
  const scoring::ScoreModel model = scoring::train_ridge(X, y, 1.0);

  std::vector<std::pair<long, double>> delta = {{3, 2.0}, {11, -1.5}, {17, 3.0}};
  std::vector<double> edited = y;
  for (const auto& [row, dv] : delta) edited[row] += dv;

  const auto before = scoring::predict_scores(X, model, m, n);
  const auto after =
      scoring::predict_scores(X, scoring::train_ridge(X, edited, 1.0), m, n);
  const std::vector<double> shift = scoring::score_shift(X, model, delta);
  for (int i = 0; i < 20; ++i)
    CHECK(std::abs(after.s[i] - before.s[i] - shift[i]) <= 1e-8);
}

TEST_CASE("rank tables break ties toward the smaller reviewer index") {
  scoring::ScoreMatrix scores;
  scores.m = 3;
  scores.n = 1;
  scores.s = {1.0, 1.0, 0.5};
  CHECK(scores.column_order(0) == std::vector<int>{0, 1, 2});
  CHECK(scores.rank_of(0, 0) == 1);
  CHECK(scores.rank_of(0, 1) == 2);
  CHECK(scores.rank_of(0, 2) == 3);
  // A hypothetical value ties with reviewer 0: index decides both ways.
  CHECK(scores.rank_with_value(0, 2, 1.0) == 3);
  CHECK(scores.rank_with_value(0, 0, 0.5) == 2);

  Rng rng(50);
  scoring::ScoreMatrix random;
  random.m = 9;
  random.n = 3;
  random.s.resize(27);
  for (auto& v : random.s) v = rng.real01();
  for (int p = 0; p < 3; ++p) {
    std::vector<int> ranks;
    for (int r = 0; r < 9; ++r) ranks.push_back(random.rank_of(p, r));
    std::sort(ranks.begin(), ranks.end());
    std::vector<int> expect(9);
    std::iota(expect.begin(), expect.end(), 1);
    CHECK(ranks == expect);  // a permutation of 1..m
  }
}

TEST_CASE("precision at k counts held-out hits per entity") {
  scoring::ScoreMatrix scores;
  scores.m = 1;
  scores.n = 3;
  scores.s = {3.0, 2.0, 1.0};

  using Positives = std::vector<std::vector<int>>;
  // Ranking (positive, negative, positive) at k=2 scores one hit of two.
  CHECK(scoring::average_precision_at_k(scores, scoring::Axis::kPerReviewer,
                                        Positives{{0, 2}}, 2) == doctest::Approx(0.5));
  // Every top-k slot positive.
  CHECK(scoring::average_precision_at_k(scores, scoring::Axis::kPerReviewer,
                                        Positives{{0, 1}}, 2) == doctest::Approx(1.0));
  // No positives at all: nothing to average, reported as zero.
  CHECK(scoring::average_precision_at_k(scores, scoring::Axis::kPerReviewer,
                                        Positives{{}}, 2) == 0.0);
  // Excluded items are skipped before the top-k window is filled.
  const Positives held_out = {{1}};
  const Positives exclude = {{0}};
  CHECK(scoring::average_precision_at_k(scores, scoring::Axis::kPerReviewer, held_out,
                                        1, &exclude) == doctest::Approx(1.0));
  CHECK_THROWS_AS(scoring::average_precision_at_k(scores, scoring::Axis::kPerReviewer,
                                                  Positives{{0}}, 4),
                  ParamError);
}

TEST_CASE("models and score matrices round trip through files") {
  Rng rng(51);
  const int m = 4, n = 3, d = 6;
  const CsrMatrix X = testsupport::random_features(rng, m, n, d);
  std::vector<double> y(12);
  for (auto& v : y) v = rng.real01() * 3.0;
  const scoring::ScoreModel model = scoring::train_ridge(X, y, 2.0);
  const scoring::ScoreMatrix scores = scoring::predict_scores(X, model, m, n);

  TempDir tmp;
  scoring::save_model(model, tmp.file("model.bin"));
  const scoring::ScoreModel back = scoring::load_model(tmp.file("model.bin"));
  CHECK(back.lambda() == model.lambda());
  CHECK((back.weights() - model.weights()).norm() == 0.0);
  Eigen::VectorXd probe = Eigen::VectorXd::LinSpaced(d, 0.3, 1.1);
  CHECK((back.solve(probe) - model.solve(probe)).norm() <= 1e-12);

  scoring::save_scores(scores, tmp.file("scores.csv"));
  const scoring::ScoreMatrix s2 = scoring::load_scores(tmp.file("scores.csv"));
  CHECK(s2.m == m);
  CHECK(s2.n == n);
  for (int i = 0; i < m * n; ++i) CHECK(s2.s[i] == scores.s[i]);

  // A truncated model file fails loudly.
  std::ofstream trunc(tmp.file("model.bin"), std::ios::binary | std::ios::trunc);
  trunc << "junk";
  trunc.close();
  CHECK_THROWS_AS(scoring::load_model(tmp.file("model.bin")), ParseError);
}

}  // TEST_SUITE
