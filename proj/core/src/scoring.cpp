#include "robustbid/scoring.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>

#include "robustbid/csvio.hpp"
#include "robustbid/errors.hpp"
#include "robustbid/rng.hpp"

namespace robustbid::scoring {

BidMatrix cap_positive_bids(const BidMatrix& bids, int u_cap,
                            std::uint64_t master_seed) {
  if (u_cap < 0) throw ParamError("u_cap must be nonnegative");
  const int m = bids.reviewer_count(), n = bids.paper_count();
  BidMatrix out(m, n);
  for (int r = 0; r < m; ++r) {
    const auto& row = bids.row(r);
    if (static_cast<int>(row.size()) <= u_cap) {
      out.set_row(r, row);
      continue;
    }
    Rng rng(derive_seed(master_seed, "bid-cap", static_cast<std::uint64_t>(r)));
    auto keep = rng.sample_without_replacement(static_cast<int>(row.size()), u_cap);
    std::sort(keep.begin(), keep.end());
    std::vector<std::pair<int, int>> kept;
    kept.reserve(keep.size());
    for (int idx : keep) kept.push_back(row[idx]);
    out.set_row(r, std::move(kept));
  }
  return out;
}

namespace {

Eigen::MatrixXd hessian_impl(const CsrMatrix& X, double lambda,
                             const std::vector<char>* keep) {
  const int d = X.cols();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < X.rows(); ++i) {
    if (keep && !(*keep)[i]) continue;
    const auto row = X.row(i);
    for (std::size_t a = 0; a < row.len; ++a) {
      const double va = row.val[a];
      const int ca = row.col[a];
      for (std::size_t b = a; b < row.len; ++b)
        H(ca, row.col[b]) += va * row.val[b];
    }
  }
  // fill the lower triangle from the accumulated upper one
  for (int i = 0; i < d; ++i) {
    H(i, i) += lambda;
    for (int j = i + 1; j < d; ++j) H(j, i) = H(i, j);
  }
  return H;
}

}  // namespace

Eigen::MatrixXd build_hessian(const CsrMatrix& X, double lambda) {
  return hessian_impl(X, lambda, nullptr);
}

Eigen::MatrixXd build_hessian(const CsrMatrix& X, double lambda,
                              const std::vector<char>& keep_row) {
  if (static_cast<long>(keep_row.size()) != X.rows())
    throw ParamError("row mask length does not match feature rows");
  return hessian_impl(X, lambda, &keep_row);
}

Eigen::VectorXd ScoreModel::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd x = l_.triangularView<Eigen::Lower>().solve(b);
  l_.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
  return x;
}

Eigen::MatrixXd ScoreModel::solve_many(const Eigen::MatrixXd& b) const {
  Eigen::MatrixXd x = l_.triangularView<Eigen::Lower>().solve(b);
  l_.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
  return x;
}

Eigen::VectorXd ScoreModel::solve_row(const CsrMatrix& X, long row) const {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dim());
  const auto r = X.row(static_cast<int>(row));
  for (std::size_t k = 0; k < r.len; ++k) b[r.col[k]] = r.val[k];
  return solve(b);
}

namespace {

Eigen::VectorXd gram_rhs(const CsrMatrix& X, const std::vector<double>& y,
                         const std::vector<char>* keep) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(X.cols());
  for (int i = 0; i < X.rows(); ++i) {
    if (y[i] == 0.0 || (keep && !(*keep)[i])) continue;
    const auto row = X.row(i);
    for (std::size_t k = 0; k < row.len; ++k) b[row.col[k]] += y[i] * row.val[k];
  }
  return b;
}

ScoreModel train_ridge_impl(const CsrMatrix& X, const std::vector<double>& y,
                            double lambda, const std::vector<char>* keep) {
  if (lambda <= 0.0) throw ParamError("lambda must be positive");
  if (static_cast<long>(y.size()) != X.rows())
    throw ParamError("label vector length does not match feature rows");
  Eigen::MatrixXd H = hessian_impl(X, lambda, keep);
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("ridge training: Hessian factorization failed");
  const Eigen::VectorXd b = gram_rhs(X, y, keep);
  Eigen::VectorXd w = llt.solve(b);
  w += llt.solve(b - H * w);  // one refinement step
  const double res = (H * w - b).norm();
  const double bound = 1e-8 * std::max(1.0, b.norm());
  if (res > bound)
    throw std::runtime_error("ridge training: residual " + std::to_string(res) +
                             " exceeds certification bound");
  Eigen::MatrixXd l = llt.matrixL();
  return ScoreModel(lambda, std::move(w), std::move(l));
}

}  // namespace

ScoreModel train_ridge(const CsrMatrix& X, const std::vector<double>& y,
                       double lambda) {
  return train_ridge_impl(X, y, lambda, nullptr);
}

ScoreModel train_ridge(const CsrMatrix& X, const std::vector<double>& y,
                       double lambda, const std::vector<char>& keep_row) {
  if (static_cast<long>(keep_row.size()) != X.rows())
    throw ParamError("row mask length does not match feature rows");
  return train_ridge_impl(X, y, lambda, &keep_row);
}

std::vector<int> ScoreMatrix::column_order(int p) const {
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double sa = at(a, p), sb = at(b, p);
    if (sa != sb) return sa > sb;
    return a < b;
  });
  return order;
}

int ScoreMatrix::rank_with_value(int p, int r, double value) const {
  int ahead = 0;
  for (int t = 0; t < m; ++t) {
    if (t == r) continue;
    const double st = at(t, p);
    if (st > value || (st == value && t < r)) ++ahead;
  }
  return 1 + ahead;
}

ScoreMatrix predict_scores(const CsrMatrix& X, const ScoreModel& model, int m, int n) {
  if (X.rows() != static_cast<long>(m) * n)
    throw ParamError("feature rows do not match m*n");
  ScoreMatrix out;
  out.m = m;
  out.n = n;
  out.s.resize(static_cast<std::size_t>(m) * n);
  for (int i = 0; i < X.rows(); ++i) out.s[i] = X.dot_row(i, model.weights().data());
  return out;
}

std::vector<double> score_shift(const CsrMatrix& X, const ScoreModel& model,
                                const std::vector<std::pair<long, double>>& delta_y) {
  Eigen::VectorXd t = Eigen::VectorXd::Zero(model.dim());
  for (const auto& [row, dy] : delta_y) {
    if (dy == 0.0) continue;
    const auto rv = X.row(static_cast<int>(row));
    for (std::size_t k = 0; k < rv.len; ++k) t[rv.col[k]] += dy * rv.val[k];
  }
  const Eigen::VectorXd u = model.solve(t);
  std::vector<double> shift(X.rows());
  for (int i = 0; i < X.rows(); ++i) shift[i] = X.dot_row(i, u.data());
  return shift;
}

double average_precision_at_k(const ScoreMatrix& scores, Axis axis,
                              const std::vector<std::vector<int>>& positives, int k,
                              const std::vector<std::vector<int>>* exclude) {
  const int entities = axis == Axis::kPerReviewer ? scores.m : scores.n;
  const int items = axis == Axis::kPerReviewer ? scores.n : scores.m;
  if (k < 1 || k > items) throw ParamError("k out of range for precision@k");
  if (static_cast<int>(positives.size()) != entities)
    throw ParamError("positives list does not match entity count");

  double acc = 0.0;
  int counted = 0;
  std::vector<char> removed(items), is_positive(items);
  std::vector<int> order(items);
  for (int e = 0; e < entities; ++e) {
    if (positives[e].empty()) continue;
    std::fill(removed.begin(), removed.end(), 0);
    std::fill(is_positive.begin(), is_positive.end(), 0);
    if (exclude)
      for (int i : (*exclude)[e]) removed[i] = 1;
    for (int i : positives[e]) is_positive[i] = 1;
    std::iota(order.begin(), order.end(), 0);
    auto score_of = [&](int i) {
      return axis == Axis::kPerReviewer ? scores.at(e, i) : scores.at(i, e);
    };
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const double sa = score_of(a), sb = score_of(b);
      if (sa != sb) return sa > sb;
      return a < b;
    });
    int hits = 0, seen = 0;
    for (int i : order) {
      if (removed[i]) continue;
      if (seen == k) break;
      ++seen;
      hits += is_positive[i];
    }
    acc += static_cast<double>(hits) / static_cast<double>(k);
    ++counted;
  }
  return counted == 0 ? 0.0 : acc / counted;
}

namespace {
constexpr char kModelMagic[8] = {'R', 'B', 'M', 'O', 'D', 'L', '0', '1'};

void put_u64(std::ofstream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (56 - 8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

void put_f64(std::ofstream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

std::uint64_t get_u64(std::ifstream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | buf[i];
  return v;
}

double get_f64(std::ifstream& in) {
  const std::uint64_t bits = get_u64(in);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void save_model(const ScoreModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  out.write(kModelMagic, 8);
  put_u64(out, static_cast<std::uint64_t>(model.dim()));
  put_f64(out, model.lambda());
  for (int i = 0; i < model.dim(); ++i) put_f64(out, model.weights()[i]);
  // lower-triangular Cholesky factor, row by row
  for (int i = 0; i < model.dim(); ++i)
    for (int j = 0; j <= i; ++j) put_f64(out, model.l_factor()(i, j));
  if (!out) throw ParseError("write to " + path + " failed");
}

ScoreModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open model " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kModelMagic, 8) != 0)
    throw ParseError(path + ": not a model file (bad version tag)");
  const int d = static_cast<int>(get_u64(in));
  const double lambda = get_f64(in);
  Eigen::VectorXd w(d);
  for (int i = 0; i < d; ++i) w[i] = get_f64(in);
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) l(i, j) = get_f64(in);
  if (!in) throw ParseError(path + ": truncated model file");
  return ScoreModel(lambda, std::move(w), std::move(l));
}

void save_scores(const ScoreMatrix& scores, const std::string& path) {
  CsvWriter w(path, {"reviewer_index", "paper_index", "score"});
  for (int r = 0; r < scores.m; ++r)
    for (int p = 0; p < scores.n; ++p)
      w.write_row({std::to_string(r), std::to_string(p), format_double(scores.at(r, p))});
  w.close();
}

ScoreMatrix load_scores(const std::string& path) {
  CsvFile f = read_csv(path);
  if (f.header != std::vector<std::string>{"reviewer_index", "paper_index", "score"})
    throw ParseError(path + ": unexpected header");
  int m = 0, n = 0;
  for (const auto& row : f.rows) {
    m = std::max(m, static_cast<int>(parse_long(row[0], "scores reviewer_index")) + 1);
    n = std::max(n, static_cast<int>(parse_long(row[1], "scores paper_index")) + 1);
  }
  ScoreMatrix out;
  out.m = m;
  out.n = n;
  out.s.assign(static_cast<std::size_t>(m) * n, 0.0);
  std::vector<char> seen(out.s.size(), 0);
  for (const auto& row : f.rows) {
    const int r = static_cast<int>(parse_long(row[0], "scores reviewer_index"));
    const int p = static_cast<int>(parse_long(row[1], "scores paper_index"));
    const auto idx = static_cast<std::size_t>(r) * n + p;
    if (seen[idx]) throw ParseError(path + ": duplicate score entry");
    seen[idx] = 1;
    out.s[idx] = parse_double(row[2], "score");
  }
  for (char c : seen)
    if (!c) throw ParseError(path + ": incomplete score grid");
  return out;
}

}  // namespace robustbid::scoring
