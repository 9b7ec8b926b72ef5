#include "robustbid/assign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

#include "robustbid/csvio.hpp"
#include "robustbid/errors.hpp"

namespace robustbid::assign {

namespace {

constexpr double kQuantum = 1e-9;  // score resolution inside the flow solver

long long quantize(double s) {
  if (!std::isfinite(s) || std::abs(s) > 1e3)
    throw ParamError("assignment scores must be finite and below 1e3 in magnitude");
  return std::llround(s / kQuantum);
}

// Min-cost flow on flat arrays: successive shortest augmenting paths with
// Dijkstra over reduced costs. All edge costs are nonnegative by
// construction, so no initial Bellman-Ford pass is needed.
class FlowNetwork {
 public:
  explicit FlowNetwork(int nodes) : head_(nodes, -1) {}

  void add_edge(int u, int v, long long cap, long long cost) {
    push(u, v, cap, cost);
    push(v, u, 0, -cost);
  }

  int edge_count() const { return static_cast<int>(to_.size()); }
  long long flow_on(int edge_id, long long original_cap) const {
    return original_cap - cap_[edge_id];
  }

  // Sends up to `target` units from s to t, returns the amount sent.
  long long run(int s, int t, long long target) {
    const int n = static_cast<int>(head_.size());
    std::vector<long long> pi(n, 0);
    std::vector<long long> dist(n);
    std::vector<int> parent_edge(n);
    long long sent = 0;
    while (sent < target) {
      constexpr long long kInf = std::numeric_limits<long long>::max();
      std::fill(dist.begin(), dist.end(), kInf);
      std::fill(parent_edge.begin(), parent_edge.end(), -1);
      dist[s] = 0;
      using Item = std::pair<long long, int>;
      std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
      heap.push({0, s});
      while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        for (int e = head_[u]; e != -1; e = next_[e]) {
          if (cap_[e] <= 0) continue;
          const int v = to_[e];
          const long long nd = d + cost_[e] + pi[u] - pi[v];
          if (nd < dist[v]) {
            dist[v] = nd;
            parent_edge[v] = e;
            heap.push({nd, v});
          }
        }
      }
      if (dist[t] == kInf) break;
      for (int v = 0; v < n; ++v)
        if (dist[v] < kInf) pi[v] += dist[v];

      long long bottleneck = target - sent;
      for (int v = t; v != s;) {
        const int e = parent_edge[v];
        bottleneck = std::min(bottleneck, cap_[e]);
        v = to_[e ^ 1];
      }
      for (int v = t; v != s;) {
        const int e = parent_edge[v];
        cap_[e] -= bottleneck;
        cap_[e ^ 1] += bottleneck;
        v = to_[e ^ 1];
      }
      sent += bottleneck;
    }
    return sent;
  }

 private:
  void push(int u, int v, long long cap, long long cost) {
    next_.push_back(head_[u]);
    head_[u] = static_cast<int>(to_.size());
    to_.push_back(v);
    cap_.push_back(cap);
    cost_.push_back(cost);
  }

  std::vector<int> head_, next_, to_;
  std::vector<long long> cap_, cost_;
};

std::vector<int> permitted_reviewers(const defense::CandidateSet* permitted, int m,
                                     int p) {
  if (!permitted) {
    std::vector<int> all(m);
    for (int r = 0; r < m; ++r) all[r] = r;
    return all;
  }
  std::vector<int> out = permitted->per_paper[p];
  std::sort(out.begin(), out.end());
  return out;
}

Assignment finalize(const scoring::ScoreMatrix& scores, int r_demand, int p_cap,
                    std::vector<std::pair<int, int>> pairs) {
  Assignment a;
  a.reviewers = scores.m;
  a.papers = scores.n;
  a.r_demand = r_demand;
  a.p_cap = p_cap;
  std::sort(pairs.begin(), pairs.end());
  a.pairs = std::move(pairs);
  a.paper_load.assign(scores.n, 0);
  a.reviewer_load.assign(scores.m, 0);
  for (const auto& [r, p] : a.pairs) {
    ++a.paper_load[p];
    ++a.reviewer_load[r];
    a.total_score += scores.at(r, p);
  }
  a.deficit.resize(scores.n);
  for (int p = 0; p < scores.n; ++p) a.deficit[p] = r_demand - a.paper_load[p];
  return a;
}

}  // namespace

long Assignment::total_deficit() const {
  long d = 0;
  for (int v : deficit) d += v;
  return d;
}

std::vector<std::vector<int>> Assignment::reviewers_by_paper() const {
  std::vector<std::vector<int>> out(papers);
  for (const auto& [r, p] : pairs) out[p].push_back(r);
  return out;
}

scoring::ScoreMatrix neurips2014_score(const Conference& conf) {
  scoring::ScoreMatrix s;
  s.m = conf.m();
  s.n = conf.n();
  s.s.resize(static_cast<std::size_t>(s.m) * s.n);
  for (int p = 0; p < s.n; ++p) {
    std::vector<int> subj = conf.paper_subjects(p);
    std::sort(subj.begin(), subj.end());
    for (int r = 0; r < s.m; ++r) {
      // Reviewer subjects are rank-ordered; sort a copy for the intersection.
      std::vector<int> rs = conf.reviewer_subjects(r);
      std::sort(rs.begin(), rs.end());
      std::vector<int> inter;
      std::set_intersection(subj.begin(), subj.end(), rs.begin(), rs.end(),
                            std::back_inserter(inter));
      const double overlap = static_cast<double>(inter.size()) / 5.0;
      const double bid = conf.bids().value_at(r, p);
      s.at(r, p) = (1.0 + bid) * (0.5 * conf.tpms(r, p) + 0.5 * overlap + 0.01);
    }
  }
  return s;
}

scoring::ScoreMatrix tpms_only_score(const Conference& conf) {
  scoring::ScoreMatrix s;
  s.m = conf.m();
  s.n = conf.n();
  s.s = conf.tpms_matrix();
  return s;
}

Assignment solve_assignment(const scoring::ScoreMatrix& scores,
                            const defense::CandidateSet* permitted, int r_demand,
                            int p_cap) {
  const int m = scores.m, n = scores.n;
  if (r_demand < 1) throw ParamError("per-paper demand must be at least 1");
  if (p_cap < 1) throw ParamError("per-reviewer cap must be at least 1");
  if (permitted && static_cast<int>(permitted->per_paper.size()) != n)
    throw ParamError("candidate set does not match the score matrix");

  // Quantized scores and the shift constant that keeps edge costs >= 0.
  std::vector<std::vector<int>> allowed(n);
  long long max_abs = 0, c_max = 0;
  for (int p = 0; p < n; ++p) {
    allowed[p] = permitted_reviewers(permitted, m, p);
    for (int r : allowed[p]) {
      const long long q = quantize(scores.at(r, p));
      max_abs = std::max(max_abs, std::llabs(q));
      c_max = std::max(c_max, q);
    }
  }
  // Any unit of unmet demand must cost more than the largest possible total
  // score swing, so deficit minimization strictly dominates score
  // optimization. A fixed huge constant would overflow the path sums, hence
  // the adaptive bound plus a 128-bit check that the worst-case potential
  // accumulation stays inside int64.
  const long long target = static_cast<long long>(n) * r_demand;
  const long long penalty = 2 * target * max_abs + 1;
  const __int128 worst_total =
      static_cast<__int128>(target) * (penalty + c_max + max_abs);
  if (worst_total > static_cast<__int128>(std::numeric_limits<long long>::max() / 4))
    throw ParamError("assignment instance too large for exact integer costs");

  // Nodes: source, papers, reviewers, slack reviewer, sink.
  const int src = 0, sink = n + m + 2, slack = n + m + 1;
  auto paper_node = [&](int p) { return 1 + p; };
  auto reviewer_node = [&](int r) { return 1 + n + r; };

  FlowNetwork net(n + m + 3);
  std::vector<std::vector<std::pair<int, int>>> pair_edges(n);  // (edge id, reviewer)
  std::vector<int> slack_edges(n);
  for (int p = 0; p < n; ++p) net.add_edge(src, paper_node(p), r_demand, 0);
  for (int p = 0; p < n; ++p) {
    for (int r : allowed[p]) {
      pair_edges[p].emplace_back(net.edge_count(), r);
      net.add_edge(paper_node(p), reviewer_node(r), 1,
                   c_max - quantize(scores.at(r, p)));
    }
    slack_edges[p] = net.edge_count();
    net.add_edge(paper_node(p), slack, r_demand, c_max + penalty);
  }
  for (int r = 0; r < m; ++r) net.add_edge(reviewer_node(r), sink, p_cap, 0);
  net.add_edge(slack, sink, target, 0);

  const long long sent = net.run(src, sink, target);
  if (sent != target)
    throw std::runtime_error("assignment flow did not satisfy demand");

  std::vector<std::pair<int, int>> pairs;
  for (int p = 0; p < n; ++p) {
    for (const auto& [e, r] : pair_edges[p]) {
      if (net.flow_on(e, 1) > 0) pairs.emplace_back(r, p);
    }
  }
  return finalize(scores, r_demand, p_cap, std::move(pairs));
}

Assignment brute_force_assignment_oracle(const scoring::ScoreMatrix& scores,
                                         const defense::CandidateSet* permitted,
                                         int r_demand, int p_cap) {
  const int m = scores.m, n = scores.n;
  if (m > 6 || n > 4 || r_demand > 2)
    throw ParamError("assignment oracle limits: m <= 6, n <= 4, r_demand <= 2");
  if (r_demand < 1 || p_cap < 1) throw ParamError("demand and cap must be positive");

  std::vector<std::vector<int>> allowed(n);
  for (int p = 0; p < n; ++p) allowed[p] = permitted_reviewers(permitted, m, p);

  long best_count = -1;
  double best_score = 0.0;
  std::vector<std::pair<int, int>> best_pairs;
  std::vector<int> load(m, 0);
  std::vector<std::pair<int, int>> chosen;

  auto recurse = [&](auto&& self, int p) -> void {
    if (p == n) {
      const long count = static_cast<long>(chosen.size());
      double score = 0.0;
      for (const auto& [r, q] : chosen) score += scores.at(r, q);
      if (count > best_count || (count == best_count && score > best_score)) {
        best_count = count;
        best_score = score;
        best_pairs = chosen;
      }
      return;
    }
    const auto& cands = allowed[p];
    const int c = static_cast<int>(cands.size());
    for (unsigned mask = 0; mask < (1u << c); ++mask) {
      if (__builtin_popcount(mask) > r_demand) continue;
      bool ok = true;
      for (int i = 0; i < c && ok; ++i)
        if ((mask >> i) & 1u) ok = load[cands[i]] < p_cap;
      if (!ok) continue;
      for (int i = 0; i < c; ++i)
        if ((mask >> i) & 1u) {
          ++load[cands[i]];
          chosen.emplace_back(cands[i], p);
        }
      self(self, p + 1);
      for (int i = 0; i < c; ++i)
        if ((mask >> i) & 1u) {
          --load[cands[i]];
          chosen.pop_back();
        }
    }
  };
  recurse(recurse, 0);
  return finalize(scores, r_demand, p_cap, std::move(best_pairs));
}

void save_assignment(const Assignment& a, const std::string& path) {
  CsvWriter out(path, {"paper_index", "reviewer_index"});
  auto by_paper = a.reviewers_by_paper();
  for (int p = 0; p < a.papers; ++p) {
    for (int r : by_paper[p])
      out.write_row({std::to_string(p), std::to_string(r)});
    for (int k = 0; k < a.deficit[p]; ++k)
      out.write_row({std::to_string(p), "-1"});
  }
  out.close();
}

Assignment load_assignment(const std::string& path,
                           const scoring::ScoreMatrix& scores, int r_demand,
                           int p_cap) {
  const CsvFile table = read_csv(path);
  const std::vector<std::string> want = {"paper_index", "reviewer_index"};
  if (table.header != want) throw ParseError(path + ": unexpected assignment columns");
  std::vector<std::pair<int, int>> pairs;
  for (const auto& row : table.rows) {
    const int p = static_cast<int>(parse_long(row[0], path));
    const int r = static_cast<int>(parse_long(row[1], path));
    if (p < 0 || p >= scores.n) throw ParseError(path + ": paper index out of range");
    if (r == -1) continue;  // deficit marker row
    if (r < 0 || r >= scores.m)
      throw ParseError(path + ": reviewer index out of range");
    pairs.emplace_back(r, p);
  }
  std::sort(pairs.begin(), pairs.end());
  if (std::adjacent_find(pairs.begin(), pairs.end()) != pairs.end())
    throw ParseError(path + ": duplicate assignment pair");
  Assignment a = finalize(scores, r_demand, p_cap, std::move(pairs));
  for (int p = 0; p < a.papers; ++p)
    if (a.deficit[p] < 0) throw ParseError(path + ": paper over-assigned");
  for (int r = 0; r < a.reviewers; ++r)
    if (a.reviewer_load[r] > p_cap) throw ParseError(path + ": reviewer over cap");
  return a;
}

}  // namespace robustbid::assign
