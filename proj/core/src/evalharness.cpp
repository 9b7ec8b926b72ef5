#include "robustbid/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "robustbid/csvio.hpp"
#include "robustbid/errors.hpp"
#include "robustbid/parallel.hpp"
#include "robustbid/rng.hpp"

namespace robustbid::evalharness {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Fixed-order compensated sum, so averages do not drift with thread count.
class KahanSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      carry_ += (sum_ - t) + v;
    else
      carry_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0, carry_ = 0.0;
};

void check_config(const ExperimentConfig& config, int m, int n) {
  if (config.k < 1 || config.k > m)
    throw ParamError("candidate cutoff must be in [1, reviewer count]");
  if (config.bin_threshold < -1 || config.bin_threshold > m)
    throw ParamError("bin threshold must be -1 or in [0, reviewer count]");
  if (config.n_target_papers < 1 || config.n_target_papers > n)
    throw ParamError("target paper count must be in [1, paper count]");
  if (config.per_bin < 1) throw ParamError("per-bin sample count must be positive");
  if (config.r_demand < 1 || config.p_cap < 1)
    throw ParamError("demand and cap must be positive");
  for (int ma : config.m_a_list)
    if (ma < 1 || ma > m) throw ParamError("party size out of range");
  for (int md : config.m_d_list)
    if (md < 0 || md > m) throw ParamError("detector budget out of range");
}

// Per-pair base of the composite rule, so bid overlays only touch the
// affected rows: score = (1 + bid) * base.
std::vector<double> composite_base(const Conference& conf) {
  const int m = conf.m(), n = conf.n();
  std::vector<double> base(static_cast<std::size_t>(m) * n);
  for (int p = 0; p < n; ++p) {
    std::vector<int> subj = conf.paper_subjects(p);
    std::sort(subj.begin(), subj.end());
    for (int r = 0; r < m; ++r) {
      // Reviewer subjects are rank-ordered; sort a copy for the intersection.
      std::vector<int> rs = conf.reviewer_subjects(r);
      std::sort(rs.begin(), rs.end());
      std::vector<int> inter;
      std::set_intersection(subj.begin(), subj.end(), rs.begin(), rs.end(),
                            std::back_inserter(inter));
      const double overlap = static_cast<double>(inter.size()) / 5.0;
      base[static_cast<std::size_t>(r) * n + p] =
          0.5 * conf.tpms(r, p) + 0.5 * overlap + 0.01;
    }
  }
  return base;
}

struct RuleContext {
  ScoringRule rule;
  scoring::ScoreMatrix honest;     // scores with no overlay
  std::vector<double> base;        // composite rule only
};

RuleContext make_rule_context(const PreparedConference& prep, ScoringRule rule) {
  RuleContext ctx;
  ctx.rule = rule;
  switch (rule) {
    case ScoringRule::kRegression:
      ctx.honest = prep.honest_scores;
      break;
    case ScoringRule::kNeurips2014:
      ctx.honest = assign::neurips2014_score(*prep.conf);
      ctx.base = composite_base(*prep.conf);
      break;
    case ScoringRule::kTpmsOnly:
      ctx.honest = assign::tpms_only_score(*prep.conf);
      break;
  }
  return ctx;
}

// Scores after the plan's bid overlay, under the given rule.
scoring::ScoreMatrix poisoned_scores(const PreparedConference& prep,
                                     const RuleContext& ctx,
                                     const attack::AttackPlan& plan) {
  scoring::ScoreMatrix out = ctx.honest;
  const int n = out.n;
  switch (ctx.rule) {
    case ScoringRule::kRegression: {
      const auto delta = attack::plan_label_delta(prep.capped_bids, plan);
      const std::vector<double> shift = scoring::score_shift(*prep.X, prep.model, delta);
      for (std::size_t i = 0; i < out.s.size(); ++i) out.s[i] += shift[i];
      break;
    }
    case ScoringRule::kNeurips2014: {
      for (const auto& [t, row] : plan.party_bids) {
        std::vector<double> bids(n, 0.0);
        for (const auto& [q, b] : row) bids[q] = static_cast<double>(b);
        for (int q = 0; q < n; ++q)
          out.at(t, q) = (1.0 + bids[q]) * ctx.base[static_cast<std::size_t>(t) * n + q];
      }
      break;
    }
    case ScoringRule::kTpmsOnly:
      break;  // bids never enter this rule
  }
  return out;
}

bool any_member_assigned(const std::vector<int>& assigned_reviewers,
                         const std::vector<int>& party) {
  for (int t : party)
    if (std::find(assigned_reviewers.begin(), assigned_reviewers.end(), t) !=
        assigned_reviewers.end())
      return true;
  return false;
}

struct PoisonedPair {
  std::vector<double> column;         // poisoned scores of the target paper
  std::vector<double> contributions;  // per-reviewer influence on the pair
  double pair_score = 0.0;
};

// Column scores and influence contributions for one planted trial, under the
// fixed Hessian: one solve for the label shift, one for the pair.
PoisonedPair poisoned_pair_state(const PreparedConference& prep,
                                 const TrialRecord& trial) {
  const int m = prep.honest_scores.m, n = prep.honest_scores.n;
  const int r = trial.target_reviewer, p = trial.target_paper;
  const auto delta = attack::plan_label_delta(prep.capped_bids, trial.plan);

  PoisonedPair out;
  out.column.resize(m);
  if (delta.empty()) {
    for (int t = 0; t < m; ++t) out.column[t] = prep.honest_scores.at(t, p);
  } else {
    Eigen::VectorXd tvec = Eigen::VectorXd::Zero(prep.X->cols());
    for (const auto& [i, dv] : delta) {
      const auto row = prep.X->row(static_cast<int>(i));
      for (std::size_t k = 0; k < row.len; ++k) tvec[row.col[k]] += dv * row.val[k];
    }
    const Eigen::VectorXd u = prep.model.solve(tvec);
    for (int t = 0; t < m; ++t)
      out.column[t] =
          prep.honest_scores.at(t, p) + prep.X->dot_row(t * n + p, u.data());
  }

  std::vector<double> y_poisoned = prep.y;
  for (const auto& [i, dv] : delta) y_poisoned[i] += dv;
  const Eigen::VectorXd v = prep.model.solve_row(*prep.X, static_cast<long>(r) * n + p);
  out.contributions.assign(m, 0.0);
  for (int t = 0; t < m; ++t) {
    double acc = 0.0;
    for (int q = 0; q < n; ++q) {
      const int i = t * n + q;
      if (y_poisoned[i] != 0.0) acc += y_poisoned[i] * prep.X->dot_row(i, v.data());
    }
    out.contributions[t] = acc;
  }
  out.pair_score = out.column[r];
  return out;
}

int column_rank(const std::vector<double>& column, int r, double value) {
  int rank = 1;
  for (int t = 0; t < static_cast<int>(column.size()); ++t) {
    if (t == r) continue;
    if (column[t] > value || (column[t] == value && t < r)) ++rank;
  }
  return rank;
}

}  // namespace

std::vector<std::pair<int, int>> rank_bins(int k, int m) {
  if (k < 0 || m < 1) throw ParamError("rank bins need k >= 0 and m >= 1");
  std::vector<std::pair<int, int>> bins;
  int lo = k + 1, width = 2;
  while (lo <= m) {
    const int hi = std::min(m, lo + width - 1);
    bins.emplace_back(lo, hi);
    lo = hi + 1;
    width *= 2;
  }
  return bins;
}

std::string scoring_rule_name(ScoringRule rule) {
  switch (rule) {
    case ScoringRule::kRegression: return "regression";
    case ScoringRule::kNeurips2014: return "composite2014";
    case ScoringRule::kTpmsOnly: return "tpms_only";
  }
  return "unknown";
}

std::string attack_kind_name(AttackKind kind) {
  switch (kind) {
    case AttackKind::kSimple: return "simple";
    case AttackKind::kWhitebox: return "whitebox";
    case AttackKind::kBlackbox: return "blackbox";
  }
  return "unknown";
}

PreparedConference prepare(const Conference& conf, const CsrMatrix& X,
                           double lambda, int u_cap, std::uint64_t seed) {
  if (X.rows() != conf.m() * conf.n())
    throw ParamError("feature matrix does not match the conference shape");
  PreparedConference prep;
  prep.conf = &conf;
  prep.X = &X;
  prep.u_cap = u_cap;
  prep.capped_bids = scoring::cap_positive_bids(conf.bids(), u_cap, seed);
  prep.y = prep.capped_bids.to_labels();
  prep.model = scoring::train_ridge(X, prep.y, lambda);
  prep.honest_scores = scoring::predict_scores(X, prep.model, conf.m(), conf.n());
  return prep;
}

AttackExperimentResult attack_success_experiment(const PreparedConference& prep,
                                                 ScoringRule rule, AttackKind kind,
                                                 const ExperimentConfig& config) {
  const Conference& conf = *prep.conf;
  const int m = conf.m(), n = conf.n();
  check_config(config, m, n);

  const RuleContext ctx = make_rule_context(prep, rule);
  const defense::CandidateSet honest_cands =
      defense::build_candidate_set(ctx.honest, config.k);
  const assign::Assignment honest_assignment = assign::solve_assignment(
      ctx.honest, &honest_cands, config.r_demand, config.p_cap);
  const auto honest_by_paper = honest_assignment.reviewers_by_paper();

  const int threshold = config.bin_threshold < 0 ? config.k : config.bin_threshold;
  const auto bins = rank_bins(threshold, m);
  Rng paper_rng(derive_seed(config.seed, "target-papers"));
  std::vector<int> targets =
      paper_rng.sample_without_replacement(n, config.n_target_papers);
  std::sort(targets.begin(), targets.end());

  // One shared (paper, bin) attacker sample reused across every party size.
  struct Slot {
    int paper, bin_index, reviewer, honest_rank;
  };
  std::vector<Slot> slots;
  for (int p : targets) {
    const std::vector<int> order = ctx.honest.column_order(p);
    for (std::size_t b = 0; b < bins.size(); ++b) {
      const auto [lo, hi] = bins[b];
      std::vector<int> eligible(order.begin() + (lo - 1), order.begin() + hi);
      Rng rng(derive_seed(config.seed, "bin-sample", static_cast<std::uint64_t>(p),
                          static_cast<std::uint64_t>(b)));
      const int want = std::min<int>(config.per_bin, static_cast<int>(eligible.size()));
      auto picks = rng.sample_without_replacement(static_cast<int>(eligible.size()), want);
      std::sort(picks.begin(), picks.end());
      for (int idx : picks) {
        const int rank = lo + idx;
        slots.push_back({p, static_cast<int>(b), eligible[idx], rank});
      }
    }
  }

  AttackExperimentResult result;
  result.rule = rule;
  result.kind = kind;
  result.m_a_list = config.m_a_list;
  result.trials.resize(slots.size() * config.m_a_list.size());

  parallel_for(static_cast<int>(result.trials.size()), config.threads, [&](int ti) {
    const Slot& slot = slots[ti % slots.size()];
    const int m_a = config.m_a_list[ti / slots.size()];
    TrialRecord& trial = result.trials[ti];
    trial.target_reviewer = slot.reviewer;
    trial.target_paper = slot.paper;
    trial.m_a = m_a;
    trial.bin_index = slot.bin_index;
    trial.honest_rank = slot.honest_rank;

    switch (kind) {
      case AttackKind::kSimple: {
        trial.plan.kind = "simple";
        trial.plan.target_reviewer = slot.reviewer;
        trial.plan.target_paper = slot.paper;
        trial.plan.party_bids.emplace_back(
            slot.reviewer, attack::simple_blackbox_bids(slot.paper));
        break;
      }
      case AttackKind::kWhitebox:
        trial.plan = attack::whitebox_colluding(*prep.X, prep.model,
                                                prep.capped_bids, slot.reviewer,
                                                slot.paper, m_a, prep.u_cap);
        break;
      case AttackKind::kBlackbox:
        trial.plan = attack::colluding_blackbox(conf, *prep.X, slot.reviewer,
                                                slot.paper, m_a, prep.u_cap);
        break;
    }
    const std::vector<int> party = trial.plan.party();
    trial.honest_success =
        any_member_assigned(honest_by_paper[slot.paper], party);

    const scoring::ScoreMatrix attacked = poisoned_scores(prep, ctx, trial.plan);
    const defense::CandidateSet cands =
        defense::build_candidate_set(attacked, config.k);
    const assign::Assignment assignment =
        assign::solve_assignment(attacked, &cands, config.r_demand, config.p_cap);
    trial.attack_success = any_member_assigned(
        assignment.reviewers_by_paper()[slot.paper], party);
    trial.entered_candidates =
        attacked.rank_of(slot.paper, slot.reviewer) <= config.k;
  });

  // Aggregate per (party size, bin). Counts are integers, so the averages
  // are exact and order-free.
  for (std::size_t ai = 0; ai < config.m_a_list.size(); ++ai) {
    std::vector<BinRates> rates(bins.size());
    for (std::size_t b = 0; b < bins.size(); ++b) rates[b].bin = bins[b];
    for (std::size_t si = 0; si < slots.size(); ++si) {
      const TrialRecord& trial = result.trials[ai * slots.size() + si];
      BinRates& bin = rates[trial.bin_index];
      ++bin.trials;
      bin.honest_rate += trial.honest_success ? 1.0 : 0.0;
      bin.attack_rate += trial.attack_success ? 1.0 : 0.0;
    }
    for (auto& bin : rates) {
      if (bin.trials > 0) {
        bin.honest_rate /= bin.trials;
        bin.attack_rate /= bin.trials;
      } else {
        bin.honest_rate = kNan;
        bin.attack_rate = kNan;
      }
    }
    result.per_ma.push_back(std::move(rates));
  }
  return result;
}

std::vector<TprCell> detection_tpr(const PreparedConference& prep,
                                   const std::vector<TrialRecord>& trials,
                                   const std::vector<int>& m_d_list, int k,
                                   TprPopulation population, int threads) {
  const int m = prep.honest_scores.m;
  for (int md : m_d_list)
    if (md < 0 || md > m) throw ParamError("detector budget out of range");
  if (k < 1 || k > m) throw ParamError("candidate cutoff out of range");

  auto in_population = [&](const TrialRecord& t) {
    return population == TprPopulation::kSuccessful ? t.attack_success
                                                    : t.entered_candidates;
  };

  std::vector<std::vector<char>> removed(trials.size());
  parallel_for(static_cast<int>(trials.size()), threads, [&](int ti) {
    const TrialRecord& trial = trials[ti];
    if (!in_population(trial)) return;
    const PoisonedPair state = poisoned_pair_state(prep, trial);
    const int r = trial.target_reviewer;

    std::vector<int> order;
    order.reserve(state.contributions.size() - 1);
    for (int t = 0; t < static_cast<int>(state.contributions.size()); ++t)
      if (t != r) order.push_back(t);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      if (state.contributions[a] != state.contributions[b])
        return state.contributions[a] > state.contributions[b];
      return a < b;
    });

    removed[ti].resize(m_d_list.size());
    for (std::size_t di = 0; di < m_d_list.size(); ++di) {
      double taken = 0.0;
      if (m_d_list[di] > 0) {
        taken = state.contributions[r];
        for (int j = 0; j < m_d_list[di] - 1; ++j) taken += state.contributions[order[j]];
      }
      const double s_dagger = state.pair_score - taken;
      removed[ti][di] = column_rank(state.column, r, s_dagger) > k ? 1 : 0;
    }
  });

  std::vector<int> ma_values;
  for (const auto& t : trials) ma_values.push_back(t.m_a);
  std::sort(ma_values.begin(), ma_values.end());
  ma_values.erase(std::unique(ma_values.begin(), ma_values.end()), ma_values.end());

  std::vector<TprCell> cells;
  for (int ma : ma_values) {
    for (std::size_t di = 0; di < m_d_list.size(); ++di) {
      TprCell cell;
      cell.m_a = ma;
      cell.m_d = m_d_list[di];
      for (std::size_t ti = 0; ti < trials.size(); ++ti) {
        if (trials[ti].m_a != ma || !in_population(trials[ti])) continue;
        ++cell.population;
        cell.removed += removed[ti][di];
      }
      cell.tpr = cell.population > 0
                     ? static_cast<double>(cell.removed) / cell.population
                     : kNan;
      cells.push_back(cell);
    }
  }
  return cells;
}

FprReport detection_fpr(const PreparedConference& prep, int k,
                        const std::vector<int>& m_d_list, int threads) {
  const int m = prep.honest_scores.m, n = prep.honest_scores.n;
  if (k < 1 || k > m) throw ParamError("candidate cutoff out of range");
  for (int md : m_d_list)
    if (md < 0 || md > m) throw ParamError("detector budget out of range");

  const defense::CandidateSet cands =
      defense::build_candidate_set(prep.honest_scores, k);
  const int top5 = std::min(5, k);

  // removed_flags[p] holds k * |m_d_list| entries in rank-major order.
  std::vector<std::vector<char>> removed_flags(n);
  parallel_for(n, threads, [&](int p) {
    removed_flags[p].assign(static_cast<std::size_t>(k) * m_d_list.size(), 0);
    for (int pos = 0; pos < k; ++pos) {
      const int r = cands.per_paper[p][pos];
      const std::vector<double> c = defense::influence_contributions(
          prep.model, *prep.X, prep.y, m, n, r, p);
      const double score = prep.honest_scores.at(r, p);

      std::vector<int> order;
      order.reserve(m - 1);
      for (int t = 0; t < m; ++t)
        if (t != r) order.push_back(t);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (c[a] != c[b]) return c[a] > c[b];
        return a < b;
      });

      for (std::size_t di = 0; di < m_d_list.size(); ++di) {
        double taken = 0.0;
        if (m_d_list[di] > 0) {
          taken = c[r];
          for (int j = 0; j < m_d_list[di] - 1; ++j) taken += c[order[j]];
        }
        const double s_dagger = score - taken;
        const bool rem = prep.honest_scores.rank_with_value(p, r, s_dagger) > k;
        removed_flags[p][pos * m_d_list.size() + di] = rem ? 1 : 0;
      }
    }
  });

  FprReport report;
  report.k = k;
  report.m_d_list = m_d_list;
  report.pairs_top5 = n * top5;
  report.pairs_topk = n * k;
  for (std::size_t di = 0; di < m_d_list.size(); ++di) {
    long removed5 = 0, removedk = 0;
    for (int p = 0; p < n; ++p) {
      for (int pos = 0; pos < k; ++pos) {
        if (!removed_flags[p][pos * m_d_list.size() + di]) continue;
        ++removedk;
        if (pos < top5) ++removed5;
      }
    }
    report.fpr_top5.push_back(static_cast<double>(removed5) / report.pairs_top5);
    report.fpr_topk.push_back(static_cast<double>(removedk) / report.pairs_topk);
  }
  return report;
}

QualityReport assignment_quality(const assign::Assignment& a, const Conference& conf) {
  QualityReport q;
  q.assigned_pairs = static_cast<int>(a.pairs.size());
  for (int p = 0; p < a.papers; ++p)
    if (a.deficit[p] > 0) ++q.n_under_reviewed;
  if (a.pairs.empty()) return q;

  long positive = 0, bid_total = 0;
  KahanSum tpms_sum;
  for (const auto& [r, p] : a.pairs) {
    const int bid = conf.bids().value_at(r, p);
    if (bid > 0) ++positive;
    bid_total += bid;
    tpms_sum.add(conf.tpms(r, p));
  }
  KahanSum max_tpms_sum;
  int papers_with_reviewers = 0;
  const auto by_paper = a.reviewers_by_paper();
  for (int p = 0; p < a.papers; ++p) {
    if (by_paper[p].empty()) continue;
    double best = 0.0;
    for (int r : by_paper[p]) best = std::max(best, conf.tpms(r, p));
    max_tpms_sum.add(best);
    ++papers_with_reviewers;
  }

  q.has_averages = true;
  q.frac_positive_bids = static_cast<double>(positive) / q.assigned_pairs;
  q.avg_bid = static_cast<double>(bid_total) / q.assigned_pairs;
  q.avg_tpms = tpms_sum.value() / q.assigned_pairs;
  q.avg_max_tpms =
      papers_with_reviewers > 0 ? max_tpms_sum.value() / papers_with_reviewers : 0.0;
  return q;
}

TrimComparisonResult trim_comparison(const PreparedConference& prep,
                                     const std::vector<long>& l_list,
                                     const std::vector<int>& m_d_list,
                                     const ExperimentConfig& config,
                                     const std::vector<TrialRecord>* whitebox_trials) {
  const Conference& conf = *prep.conf;
  const int m = conf.m(), n = conf.n();
  check_config(config, m, n);

  TrimComparisonResult result;
  result.m_a_list = config.m_a_list;
  const std::size_t ma_count = config.m_a_list.size();

  const defense::CandidateSet cands =
      defense::build_candidate_set(prep.honest_scores, config.k);

  {
    TrimComparisonRow row;
    row.defense = "none";
    const assign::Assignment a = assign::solve_assignment(
        prep.honest_scores, &cands, config.r_demand, config.p_cap);
    row.quality = assignment_quality(a, conf);
    row.tpr.assign(ma_count, kNan);
    result.rows.push_back(std::move(row));
  }

  // One shared white-box trial set drives every detection-rate column.
  AttackExperimentResult wb_local;
  if (whitebox_trials == nullptr) {
    wb_local = attack_success_experiment(prep, ScoringRule::kRegression,
                                         AttackKind::kWhitebox, config);
    whitebox_trials = &wb_local.trials;
  }
  const std::vector<TrialRecord>& wb_trials = *whitebox_trials;

  for (int m_d : m_d_list) {
    TrimComparisonRow row;
    row.defense = "filter";
    row.param = m_d;
    const defense::FilterResult filtered =
        defense::filter_candidates(cands, prep.honest_scores, prep.model, *prep.X,
                                   prep.y, defense::Detector::kApprox, m_d,
                                   config.threads);
    const assign::Assignment a = assign::solve_assignment(
        prep.honest_scores, &filtered.pruned, config.r_demand, config.p_cap);
    row.quality = assignment_quality(a, conf);

    const auto cells = detection_tpr(prep, wb_trials, {m_d}, config.k,
                                     TprPopulation::kSuccessful, config.threads);
    row.tpr.assign(ma_count, kNan);
    for (const auto& cell : cells) {
      for (std::size_t ai = 0; ai < ma_count; ++ai)
        if (config.m_a_list[ai] == cell.m_a) row.tpr[ai] = cell.tpr;
    }
    result.rows.push_back(std::move(row));
  }

  for (long l : l_list) {
    TrimComparisonRow row;
    row.defense = "trim";
    row.param = static_cast<double>(l);

    const defense::TrimResult honest_trim =
        defense::trim_fit(*prep.X, prep.y, l, prep.model.lambda());
    const scoring::ScoreMatrix trim_scores =
        scoring::predict_scores(*prep.X, honest_trim.model, m, n);
    defense::CandidateSet trim_cands =
        defense::build_candidate_set(trim_scores, config.k);
    // Trimmed training rows leave the candidate pool as well.
    for (int p = 0; p < n; ++p) {
      auto& col = trim_cands.per_paper[p];
      col.erase(std::remove_if(col.begin(), col.end(),
                               [&](int r) { return !honest_trim.keep[r * n + p]; }),
                col.end());
    }
    const assign::Assignment a = assign::solve_assignment(
        trim_scores, &trim_cands, config.r_demand, config.p_cap);
    row.quality = assignment_quality(a, conf);

    // Detection: refit on each trial's poisoned labels (warm-started from
    // the honest fit) and test whether the planted pair's row is trimmed.
    row.tpr.assign(ma_count, kNan);
    for (std::size_t ai = 0; ai < ma_count; ++ai) {
      const int ma = config.m_a_list[ai];
      int tested = 0, caught = 0;
      for (const auto& trial : wb_trials) {
        if (trial.m_a != ma || !trial.attack_success) continue;
        if (tested >= config.trim_max_trials) break;
        ++tested;
        std::vector<double> y_poisoned = prep.y;
        for (const auto& [i, dv] : attack::plan_label_delta(prep.capped_bids, trial.plan))
          y_poisoned[i] += dv;
        const defense::TrimResult t =
            defense::trim_fit(*prep.X, y_poisoned, l, prep.model.lambda(), 50, 0,
                              &honest_trim.keep);
        const long target_row =
            static_cast<long>(trial.target_reviewer) * n + trial.target_paper;
        if (!t.keep[target_row]) ++caught;
      }
      if (tested > 0) row.tpr[ai] = static_cast<double>(caught) / tested;
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

void write_attack_rates_csv(const std::string& path,
                            const std::vector<AttackExperimentResult>& results) {
  CsvWriter out(path, {"scoring_rule", "attack_kind", "m_a", "bin_lo", "bin_hi",
                       "trials", "honest_rate", "attack_rate"});
  for (const auto& res : results) {
    for (std::size_t ai = 0; ai < res.m_a_list.size(); ++ai) {
      for (const auto& bin : res.per_ma[ai]) {
        out.write_row({scoring_rule_name(res.rule), attack_kind_name(res.kind),
                       std::to_string(res.m_a_list[ai]),
                       std::to_string(bin.bin.first), std::to_string(bin.bin.second),
                       std::to_string(bin.trials), format_double(bin.honest_rate),
                       format_double(bin.attack_rate)});
      }
    }
  }
  out.close();
}

void write_tpr_csv(const std::string& path,
                   const std::vector<std::pair<std::string, std::vector<TprCell>>>& groups) {
  CsvWriter out(path, {"trial_population", "m_a", "m_d", "population", "removed", "tpr"});
  for (const auto& [label, cells] : groups) {
    for (const auto& cell : cells) {
      out.write_row({label, std::to_string(cell.m_a), std::to_string(cell.m_d),
                     std::to_string(cell.population), std::to_string(cell.removed),
                     format_double(cell.tpr)});
    }
  }
  out.close();
}

void write_quality_csv(const std::string& path,
                       const std::vector<std::pair<std::string, QualityReport>>& rows) {
  CsvWriter out(path, {"system", "assigned_pairs", "frac_positive_bids", "avg_bid",
                       "avg_tpms", "avg_max_tpms", "n_under_reviewed"});
  for (const auto& [label, q] : rows) {
    out.write_row({label, std::to_string(q.assigned_pairs),
                   q.has_averages ? format_double(q.frac_positive_bids) : "",
                   q.has_averages ? format_double(q.avg_bid) : "",
                   q.has_averages ? format_double(q.avg_tpms) : "",
                   q.has_averages ? format_double(q.avg_max_tpms) : "",
                   std::to_string(q.n_under_reviewed)});
  }
  out.close();
}

void write_fpr_csv(const std::string& path, const FprReport& report) {
  CsvWriter out(path, {"m_d", "fpr_top5", "fpr_topk", "pairs_top5", "pairs_topk", "k"});
  for (std::size_t i = 0; i < report.m_d_list.size(); ++i) {
    out.write_row({std::to_string(report.m_d_list[i]),
                   format_double(report.fpr_top5[i]), format_double(report.fpr_topk[i]),
                   std::to_string(report.pairs_top5), std::to_string(report.pairs_topk),
                   std::to_string(report.k)});
  }
  out.close();
}

void write_trim_csv(const std::string& path, const TrimComparisonResult& result) {
  std::vector<std::string> header = {"defense", "param", "assigned_pairs",
                                     "frac_positive_bids", "avg_bid", "avg_tpms",
                                     "avg_max_tpms", "n_under_reviewed"};
  for (int ma : result.m_a_list) header.push_back("tpr_ma" + std::to_string(ma));
  CsvWriter out(path, header);
  for (const auto& row : result.rows) {
    std::vector<std::string> fields = {
        row.defense,
        format_double(row.param),
        std::to_string(row.quality.assigned_pairs),
        row.quality.has_averages ? format_double(row.quality.frac_positive_bids) : "",
        row.quality.has_averages ? format_double(row.quality.avg_bid) : "",
        row.quality.has_averages ? format_double(row.quality.avg_tpms) : "",
        row.quality.has_averages ? format_double(row.quality.avg_max_tpms) : "",
        std::to_string(row.quality.n_under_reviewed)};
    for (double tpr : row.tpr) fields.push_back(format_double(tpr));
    out.write_row(fields);
  }
  out.close();
}

}  // namespace robustbid::evalharness
