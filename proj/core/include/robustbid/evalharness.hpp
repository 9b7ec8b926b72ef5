#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "robustbid/assign.hpp"
#include "robustbid/attack.hpp"
#include "robustbid/conference.hpp"
#include "robustbid/defense.hpp"
#include "robustbid/scoring.hpp"
#include "robustbid/sparse.hpp"

namespace robustbid::evalharness {

struct ExperimentConfig {
  int n_target_papers = 400;
  int k = 50;              // candidate cutoff
  int bin_threshold = -1;  // rank-bin exclusion threshold; -1 mirrors k, 0 bins all ranks
  int r_demand = 3;
  int p_cap = 6;
  int u_cap = 60;
  double lambda = 1.0;
  std::vector<int> m_a_list = {1, 2, 3, 4, 5};
  std::vector<int> m_d_list = {1, 2, 3, 4, 5};
  int per_bin = 10;
  int trim_max_trials = 25;  // cap on per-trial trimmed refits in comparisons
  std::uint64_t seed = 0;
  int threads = 1;
};

// Inclusive 1-based rank ranges past the exclusion threshold: a width-2 bin
// first, widths doubling after, the last bin truncated at m.
std::vector<std::pair<int, int>> rank_bins(int k, int m);

enum class ScoringRule { kRegression, kNeurips2014, kTpmsOnly };
enum class AttackKind { kSimple, kWhitebox, kBlackbox };

std::string scoring_rule_name(ScoringRule rule);
std::string attack_kind_name(AttackKind kind);

// Everything the experiments need, built once per conference: capped bids,
// their label vector, the trained ridge model and its honest score matrix.
struct PreparedConference {
  const Conference* conf = nullptr;
  const CsrMatrix* X = nullptr;
  BidMatrix capped_bids;
  std::vector<double> y;
  scoring::ScoreModel model;
  scoring::ScoreMatrix honest_scores;
  int u_cap = 0;
};

PreparedConference prepare(const Conference& conf, const CsrMatrix& X,
                           double lambda, int u_cap, std::uint64_t seed);

struct TrialRecord {
  int target_reviewer = 0;
  int target_paper = 0;
  int m_a = 1;
  int bin_index = 0;
  int honest_rank = 0;
  bool honest_success = false;
  bool attack_success = false;
  bool entered_candidates = false;  // post-attack rank moved inside top-k
  attack::AttackPlan plan;
};

struct BinRates {
  std::pair<int, int> bin;
  int trials = 0;
  double honest_rate = 0.0;
  double attack_rate = 0.0;
};

struct AttackExperimentResult {
  ScoringRule rule = ScoringRule::kRegression;
  AttackKind kind = AttackKind::kWhitebox;
  std::vector<int> m_a_list;
  std::vector<std::vector<BinRates>> per_ma;  // aligned with m_a_list
  std::vector<TrialRecord> trials;
};

// Fig. 1/2 protocol: sample target papers, sample attackers from each honest
// rank bin past the cutoff, mount the attack, rescore, reassign inside the
// rule's own top-k candidate set, and record whether any party member lands
// on the target paper. Honest baselines run the same trials with no overlay.
AttackExperimentResult attack_success_experiment(const PreparedConference& prep,
                                                 ScoringRule rule, AttackKind kind,
                                                 const ExperimentConfig& config);

enum class TprPopulation { kSuccessful, kEnteredCandidates };

struct TprCell {
  int m_a = 0, m_d = 0;
  int population = 0;
  int removed = 0;
  double tpr = 0.0;  // NaN when the population is empty
};

// Detection rate of the approximate detector over planted attack trials,
// evaluated on the poisoned labels each trial produced.
std::vector<TprCell> detection_tpr(const PreparedConference& prep,
                                   const std::vector<TrialRecord>& trials,
                                   const std::vector<int>& m_d_list, int k,
                                   TprPopulation population, int threads);

struct FprReport {
  int k = 0;
  std::vector<int> m_d_list;
  std::vector<double> fpr_top5;  // aligned with m_d_list
  std::vector<double> fpr_topk;
  int pairs_top5 = 0;
  int pairs_topk = 0;
};

// Fraction of honest candidate pairs the detector would remove, among the
// top-5 and top-k ranked pairs of each paper.
FprReport detection_fpr(const PreparedConference& prep, int k,
                        const std::vector<int>& m_d_list, int threads);

struct QualityReport {
  int assigned_pairs = 0;
  bool has_averages = false;  // false when nothing is assigned
  double frac_positive_bids = 0.0;
  double avg_bid = 0.0;
  double avg_tpms = 0.0;
  double avg_max_tpms = 0.0;
  int n_under_reviewed = 0;
};

// Bid and expertise statistics of an assignment, measured against the
// conference's raw bids and similarity matrix.
QualityReport assignment_quality(const assign::Assignment& a, const Conference& conf);

struct TrimComparisonRow {
  std::string defense;  // "none" | "filter" | "trim"
  double param = 0.0;   // m_d for filter rows, removed-row budget for trim rows
  QualityReport quality;
  std::vector<double> tpr;  // aligned with the result's m_a_list; NaN = absent
};

struct TrimComparisonResult {
  std::vector<int> m_a_list;
  std::vector<TrimComparisonRow> rows;
};

// Table-2 protocol: honest-pipeline quality plus per-m_a detection rates for
// no defense, the candidate filter at each m_d, and trimmed training at each
// removal budget l. Pass precomputed white-box trials to avoid rerunning the
// attack experiment; they must come from this prep and config.
TrimComparisonResult trim_comparison(const PreparedConference& prep,
                                     const std::vector<long>& l_list,
                                     const std::vector<int>& m_d_list,
                                     const ExperimentConfig& config,
                                     const std::vector<TrialRecord>* whitebox_trials = nullptr);

// CSV emitters. Headers are self-describing; every float is written in
// shortest round-trip form so repeated runs are byte-comparable.
void write_attack_rates_csv(const std::string& path,
                            const std::vector<AttackExperimentResult>& results);
// Each group is a (trial population label, cells) pair; the label becomes
// the first column so several populations can share one file.
void write_tpr_csv(const std::string& path,
                   const std::vector<std::pair<std::string, std::vector<TprCell>>>& groups);
void write_quality_csv(const std::string& path,
                       const std::vector<std::pair<std::string, QualityReport>>& rows);
void write_fpr_csv(const std::string& path, const FprReport& report);
void write_trim_csv(const std::string& path, const TrimComparisonResult& result);

}  // namespace robustbid::evalharness
