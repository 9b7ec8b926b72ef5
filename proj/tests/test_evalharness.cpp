#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "robustbid/conference.hpp"
#include "robustbid/corpus_gen.hpp"
#include "robustbid/errors.hpp"
#include "robustbid/evalharness.hpp"
#include "robustbid/featurize.hpp"
#include "robustbid/synthgen.hpp"
#include "support.hpp"

using namespace robustbid;
using testsupport::TempDir;

namespace {

using Bins = std::vector<std::pair<int, int>>;

// A generated conference plus its features and trained model, kept together
// because PreparedConference holds pointers into both.
struct Fixture {
  Conference conf;
  CsrMatrix X{0, 0};
  evalharness::PreparedConference prep;
};

std::unique_ptr<Fixture> make_fixture(std::uint64_t seed) {
  corpus_gen::CorpusGenParams cp;
  cp.papers = 80;
  cp.authors = 40;
  cp.communities = 2;
  cp.vocab_per_community = 40;
  cp.shared_vocab = 60;
  cp.cites_per_paper = 10;
  cp.seed = seed;
  const Corpus corpus = corpus_gen::generate_corpus(cp);

  synthgen::GenParams gp;
  gp.target_clusters = 6;
  gp.min_cluster_size = 3;
  gp.min_cites = 2;
  gp.max_cites = 10000;
  gp.mu = 8.0;
  gp.beta = 500.0;

  auto f = std::make_unique<Fixture>();
  f->conf = synthgen::generate_conference(corpus, gp, seed);
  const featurize::FeatureInputs inputs = featurize::make_feature_inputs(f->conf);
  const featurize::FeatureSchema schema = featurize::build_schema(inputs, 0.05);
  f->X = featurize::assemble_feature_matrix(inputs, schema);
  f->prep = evalharness::prepare(f->conf, f->X, 1.0, 10, seed);
  return f;
}

evalharness::ExperimentConfig small_config(const Fixture& f) {
  evalharness::ExperimentConfig config;
  config.n_target_papers = std::min(4, f.conf.n());
  config.k = 3;
  config.r_demand = 1;
  config.p_cap = f.conf.n();
  config.u_cap = 10;
  config.m_a_list = {1};
  config.m_d_list = {1};
  config.per_bin = 2;
  config.seed = 9;
  return config;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_SUITE("evalharness") {

TEST_CASE("rank bins double in width and truncate at the reviewer count") {
  CHECK(evalharness::rank_bins(16, 200) ==
        Bins{{17, 18}, {19, 22}, {23, 30}, {31, 46}, {47, 78}, {79, 142}, {143, 200}});
  CHECK(evalharness::rank_bins(0, 200) ==
        Bins{{1, 2}, {3, 6}, {7, 14}, {15, 30}, {31, 62}, {63, 126}, {127, 200}});
  CHECK(evalharness::rank_bins(0, 50) ==
        Bins{{1, 2}, {3, 6}, {7, 14}, {15, 30}, {31, 50}});
  CHECK(evalharness::rank_bins(5, 6) == Bins{{6, 6}});
  CHECK(evalharness::rank_bins(6, 6).empty());
  CHECK(evalharness::rank_bins(10, 6).empty());

  // Bins tile (k, m] contiguously with doubling widths.
  const Bins bins = evalharness::rank_bins(7, 1000);
  int expect_lo = 8, width = 2;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    CHECK(bins[i].first == expect_lo);
    if (i + 1 < bins.size()) CHECK(bins[i].second == expect_lo + width - 1);
    expect_lo += width;
    width *= 2;
  }
  CHECK(bins.back().second == 1000);
}

TEST_CASE("rule and attack names are stable identifiers") {
  CHECK(evalharness::scoring_rule_name(evalharness::ScoringRule::kRegression) ==
        "regression");
  CHECK(evalharness::scoring_rule_name(evalharness::ScoringRule::kNeurips2014) ==
        "composite2014");
  CHECK(evalharness::scoring_rule_name(evalharness::ScoringRule::kTpmsOnly) ==
        "tpms_only");
  CHECK(evalharness::attack_kind_name(evalharness::AttackKind::kSimple) == "simple");
  CHECK(evalharness::attack_kind_name(evalharness::AttackKind::kWhitebox) == "whitebox");
  CHECK(evalharness::attack_kind_name(evalharness::AttackKind::kBlackbox) == "blackbox");
}

TEST_CASE("prepare caps bids, trains, and scores every pair") {
  const auto f = make_fixture(21);
  const evalharness::PreparedConference& prep = f->prep;
  REQUIRE(prep.conf == &f->conf);
  REQUIRE(prep.X == &f->X);
  CHECK(prep.u_cap == 10);
  for (int r = 0; r < f->conf.m(); ++r)
    CHECK(prep.capped_bids.positive_count(r) <= 10);
  CHECK(prep.y == prep.capped_bids.to_labels());

  const scoring::ScoreMatrix direct =
      scoring::predict_scores(f->X, prep.model, f->conf.m(), f->conf.n());
  REQUIRE(prep.honest_scores.s.size() == direct.s.size());
  for (std::size_t i = 0; i < direct.s.size(); ++i)
    CHECK(prep.honest_scores.s[i] == doctest::Approx(direct.s[i]).epsilon(1e-12));
}

TEST_CASE("a party of every reviewer always wins the target paper") {
  const auto f = make_fixture(22);
  evalharness::ExperimentConfig config = small_config(*f);
  config.m_a_list = {f->conf.m()};

  const evalharness::AttackExperimentResult res = evalharness::attack_success_experiment(
      f->prep, evalharness::ScoringRule::kRegression,
      evalharness::AttackKind::kWhitebox, config);
  REQUIRE(res.per_ma.size() == 1);
  bool saw_trials = false;
  for (const auto& bin : res.per_ma[0]) {
    if (bin.trials == 0) continue;
    saw_trials = true;
    // Every reviewer is in the party, so whoever reviews the paper is in it.
    CHECK(bin.attack_rate == 1.0);
    CHECK(bin.honest_rate == 1.0);
  }
  CHECK(saw_trials);
}

TEST_CASE("attackers past the cutoff never win honestly under the regression rule") {
  const auto f = make_fixture(23);
  const evalharness::ExperimentConfig config = small_config(*f);
  const evalharness::AttackExperimentResult res = evalharness::attack_success_experiment(
      f->prep, evalharness::ScoringRule::kRegression,
      evalharness::AttackKind::kWhitebox, config);

  // Rank bins start past the candidate cutoff and every sampled attacker sits
  // outside the top-k, so the honest run cannot assign them.
  const Bins bins = evalharness::rank_bins(config.k, f->conf.m());
  REQUIRE(res.per_ma.size() == 1);
  REQUIRE(res.per_ma[0].size() == bins.size());
  int total_trials = 0;
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const evalharness::BinRates& bin = res.per_ma[0][b];
    CHECK(bin.bin == bins[b]);
    CHECK(bin.honest_rate == 0.0);
    CHECK(bin.attack_rate >= 0.0);
    CHECK(bin.attack_rate <= 1.0);
    CHECK(bin.trials <= config.n_target_papers * config.per_bin);
    total_trials += bin.trials;
  }
  CHECK(static_cast<int>(res.trials.size()) == total_trials);

  for (const auto& t : res.trials) {
    CHECK(t.m_a == 1);
    REQUIRE(t.bin_index >= 0);
    REQUIRE(t.bin_index < static_cast<int>(bins.size()));
    CHECK(t.honest_rank >= bins[t.bin_index].first);
    CHECK(t.honest_rank <= bins[t.bin_index].second);
    CHECK(t.plan.target_reviewer == t.target_reviewer);
    CHECK(t.plan.target_paper == t.target_paper);
    CHECK_FALSE(t.honest_success);
  }
}

TEST_CASE("experiments are deterministic and leave the prepared state alone") {
  const auto f = make_fixture(24);
  const evalharness::ExperimentConfig config = small_config(*f);
  const std::vector<double> scores_before = f->prep.honest_scores.s;
  const std::vector<double> y_before = f->prep.y;

  const evalharness::AttackExperimentResult a = evalharness::attack_success_experiment(
      f->prep, evalharness::ScoringRule::kRegression,
      evalharness::AttackKind::kWhitebox, config);
  const evalharness::AttackExperimentResult b = evalharness::attack_success_experiment(
      f->prep, evalharness::ScoringRule::kRegression,
      evalharness::AttackKind::kWhitebox, config);

  CHECK(f->prep.honest_scores.s == scores_before);
  CHECK(f->prep.y == y_before);
  REQUIRE(a.trials.size() == b.trials.size());
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    CHECK(a.trials[i].target_reviewer == b.trials[i].target_reviewer);
    CHECK(a.trials[i].target_paper == b.trials[i].target_paper);
    CHECK(a.trials[i].attack_success == b.trials[i].attack_success);
  }
  for (std::size_t bi = 0; bi < a.per_ma[0].size(); ++bi) {
    CHECK(a.per_ma[0][bi].attack_rate == b.per_ma[0][bi].attack_rate);
    CHECK(a.per_ma[0][bi].honest_rate == b.per_ma[0][bi].honest_rate);
  }
}

TEST_CASE("simple and black-box attacks run under the composite rule") {
  const auto f = make_fixture(25);
  evalharness::ExperimentConfig config = small_config(*f);
  config.bin_threshold = 0;  // the whole rank range, used by the naive attack

  const evalharness::AttackExperimentResult simple =
      evalharness::attack_success_experiment(f->prep,
                                             evalharness::ScoringRule::kNeurips2014,
                                             evalharness::AttackKind::kSimple, config);
  CHECK(simple.kind == evalharness::AttackKind::kSimple);
  REQUIRE(!simple.per_ma.empty());
  const Bins bins = evalharness::rank_bins(0, f->conf.m());
  REQUIRE(simple.per_ma[0].size() == bins.size());
  for (const auto& t : simple.trials) {
    // The naive attack is a full row replacement: bid 3 on the target only.
    REQUIRE(t.plan.party_bids.size() == 1);
    CHECK(t.plan.party_bids[0].second ==
          attack::BidRow{{t.target_paper, 3}});
  }

  evalharness::ExperimentConfig bb = small_config(*f);
  bb.m_a_list = {2};
  const evalharness::AttackExperimentResult blackbox =
      evalharness::attack_success_experiment(f->prep,
                                             evalharness::ScoringRule::kRegression,
                                             evalharness::AttackKind::kBlackbox, bb);
  for (const auto& t : blackbox.trials) {
    CHECK(t.plan.kind == "blackbox");
    CHECK(t.plan.party_bids.size() == 2);
  }
}

TEST_CASE("detection rates aggregate trials by attacker count") {
  const auto f = make_fixture(26);
  evalharness::ExperimentConfig config = small_config(*f);
  config.m_a_list = {1, 2};
  const evalharness::AttackExperimentResult res = evalharness::attack_success_experiment(
      f->prep, evalharness::ScoringRule::kRegression,
      evalharness::AttackKind::kWhitebox, config);

  const std::vector<int> m_d_list = {0, 1, 2};
  const std::vector<evalharness::TprCell> cells = evalharness::detection_tpr(
      f->prep, res.trials, m_d_list, config.k,
      evalharness::TprPopulation::kEnteredCandidates, 1);

  // One cell per (distinct m_a) x (m_d in list order).
  REQUIRE(cells.size() == 2 * m_d_list.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const evalharness::TprCell& cell = cells[i];
    CHECK(cell.m_a == (i < m_d_list.size() ? 1 : 2));
    CHECK(cell.m_d == m_d_list[i % m_d_list.size()]);
    int expect_pop = 0;
    for (const auto& t : res.trials)
      if (t.m_a == cell.m_a && t.entered_candidates) ++expect_pop;
    CHECK(cell.population == expect_pop);
    CHECK(cell.removed >= 0);
    CHECK(cell.removed <= cell.population);
    if (cell.population > 0) {
      CHECK(cell.tpr ==
            doctest::Approx(static_cast<double>(cell.removed) / cell.population));
      // Budget 0 turns the detector off entirely.
      if (cell.m_d == 0) CHECK(cell.tpr == 0.0);
    } else {
      CHECK(std::isnan(cell.tpr));
    }
  }

  // Same trials, same budgets, more threads: identical cells.
  const std::vector<evalharness::TprCell> again = evalharness::detection_tpr(
      f->prep, res.trials, m_d_list, config.k,
      evalharness::TprPopulation::kEnteredCandidates, 4);
  REQUIRE(again.size() == cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    CHECK(again[i].population == cells[i].population);
    CHECK(again[i].removed == cells[i].removed);
  }
}

TEST_CASE("false positive rates are zero with the detector off") {
  const auto f = make_fixture(27);
  const std::vector<int> m_d_list = {0, 1, 2};
  const evalharness::FprReport rep = evalharness::detection_fpr(f->prep, 5, m_d_list, 1);
  CHECK(rep.k == 5);
  CHECK(rep.m_d_list == m_d_list);
  REQUIRE(rep.fpr_top5.size() == 3);
  REQUIRE(rep.fpr_topk.size() == 3);
  // With k = 5 both pair sets coincide.
  CHECK(rep.pairs_top5 == rep.pairs_topk);
  for (std::size_t i = 0; i < m_d_list.size(); ++i) {
    CHECK(rep.fpr_top5[i] == rep.fpr_topk[i]);
    CHECK(rep.fpr_top5[i] >= 0.0);
    CHECK(rep.fpr_top5[i] <= 1.0);
  }
  CHECK(rep.fpr_top5[0] == 0.0);

  const evalharness::FprReport wide = evalharness::detection_fpr(f->prep, 8, {1}, 1);
  CHECK(wide.pairs_topk == f->conf.n() * 8);
  CHECK(wide.pairs_top5 == f->conf.n() * 5);

  const evalharness::FprReport threaded = evalharness::detection_fpr(f->prep, 8, {1}, 3);
  CHECK(threaded.fpr_top5 == wide.fpr_top5);
  CHECK(threaded.fpr_topk == wide.fpr_topk);
}

TEST_CASE("assignment quality reports bids and expertise of chosen pairs") {
  const auto f = make_fixture(28);
  const Conference& conf = f->conf;

  // Empty assignment: no averages, every paper under-reviewed.
  assign::Assignment empty;
  empty.reviewers = conf.m();
  empty.papers = conf.n();
  empty.r_demand = 2;
  empty.p_cap = 1;
  empty.paper_load.assign(conf.n(), 0);
  empty.reviewer_load.assign(conf.m(), 0);
  empty.deficit.assign(conf.n(), 2);
  const evalharness::QualityReport none = evalharness::assignment_quality(empty, conf);
  CHECK_FALSE(none.has_averages);
  CHECK(none.assigned_pairs == 0);
  CHECK(none.n_under_reviewed == conf.n());

  // Two hand pairs: averages straight from the bid and similarity tables.
  assign::Assignment two = empty;
  two.pairs = {{0, 0}, {1, 1}};
  two.paper_load[0] = two.paper_load[1] = 1;
  two.deficit[0] = two.deficit[1] = 1;
  const evalharness::QualityReport got = evalharness::assignment_quality(two, conf);
  CHECK(got.has_averages);
  CHECK(got.assigned_pairs == 2);
  const int b0 = conf.bids().value_at(0, 0), b1 = conf.bids().value_at(1, 1);
  CHECK(got.avg_bid == doctest::Approx((b0 + b1) / 2.0));
  CHECK(got.frac_positive_bids ==
        doctest::Approx(((b0 > 0 ? 1 : 0) + (b1 > 0 ? 1 : 0)) / 2.0));
  CHECK(got.avg_tpms == doctest::Approx((conf.tpms(0, 0) + conf.tpms(1, 1)) / 2.0));
  CHECK(got.avg_max_tpms == doctest::Approx((conf.tpms(0, 0) + conf.tpms(1, 1)) / 2.0));
  CHECK(got.n_under_reviewed == conf.n());
}

TEST_CASE("defense comparison lists baseline, filter, and trimming rows") {
  const auto f = make_fixture(29);
  evalharness::ExperimentConfig config = small_config(*f);
  config.trim_max_trials = 4;
  const std::vector<long> l_list = {0, 20};
  const std::vector<int> m_d_list = {1};

  const evalharness::TrimComparisonResult res =
      evalharness::trim_comparison(f->prep, l_list, m_d_list, config);
  REQUIRE(res.rows.size() == 1 + m_d_list.size() + l_list.size());
  CHECK(res.rows[0].defense == "none");
  CHECK(res.rows[1].defense == "filter");
  CHECK(res.rows[1].param == 1.0);
  CHECK(res.rows[2].defense == "trim");
  CHECK(res.rows[2].param == 0.0);
  CHECK(res.rows[3].defense == "trim");
  CHECK(res.rows[3].param == 20.0);
  CHECK(res.m_a_list == config.m_a_list);
  for (const auto& row : res.rows) {
    CHECK(row.quality.assigned_pairs > 0);
    REQUIRE(row.tpr.size() == config.m_a_list.size());
    for (double v : row.tpr) {
      if (!std::isnan(v)) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
    }
  }
  // A removal budget of zero cannot detect anything.
  if (!std::isnan(res.rows[2].tpr[0])) CHECK(res.rows[2].tpr[0] == 0.0);
}

TEST_CASE("csv reports are byte-stable across repeated writes") {
  const auto f = make_fixture(30);
  evalharness::ExperimentConfig config = small_config(*f);
  const evalharness::AttackExperimentResult res = evalharness::attack_success_experiment(
      f->prep, evalharness::ScoringRule::kRegression,
      evalharness::AttackKind::kWhitebox, config);
  const std::vector<evalharness::TprCell> cells = evalharness::detection_tpr(
      f->prep, res.trials, {1, 2}, config.k,
      evalharness::TprPopulation::kEnteredCandidates, 1);
  const evalharness::FprReport fpr = evalharness::detection_fpr(f->prep, 5, {1, 2}, 1);
  const assign::Assignment a =
      assign::solve_assignment(f->prep.honest_scores, nullptr, 1, f->conf.n());
  const evalharness::QualityReport q = evalharness::assignment_quality(a, f->conf);

  TempDir tmp;
  for (const char* pass : {"a", "b"}) {
    const std::string tag(pass);
    evalharness::write_attack_rates_csv(tmp.file("rates_" + tag + ".csv"), {res});
    evalharness::write_tpr_csv(tmp.file("tpr_" + tag + ".csv"), {{"entered", cells}});
    evalharness::write_fpr_csv(tmp.file("fpr_" + tag + ".csv"), fpr);
    evalharness::write_quality_csv(tmp.file("quality_" + tag + ".csv"),
                                   {{"regression", q}});
  }
  CHECK(slurp(tmp.file("rates_a.csv")) == slurp(tmp.file("rates_b.csv")));
  CHECK(slurp(tmp.file("tpr_a.csv")) == slurp(tmp.file("tpr_b.csv")));
  CHECK(slurp(tmp.file("fpr_a.csv")) == slurp(tmp.file("fpr_b.csv")));
  CHECK(slurp(tmp.file("quality_a.csv")) == slurp(tmp.file("quality_b.csv")));
  CHECK(!slurp(tmp.file("rates_a.csv")).empty());

  // Headers name the columns.
  const std::string rates = slurp(tmp.file("rates_a.csv"));
  CHECK(rates.find("rule") != std::string::npos);
  CHECK(rates.find("regression") != std::string::npos);
}

}  // TEST_SUITE
