#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "robustbid/assign.hpp"
#include "robustbid/attack.hpp"
#include "robustbid/conference.hpp"
#include "robustbid/corpus.hpp"
#include "robustbid/corpus_gen.hpp"
#include "robustbid/csvio.hpp"
#include "robustbid/defense.hpp"
#include "robustbid/errors.hpp"
#include "robustbid/evalharness.hpp"
#include "robustbid/featurize.hpp"
#include "robustbid/pipeline.hpp"
#include "robustbid/scoring.hpp"
#include "robustbid/synthgen.hpp"

namespace {

using namespace robustbid;

std::string fixed6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// bids.csv (reviewer_index,paper_index,bid) into a dense-shaped bid matrix.
BidMatrix load_bid_csv(const std::string& path, int m, int n) {
  const CsvFile file = read_csv(path);
  const std::vector<std::string> want = {"reviewer_index", "paper_index", "bid"};
  if (file.header != want) throw ParseError(path + ": expected header reviewer_index,paper_index,bid");
  std::vector<std::vector<std::pair<int, int>>> rows(m);
  for (const auto& row : file.rows) {
    const long r = parse_long(row[0], path);
    const long p = parse_long(row[1], path);
    const long b = parse_long(row[2], path);
    if (r < 0 || r >= m || p < 0 || p >= n)
      throw ParseError(path + ": bid pair out of range");
    if (b < 0 || b > 3) throw ParseError(path + ": bid must be in {0,1,2,3}");
    if (b > 0) rows[r].emplace_back(static_cast<int>(p), static_cast<int>(b));
  }
  BidMatrix bids(m, n);
  for (int r = 0; r < m; ++r) {
    std::sort(rows[r].begin(), rows[r].end());
    bids.set_row(r, rows[r]);
  }
  return bids;
}

std::pair<int, int> parse_target(const std::string& text) {
  const std::size_t comma = text.find(',');
  if (comma == std::string::npos || comma == 0 || comma + 1 >= text.size())
    throw ParamError("--target expects 'reviewer,paper'");
  return {static_cast<int>(parse_long(text.substr(0, comma), "--target")),
          static_cast<int>(parse_long(text.substr(comma + 1), "--target"))};
}

struct GlobalFlags {
  std::uint64_t seed = 1;
  int threads = 1;
  std::string config;
  bool seed_given = false;
  bool threads_given = false;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bid-robust paper scoring, screening and assignment toolkit"};
  app.require_subcommand(1);

  GlobalFlags flags;
  app.add_option("--seed", flags.seed, "master seed for all randomized steps")
      ->capture_default_str();
  app.add_option("--threads", flags.threads, "worker threads for parallel stages")
      ->capture_default_str();
  app.add_option("--config", flags.config, "JSON configuration file");

  // gen-corpus
  auto* gen_corpus = app.add_subcommand("gen-corpus", "generate a synthetic citation corpus");
  corpus_gen::CorpusGenParams corpus_params;
  std::string corpus_out;
  gen_corpus->add_option("--out", corpus_out, "output corpus JSONL path")->required();
  gen_corpus->add_option("--papers", corpus_params.papers)->capture_default_str();
  gen_corpus->add_option("--authors", corpus_params.authors)->capture_default_str();
  gen_corpus->add_option("--communities", corpus_params.communities)->capture_default_str();
  gen_corpus->add_option("--vocab-per-community", corpus_params.vocab_per_community)
      ->capture_default_str();
  gen_corpus->add_option("--shared-vocab", corpus_params.shared_vocab)->capture_default_str();
  gen_corpus->add_option("--title-words", corpus_params.title_words)->capture_default_str();
  gen_corpus->add_option("--abstract-words", corpus_params.abstract_words)
      ->capture_default_str();
  gen_corpus->add_option("--cites-per-paper", corpus_params.cites_per_paper)
      ->capture_default_str();
  gen_corpus->add_option("--cross-rate", corpus_params.cross_community_rate)
      ->capture_default_str();
  gen_corpus->add_option("--year-min", corpus_params.year_min)->capture_default_str();
  gen_corpus->add_option("--year-max", corpus_params.year_max)->capture_default_str();

  // gen-conference
  auto* gen_conf = app.add_subcommand("gen-conference",
                                      "build a bidding conference from a corpus");
  std::string gc_corpus, gc_out;
  synthgen::GenParams gen_params;
  gen_params.target_clusters = 40;
  gen_conf->add_option("--corpus", gc_corpus, "input corpus JSONL")->required();
  gen_conf->add_option("--out", gc_out, "output conference directory")->required();
  gen_conf->add_option("--clusters", gen_params.target_clusters)->capture_default_str();
  gen_conf->add_option("--min-cluster", gen_params.min_cluster_size)->capture_default_str();
  gen_conf->add_option("--min-cites", gen_params.min_cites)->capture_default_str();
  gen_conf->add_option("--max-cites", gen_params.max_cites)->capture_default_str();
  gen_conf->add_option("--icf-cap", gen_params.icf_citation_cap)->capture_default_str();
  gen_conf->add_option("--alpha", gen_params.alpha)->capture_default_str();
  gen_conf->add_option("--mu", gen_params.mu)->capture_default_str();
  gen_conf->add_option("--beta", gen_params.beta)->capture_default_str();
  gen_conf->add_option("--year-min", gen_params.year_min)->capture_default_str();
  gen_conf->add_option("--year-max", gen_params.year_max)->capture_default_str();
  gen_conf->add_option("--target-papers", gen_params.target_papers)->capture_default_str();
  gen_conf->add_option("--target-reviewers", gen_params.target_reviewers)
      ->capture_default_str();

  // featurize
  auto* featurize_cmd = app.add_subcommand("featurize",
                                           "assemble the pair feature matrix");
  std::string fz_conf, fz_out, fz_schema;
  double fz_ratio = 0.01;
  bool fz_csv = false;
  featurize_cmd->add_option("--conference", fz_conf, "conference directory")->required();
  featurize_cmd->add_option("--out", fz_out, "output feature file")->required();
  featurize_cmd->add_option("--schema", fz_schema, "also write the schema JSON here");
  featurize_cmd->add_option("--hash-ratio", fz_ratio)->capture_default_str();
  featurize_cmd->add_flag("--csv", fz_csv, "write triplet CSV instead of binary");

  // train
  auto* train_cmd = app.add_subcommand("train", "fit the ridge scoring model");
  std::string tr_features, tr_bids, tr_model, tr_scores;
  double tr_lambda = 1.0;
  int tr_ucap = 60;
  train_cmd->add_option("--features", tr_features, "feature file")->required();
  train_cmd->add_option("--bids", tr_bids, "bids.csv path")->required();
  train_cmd->add_option("--lambda", tr_lambda)->capture_default_str();
  train_cmd->add_option("--u-cap", tr_ucap, "positive-bid cap per reviewer")
      ->capture_default_str();
  train_cmd->add_option("--out", tr_model, "output model file")->required();
  train_cmd->add_option("--scores", tr_scores, "also write predicted scores CSV here");

  // attack
  auto* attack_cmd = app.add_subcommand("attack", "plan a bid manipulation attack");
  std::string at_conf, at_features, at_model, at_kind = "whitebox", at_target, at_out;
  int at_ma = 1, at_ucap = 60;
  attack_cmd->add_option("--conference", at_conf, "conference directory")->required();
  attack_cmd->add_option("--features", at_features, "feature file")->required();
  attack_cmd->add_option("--model", at_model, "model file (white-box only)");
  attack_cmd->add_option("--kind", at_kind, "simple | whitebox | blackbox")
      ->capture_default_str();
  attack_cmd->add_option("--target", at_target, "'reviewer,paper' indices")->required();
  attack_cmd->add_option("--ma", at_ma, "colluding party size")->capture_default_str();
  attack_cmd->add_option("--u-cap", at_ucap)->capture_default_str();
  attack_cmd->add_option("--out", at_out, "output plan JSON")->required();

  // defend
  auto* defend_cmd = app.add_subcommand("defend", "screen candidate pairs for"
                                                  " disproportionate bid influence");
  std::string df_conf, df_features, df_model, df_scores, df_detector = "approx", df_out;
  int df_md = 1, df_k = 50, df_ucap = 60;
  defend_cmd->add_option("--conference", df_conf, "conference directory")->required();
  defend_cmd->add_option("--features", df_features, "feature file")->required();
  defend_cmd->add_option("--model", df_model, "model file")->required();
  defend_cmd->add_option("--scores", df_scores, "scores CSV")->required();
  defend_cmd->add_option("--md", df_md, "suspected party size")->capture_default_str();
  defend_cmd->add_option("--k", df_k, "candidate cutoff")->capture_default_str();
  defend_cmd->add_option("--detector", df_detector, "approx | exact")
      ->capture_default_str();
  defend_cmd->add_option("--u-cap", df_ucap)->capture_default_str();
  defend_cmd->add_option("--out", df_out, "output verdicts CSV")->required();

  // assign
  auto* assign_cmd = app.add_subcommand("assign", "solve the reviewer assignment");
  std::string as_scores, as_candidates, as_out;
  int as_r = 3, as_p = 6;
  assign_cmd->add_option("--scores", as_scores, "scores CSV")->required();
  assign_cmd->add_option("--candidates", as_candidates,
                         "verdicts CSV restricting eligible pairs");
  assign_cmd->add_option("--r", as_r, "reviewers per paper")->capture_default_str();
  assign_cmd->add_option("--p", as_p, "papers per reviewer")->capture_default_str();
  assign_cmd->add_option("--out", as_out, "output assignment CSV")->required();

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "run the experiment harness");
  std::string ev_conf, ev_features, ev_out;
  eval_cmd->add_option("--conference", ev_conf, "conference directory")->required();
  eval_cmd->add_option("--features", ev_features, "feature file")->required();
  eval_cmd->add_option("--out", ev_out, "reports directory")->required();

  // report
  auto* report_cmd = app.add_subcommand("report", "summarize an emitted reports"
                                                  " directory");
  std::string rp_dir;
  report_cmd->add_option("--reports", rp_dir, "reports directory")->required();

  // pipeline
  auto* pipeline_cmd = app.add_subcommand("pipeline", "run every stage end to end");
  std::string pl_out;
  pipeline_cmd->add_option("--out", pl_out, "override the configured output directory");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
    flags.seed_given = app.count("--seed") > 0;
    flags.threads_given = app.count("--threads") > 0;
    if (flags.threads < 1) throw ParamError("--threads must be at least 1");

    if (gen_corpus->parsed()) {
      corpus_params.seed = flags.seed;
      const Corpus corpus = corpus_gen::generate_corpus(corpus_params);
      save_corpus(corpus, corpus_out);
      std::cout << "wrote " << corpus.size() << " papers to " << corpus_out << "\n";
    } else if (gen_conf->parsed()) {
      const Corpus corpus = load_corpus(gc_corpus);
      const Conference conf = synthgen::generate_conference(corpus, gen_params, flags.seed);
      save_conference(conf, gc_out);
      const synthgen::ClusterResult clusters = synthgen::cluster_subject_areas(
          corpus, gen_params.target_clusters, gen_params.min_cluster_size);
      CsvWriter cw(gc_out + "/clusters.csv", {"cluster_id", "paper_id"});
      for (std::size_t c = 0; c < clusters.clusters.size(); ++c)
        for (int paper : clusters.clusters[c])
          cw.write_row({std::to_string(c), corpus.paper(paper).paper_id});
      cw.close();
      std::cout << "conference with " << conf.m() << " reviewers x " << conf.n()
                << " papers in " << gc_out << "\n";
    } else if (featurize_cmd->parsed()) {
      const Conference conf = load_conference(fz_conf);
      const featurize::FeatureInputs inputs = featurize::make_feature_inputs(conf);
      const featurize::FeatureSchema schema = featurize::build_schema(inputs, fz_ratio);
      featurize::FeatureFile file;
      file.m = conf.m();
      file.n = conf.n();
      file.matrix = featurize::assemble_feature_matrix(inputs, schema);
      featurize::save_features(file, fz_out, fz_csv);
      if (!fz_schema.empty()) featurize::save_schema(schema, fz_schema);
      std::cout << "feature matrix " << file.matrix.rows() << " x "
                << file.matrix.cols() << " written to " << fz_out << "\n";
    } else if (train_cmd->parsed()) {
      const featurize::FeatureFile file = featurize::load_features(tr_features);
      const BidMatrix bids = load_bid_csv(tr_bids, file.m, file.n);
      const BidMatrix capped = scoring::cap_positive_bids(bids, tr_ucap, flags.seed);
      const scoring::ScoreModel model =
          scoring::train_ridge(file.matrix, capped.to_labels(), tr_lambda);
      scoring::save_model(model, tr_model);
      if (!tr_scores.empty())
        scoring::save_scores(
            scoring::predict_scores(file.matrix, model, file.m, file.n), tr_scores);
      std::cout << "trained d=" << model.dim() << " lambda=" << fixed6(model.lambda())
                << " model written to " << tr_model << "\n";
    } else if (attack_cmd->parsed()) {
      const auto [target_r, target_p] = parse_target(at_target);
      const Conference conf = load_conference(at_conf);
      const featurize::FeatureFile file = featurize::load_features(at_features);
      attack::AttackPlan plan;
      if (at_kind == "simple") {
        if (target_r < 0 || target_r >= conf.m() || target_p < 0 || target_p >= conf.n())
          throw ParamError("attack target is outside the conference");
        plan.kind = "simple";
        plan.target_reviewer = target_r;
        plan.target_paper = target_p;
        plan.party_bids.emplace_back(target_r, attack::simple_blackbox_bids(target_p));
      } else if (at_kind == "whitebox") {
        if (at_model.empty()) throw ParamError("--model is required for --kind whitebox");
        const scoring::ScoreModel model = scoring::load_model(at_model);
        const BidMatrix capped =
            scoring::cap_positive_bids(conf.bids(), at_ucap, flags.seed);
        plan = attack::whitebox_colluding(file.matrix, model, capped, target_r,
                                          target_p, at_ma, at_ucap);
      } else if (at_kind == "blackbox") {
        plan = attack::colluding_blackbox(conf, file.matrix, target_r, target_p,
                                          at_ma, at_ucap);
      } else {
        throw ParamError("--kind must be simple, whitebox or blackbox");
      }
      attack::save_plan(plan, at_out);
      std::cout << "plan kind=" << plan.kind << " party_size="
                << plan.party_bids.size() << " predicted_gain="
                << fixed6(plan.predicted_gain) << " written to " << at_out << "\n";
    } else if (defend_cmd->parsed()) {
      const Conference conf = load_conference(df_conf);
      const featurize::FeatureFile file = featurize::load_features(df_features);
      const scoring::ScoreModel model = scoring::load_model(df_model);
      const scoring::ScoreMatrix scores = scoring::load_scores(df_scores);
      if (df_detector != "approx" && df_detector != "exact")
        throw ParamError("--detector must be approx or exact");
      const BidMatrix capped =
          scoring::cap_positive_bids(conf.bids(), df_ucap, flags.seed);
      const defense::CandidateSet cands = defense::build_candidate_set(scores, df_k);
      const defense::FilterResult result = defense::filter_candidates(
          cands, scores, model, file.matrix, capped.to_labels(),
          df_detector == "exact" ? defense::Detector::kExact
                                 : defense::Detector::kApprox,
          df_md, flags.threads);
      defense::save_verdicts(result.verdicts, df_out);
      long removed = 0;
      for (const auto& v : result.verdicts) removed += v.removed ? 1 : 0;
      std::cout << "screened " << result.verdicts.size() << " pairs, removed "
                << removed << ", verdicts written to " << df_out << "\n";
    } else if (assign_cmd->parsed()) {
      const scoring::ScoreMatrix scores = scoring::load_scores(as_scores);
      defense::CandidateSet cands;
      const bool restricted = !as_candidates.empty();
      if (restricted) {
        const auto verdicts = defense::load_verdicts(as_candidates);
        cands.per_paper.assign(scores.n, {});
        for (const auto& v : verdicts) {
          if (v.paper < 0 || v.paper >= scores.n || v.reviewer < 0 ||
              v.reviewer >= scores.m)
            throw ParseError(as_candidates + ": verdict outside the score matrix");
          if (!v.removed) cands.per_paper[v.paper].push_back(v.reviewer);
        }
        for (auto& col : cands.per_paper) {
          std::sort(col.begin(), col.end(), [&](int a, int b) { return a < b; });
          cands.k = std::max(cands.k, static_cast<int>(col.size()));
        }
      }
      const assign::Assignment a = assign::solve_assignment(
          scores, restricted ? &cands : nullptr, as_r, as_p);
      assign::save_assignment(a, as_out);
      std::cout << "assigned " << a.pairs.size() << " pairs, total_score="
                << fixed6(a.total_score) << ", unmet_demand=" << a.total_deficit()
                << ", written to " << as_out << "\n";
    } else if (eval_cmd->parsed()) {
      const Conference conf = load_conference(ev_conf);
      const featurize::FeatureFile file = featurize::load_features(ev_features);
      pipeline::EvaluationSpec spec;
      if (!flags.config.empty()) spec = pipeline::load_experiment_config(flags.config);
      if (flags.seed_given || flags.config.empty()) spec.config.seed = flags.seed;
      if (flags.threads_given || flags.config.empty())
        spec.config.threads = flags.threads;
      pipeline::run_evaluation(conf, file.matrix, spec, ev_out);
      std::cout << "reports written to " << ev_out << "\n";
    } else if (report_cmd->parsed()) {
      std::cout << pipeline::emit_report(rp_dir);
    } else if (pipeline_cmd->parsed()) {
      pipeline::PipelineConfig config;
      if (!flags.config.empty()) config = pipeline::load_config(flags.config);
      if (flags.seed_given || flags.config.empty()) {
        config.seed = flags.seed;
        config.corpus.seed = flags.seed;
      }
      if (flags.threads_given || flags.config.empty()) config.threads = flags.threads;
      if (!pl_out.empty()) config.out_dir = pl_out;
      const std::string reports = pipeline::run_pipeline(config);
      std::cout << "reports written to " << reports << "\n";
      std::cout << pipeline::emit_report(reports);
    }
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // bad command line usage is a parameter error
  } catch (const ParamError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
