#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "robustbid/conference.hpp"
#include "robustbid/corpus_gen.hpp"
#include "robustbid/evalharness.hpp"
#include "robustbid/sparse.hpp"
#include "robustbid/synthgen.hpp"

namespace robustbid::pipeline {

// Single configuration surface for the end-to-end run. Every knob has a
// default tuned for generated desk-scale data; JSON configs may override any
// subset and unknown keys are rejected.
struct PipelineConfig {
  std::string out_dir = "pipeline_out";
  std::uint64_t seed = 1;
  int threads = 1;

  // Corpus stage: load from corpus_path when set, otherwise generate.
  std::string corpus_path;
  corpus_gen::CorpusGenParams corpus;

  // Conference generation (synthgen) parameters.
  synthgen::GenParams conference;

  double hash_ratio = 0.01;
  double lambda = 1.0;
  int u_cap = 60;
  int k = 50;
  int r_demand = 3;
  int p_cap = 6;

  // Screening applied to the pipeline's own assignment.
  int defend_m_d = 1;
  std::string detector = "approx";  // "approx" | "exact"

  // Optional one-off planted attack between training and screening.
  int attack_reviewer = -1;  // -1 disables the stage
  int attack_paper = -1;
  int attack_m_a = 1;
  std::string attack_kind = "whitebox";  // "simple" | "whitebox" | "blackbox"

  // Experiment harness stage.
  bool evaluate = true;
  int eval_n_target_papers = 0;  // 0 = min(400, paper count)
  int eval_per_bin = 10;
  std::vector<int> eval_m_a_list = {1, 2, 3, 4, 5};
  std::vector<int> eval_m_d_list = {1, 2, 3, 4, 5};
  std::vector<long> eval_trim_l_list = {50};
  int eval_trim_max_trials = 25;

  PipelineConfig() {
    // Desk-scale clustering default; the full-sized target of 1000 clusters
    // only makes sense on corpora far larger than the generator's.
    conference.target_clusters = 40;
  }
};

// JSON (de)serialization of the full key set. parse_config rejects unknown
// keys and validates ranges; serialize_config emits every key so that
// parse(serialize(c)) == c and re-serialization is byte-stable.
PipelineConfig parse_config(const std::string& json_text);
PipelineConfig load_config(const std::string& path);
std::string serialize_config(const PipelineConfig& config);

// Harness configuration for the evaluate stage / CLI, mirroring
// ExperimentConfig plus the trimmed-regression removal budgets for table2.
struct EvaluationSpec {
  evalharness::ExperimentConfig config;
  std::vector<long> trim_l_list = {50};
};

EvaluationSpec parse_experiment_config(const std::string& json_text);
EvaluationSpec load_experiment_config(const std::string& path);

// Runs the full experiment protocol and emits fig1.csv (simple attack vs the
// formula rules and the regression rule), fig2.csv (colluding attacks vs the
// regression rule), fig3.csv (detection rates), table1.csv (quality and FPR
// per system) and table2.csv (trimmed-regression comparison) into out_dir.
void run_evaluation(const Conference& conf, const CsrMatrix& X,
                    const EvaluationSpec& spec, const std::string& out_dir);

// Orchestrates generate -> featurize -> train -> (optional attack) -> screen
// -> assign -> evaluate under one seed. Artifacts land in config.out_dir with
// a manifest of parameters and per-file checksums; a stale marker file guards
// partially written output. Returns the reports directory. Errors are
// prefixed with the failing stage's name.
std::string run_pipeline(const PipelineConfig& config);

// Human-readable digest of an emitted reports directory, with the original
// full-scale study's reference values printed alongside for orientation.
std::string emit_report(const std::string& reports_dir);

}  // namespace robustbid::pipeline
