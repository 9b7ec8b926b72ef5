#include "robustbid/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "robustbid/assign.hpp"
#include "robustbid/attack.hpp"
#include "robustbid/csvio.hpp"
#include "robustbid/defense.hpp"
#include "robustbid/errors.hpp"
#include "robustbid/featurize.hpp"
#include "robustbid/hashing.hpp"
#include "robustbid/scoring.hpp"

namespace robustbid::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Tracks which keys a config object consumed so leftovers can be rejected.
class KeyReader {
 public:
  explicit KeyReader(const json& obj, std::string label)
      : obj_(obj), label_(std::move(label)) {
    if (!obj.is_object()) throw ParamError(label_ + ": expected a JSON object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  template <typename T, typename Pred>
  void read(const std::string& key, T& out, Pred check, const char* what) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!check(v)) throw ParamError(label_ + ": key '" + key + "' must be " + what);
    out = v.get<T>();
  }

  void read_int(const std::string& key, int& out) {
    read<int>(key, out, [](const json& v) { return v.is_number_integer(); },
              "an integer");
  }
  void read_long(const std::string& key, long& out) {
    read<long>(key, out, [](const json& v) { return v.is_number_integer(); },
               "an integer");
  }
  void read_u64(const std::string& key, std::uint64_t& out) {
    read<std::uint64_t>(
        key, out,
        [](const json& v) { return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0); },
        "a non-negative integer");
  }
  void read_double(const std::string& key, double& out) {
    read<double>(key, out, [](const json& v) { return v.is_number(); }, "a number");
  }
  void read_bool(const std::string& key, bool& out) {
    read<bool>(key, out, [](const json& v) { return v.is_boolean(); }, "a boolean");
  }
  void read_string(const std::string& key, std::string& out) {
    read<std::string>(key, out, [](const json& v) { return v.is_string(); },
                      "a string");
  }
  void read_int_list(const std::string& key, std::vector<int>& out) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_array()) throw ParamError(label_ + ": key '" + key + "' must be an array");
    out.clear();
    for (const json& e : v) {
      if (!e.is_number_integer())
        throw ParamError(label_ + ": key '" + key + "' must hold integers");
      out.push_back(e.get<int>());
    }
  }
  void read_long_list(const std::string& key, std::vector<long>& out) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_array()) throw ParamError(label_ + ": key '" + key + "' must be an array");
    out.clear();
    for (const json& e : v) {
      if (!e.is_number_integer())
        throw ParamError(label_ + ": key '" + key + "' must hold integers");
      out.push_back(e.get<long>());
    }
  }

  void reject_unknown() const {
    for (const auto& [key, value] : obj_.items()) {
      (void)value;
      if (!seen_.count(key)) throw ParamError(label_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& obj_;
  std::string label_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ParamError(message);
}

void validate_config(const PipelineConfig& c) {
  require(!c.out_dir.empty(), "out_dir must not be empty");
  require(c.threads >= 1, "threads must be at least 1");
  require(c.hash_ratio > 0.0 && c.hash_ratio <= 1.0, "hash_ratio must be in (0, 1]");
  require(c.lambda > 0.0, "lambda must be positive");
  require(c.u_cap >= 1, "u_cap must be at least 1");
  require(c.k >= 1, "k must be at least 1");
  require(c.r_demand >= 1, "r_demand must be at least 1");
  require(c.p_cap >= 1, "p_cap must be at least 1");
  require(c.defend_m_d >= 1, "defend_m_d must be at least 1");
  require(c.detector == "approx" || c.detector == "exact",
          "detector must be 'approx' or 'exact'");
  require(c.attack_kind == "simple" || c.attack_kind == "whitebox" ||
              c.attack_kind == "blackbox",
          "attack_kind must be 'simple', 'whitebox' or 'blackbox'");
  require(c.attack_m_a >= 1, "attack_m_a must be at least 1");
  require(c.conference.alpha > 0.0, "alpha must be positive");
  require(c.conference.mu > 0.0, "mu must be positive");
  require(c.conference.beta > 0.0, "beta must be positive");
  require(c.conference.target_clusters >= 1, "target_clusters must be at least 1");
  require(c.conference.min_cluster_size >= 1, "min_cluster_size must be at least 1");
  require(c.conference.min_cites >= 0 && c.conference.min_cites <= c.conference.max_cites,
          "min_cites must lie in [0, max_cites]");
  require(c.conference.target_papers >= 0 && c.conference.target_reviewers >= 0,
          "subsample targets must be non-negative");
  if (c.conference.target_reviewers > 0)
    require(c.k <= c.conference.target_reviewers,
            "candidate cutoff k exceeds the target reviewer count");
  require(c.eval_per_bin >= 1, "eval_per_bin must be at least 1");
  require(c.eval_trim_max_trials >= 0, "eval_trim_max_trials must be non-negative");
  require(c.eval_n_target_papers >= 0, "eval_n_target_papers must be non-negative");
  if (c.evaluate) {
    require(!c.eval_m_a_list.empty(), "eval_m_a_list must not be empty");
    require(!c.eval_m_d_list.empty(), "eval_m_d_list must not be empty");
  }
  for (int v : c.eval_m_a_list) require(v >= 1, "eval_m_a_list entries must be positive");
  for (int v : c.eval_m_d_list) require(v >= 1, "eval_m_d_list entries must be positive");
  for (long v : c.eval_trim_l_list)
    require(v >= 0, "eval_trim_l_list entries must be non-negative");
}

// Six decimals for every number a human reads; CSVs keep round-trip form.
std::string fixed6(double v) {
  if (!std::isfinite(v)) return "absent";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string field6(const std::string& raw) {
  if (raw.empty()) return "absent";
  return fixed6(parse_double(raw, "report field"));
}

template <typename Fn>
void run_stage(const char* name, Fn&& fn) {
  try {
    fn();
  } catch (const ParamError& e) {
    throw ParamError(std::string(name) + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(name) + ": " + e.what());
  }
}

int column_of(const CsvFile& file, const std::string& name) {
  for (std::size_t i = 0; i < file.header.size(); ++i)
    if (file.header[i] == name) return static_cast<int>(i);
  throw ParseError("report is missing column '" + name + "'");
}

}  // namespace

PipelineConfig parse_config(const std::string& json_text) {
  json obj;
  try {
    obj = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  PipelineConfig c;
  KeyReader r(obj, "config");
  r.read_string("out_dir", c.out_dir);
  r.read_u64("seed", c.seed);
  r.read_int("threads", c.threads);
  r.read_string("corpus_path", c.corpus_path);
  r.read_int("corpus_papers", c.corpus.papers);
  r.read_int("corpus_authors", c.corpus.authors);
  r.read_int("corpus_communities", c.corpus.communities);
  r.read_int("corpus_vocab_per_community", c.corpus.vocab_per_community);
  r.read_int("corpus_shared_vocab", c.corpus.shared_vocab);
  r.read_int("corpus_title_words", c.corpus.title_words);
  r.read_int("corpus_abstract_words", c.corpus.abstract_words);
  r.read_int("corpus_cites_per_paper", c.corpus.cites_per_paper);
  r.read_double("corpus_cross_community_rate", c.corpus.cross_community_rate);
  r.read_int("corpus_year_min", c.corpus.year_min);
  r.read_int("corpus_year_max", c.corpus.year_max);
  r.read_int("target_clusters", c.conference.target_clusters);
  r.read_int("min_cluster_size", c.conference.min_cluster_size);
  r.read_int("min_cites", c.conference.min_cites);
  r.read_int("max_cites", c.conference.max_cites);
  r.read_int("icf_citation_cap", c.conference.icf_citation_cap);
  r.read_double("alpha", c.conference.alpha);
  r.read_double("mu", c.conference.mu);
  r.read_double("beta", c.conference.beta);
  r.read_int("year_min", c.conference.year_min);
  r.read_int("year_max", c.conference.year_max);
  r.read_int("target_papers", c.conference.target_papers);
  r.read_int("target_reviewers", c.conference.target_reviewers);
  r.read_double("hash_ratio", c.hash_ratio);
  r.read_double("lambda", c.lambda);
  r.read_int("u_cap", c.u_cap);
  r.read_int("k", c.k);
  r.read_int("r_demand", c.r_demand);
  r.read_int("p_cap", c.p_cap);
  r.read_int("defend_m_d", c.defend_m_d);
  r.read_string("detector", c.detector);
  r.read_int("attack_reviewer", c.attack_reviewer);
  r.read_int("attack_paper", c.attack_paper);
  r.read_int("attack_m_a", c.attack_m_a);
  r.read_string("attack_kind", c.attack_kind);
  r.read_bool("evaluate", c.evaluate);
  r.read_int("eval_n_target_papers", c.eval_n_target_papers);
  r.read_int("eval_per_bin", c.eval_per_bin);
  r.read_int_list("eval_m_a_list", c.eval_m_a_list);
  r.read_int_list("eval_m_d_list", c.eval_m_d_list);
  r.read_long_list("eval_trim_l_list", c.eval_trim_l_list);
  r.read_int("eval_trim_max_trials", c.eval_trim_max_trials);
  r.reject_unknown();
  c.corpus.seed = c.seed;  // one master seed governs everything
  validate_config(c);
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const PipelineConfig& c) {
  json j;
  j["out_dir"] = c.out_dir;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["corpus_path"] = c.corpus_path;
  j["corpus_papers"] = c.corpus.papers;
  j["corpus_authors"] = c.corpus.authors;
  j["corpus_communities"] = c.corpus.communities;
  j["corpus_vocab_per_community"] = c.corpus.vocab_per_community;
  j["corpus_shared_vocab"] = c.corpus.shared_vocab;
  j["corpus_title_words"] = c.corpus.title_words;
  j["corpus_abstract_words"] = c.corpus.abstract_words;
  j["corpus_cites_per_paper"] = c.corpus.cites_per_paper;
  j["corpus_cross_community_rate"] = c.corpus.cross_community_rate;
  j["corpus_year_min"] = c.corpus.year_min;
  j["corpus_year_max"] = c.corpus.year_max;
  j["target_clusters"] = c.conference.target_clusters;
  j["min_cluster_size"] = c.conference.min_cluster_size;
  j["min_cites"] = c.conference.min_cites;
  j["max_cites"] = c.conference.max_cites;
  j["icf_citation_cap"] = c.conference.icf_citation_cap;
  j["alpha"] = c.conference.alpha;
  j["mu"] = c.conference.mu;
  j["beta"] = c.conference.beta;
  j["year_min"] = c.conference.year_min;
  j["year_max"] = c.conference.year_max;
  j["target_papers"] = c.conference.target_papers;
  j["target_reviewers"] = c.conference.target_reviewers;
  j["hash_ratio"] = c.hash_ratio;
  j["lambda"] = c.lambda;
  j["u_cap"] = c.u_cap;
  j["k"] = c.k;
  j["r_demand"] = c.r_demand;
  j["p_cap"] = c.p_cap;
  j["defend_m_d"] = c.defend_m_d;
  j["detector"] = c.detector;
  j["attack_reviewer"] = c.attack_reviewer;
  j["attack_paper"] = c.attack_paper;
  j["attack_m_a"] = c.attack_m_a;
  j["attack_kind"] = c.attack_kind;
  j["evaluate"] = c.evaluate;
  j["eval_n_target_papers"] = c.eval_n_target_papers;
  j["eval_per_bin"] = c.eval_per_bin;
  j["eval_m_a_list"] = c.eval_m_a_list;
  j["eval_m_d_list"] = c.eval_m_d_list;
  j["eval_trim_l_list"] = c.eval_trim_l_list;
  j["eval_trim_max_trials"] = c.eval_trim_max_trials;
  return j.dump(2) + "\n";
}

EvaluationSpec parse_experiment_config(const std::string& json_text) {
  json obj;
  try {
    obj = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("experiment config: ") + e.what());
  }
  EvaluationSpec spec;
  KeyReader r(obj, "experiment config");
  r.read_int("n_target_papers", spec.config.n_target_papers);
  r.read_int("k", spec.config.k);
  r.read_int("bin_threshold", spec.config.bin_threshold);
  r.read_int("r_demand", spec.config.r_demand);
  r.read_int("p_cap", spec.config.p_cap);
  r.read_int("u_cap", spec.config.u_cap);
  r.read_double("lambda", spec.config.lambda);
  r.read_int_list("m_a_list", spec.config.m_a_list);
  r.read_int_list("m_d_list", spec.config.m_d_list);
  r.read_int("per_bin", spec.config.per_bin);
  r.read_int("trim_max_trials", spec.config.trim_max_trials);
  r.read_u64("seed", spec.config.seed);
  r.read_int("threads", spec.config.threads);
  r.read_long_list("trim_l_list", spec.trim_l_list);
  r.reject_unknown();
  require(spec.config.lambda > 0.0, "lambda must be positive");
  require(spec.config.u_cap >= 1, "u_cap must be at least 1");
  require(spec.config.threads >= 1, "threads must be at least 1");
  for (long v : spec.trim_l_list)
    require(v >= 0, "trim_l_list entries must be non-negative");
  return spec;
}

EvaluationSpec load_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open experiment config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

void run_evaluation(const Conference& conf, const CsrMatrix& X,
                    const EvaluationSpec& spec, const std::string& out_dir) {
  using namespace evalharness;
  fs::create_directories(out_dir);
  const auto path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };

  PreparedConference prep =
      prepare(conf, X, spec.config.lambda, spec.config.u_cap, spec.config.seed);

  // fig1: the single-reviewer row-replacement attack, binned over the whole
  // rank range, against a formula rule and the regression rule.
  ExperimentConfig single = spec.config;
  single.m_a_list = {1};
  single.bin_threshold = 0;
  std::vector<AttackExperimentResult> fig1;
  fig1.push_back(attack_success_experiment(prep, ScoringRule::kNeurips2014,
                                           AttackKind::kSimple, single));
  fig1.push_back(attack_success_experiment(prep, ScoringRule::kRegression,
                                           AttackKind::kSimple, single));
  write_attack_rates_csv(path("fig1.csv"), fig1);

  // fig2: colluding attacks against the regression rule, beyond-cutoff bins.
  std::vector<AttackExperimentResult> fig2;
  fig2.push_back(attack_success_experiment(prep, ScoringRule::kRegression,
                                           AttackKind::kWhitebox, spec.config));
  fig2.push_back(attack_success_experiment(prep, ScoringRule::kRegression,
                                           AttackKind::kBlackbox, spec.config));
  const AttackExperimentResult& whitebox = fig2.front();
  write_attack_rates_csv(path("fig2.csv"), fig2);

  // fig3: detection rates over the white-box trials, for both trial
  // populations of interest.
  write_tpr_csv(
      path("fig3.csv"),
      {{"successful",
        detection_tpr(prep, whitebox.trials, spec.config.m_d_list, spec.config.k,
                      TprPopulation::kSuccessful, spec.config.threads)},
       {"candidate_entrants",
        detection_tpr(prep, whitebox.trials, spec.config.m_d_list, spec.config.k,
                      TprPopulation::kEnteredCandidates, spec.config.threads)}});

  // table1: assignment quality per scoring system, plus screening FPR per
  // detector budget.
  const FprReport fpr =
      detection_fpr(prep, spec.config.k, spec.config.m_d_list, spec.config.threads);
  CsvWriter t1(path("table1.csv"),
               {"system", "m_d", "assigned_pairs", "frac_positive_bids", "avg_bid",
                "avg_tpms", "avg_max_tpms", "n_under_reviewed", "fpr_top5", "fpr_topk"});
  const auto emit_row = [&](const std::string& system, const std::string& m_d,
                            const QualityReport& q, const std::string& fpr5,
                            const std::string& fprk) {
    t1.write_row({system, m_d, std::to_string(q.assigned_pairs),
                  q.has_averages ? format_double(q.frac_positive_bids) : "",
                  q.has_averages ? format_double(q.avg_bid) : "",
                  q.has_averages ? format_double(q.avg_tpms) : "",
                  q.has_averages ? format_double(q.avg_max_tpms) : "",
                  std::to_string(q.n_under_reviewed), fpr5, fprk});
  };
  const auto quality_of = [&](const scoring::ScoreMatrix& scores,
                              const defense::CandidateSet& cands) {
    const assign::Assignment a =
        assign::solve_assignment(scores, &cands, spec.config.r_demand, spec.config.p_cap);
    return assignment_quality(a, conf);
  };
  {
    const scoring::ScoreMatrix s2014 = assign::neurips2014_score(conf);
    emit_row("neurips2014_standin", "",
             quality_of(s2014, defense::build_candidate_set(s2014, spec.config.k)), "",
             "");
    const scoring::ScoreMatrix tpms = assign::tpms_only_score(conf);
    emit_row("tpms_only", "",
             quality_of(tpms, defense::build_candidate_set(tpms, spec.config.k)), "", "");
    const defense::CandidateSet cands =
        defense::build_candidate_set(prep.honest_scores, spec.config.k);
    emit_row("regression", "0", quality_of(prep.honest_scores, cands), "", "");
    for (std::size_t di = 0; di < spec.config.m_d_list.size(); ++di) {
      const int m_d = spec.config.m_d_list[di];
      const defense::FilterResult filtered = defense::filter_candidates(
          cands, prep.honest_scores, prep.model, X, prep.y,
          defense::Detector::kApprox, m_d, spec.config.threads);
      emit_row("regression_screened", std::to_string(m_d),
               quality_of(prep.honest_scores, filtered.pruned),
               format_double(fpr.fpr_top5[di]), format_double(fpr.fpr_topk[di]));
    }
  }
  t1.close();

  // table2: trimmed-regression comparison, reusing the white-box trials.
  write_trim_csv(path("table2.csv"),
                 trim_comparison(prep, spec.trim_l_list, spec.config.m_d_list,
                                 spec.config, &whitebox.trials));
}

std::string run_pipeline(const PipelineConfig& config) {
  validate_config(config);
  const fs::path out(config.out_dir);
  fs::create_directories(out);
  const fs::path stale_path = out / "STALE";
  {
    std::ofstream stale(stale_path, std::ios::binary);
    stale << "incomplete run: artifacts in this directory may be partial\n";
    if (!stale) throw std::runtime_error("cannot write " + stale_path.string());
  }

  std::vector<std::string> artifacts;
  const auto track = [&](const std::string& rel) { artifacts.push_back(rel); };

  Corpus corpus({});
  run_stage("gen-corpus", [&] {
    if (!config.corpus_path.empty()) {
      corpus = load_corpus(config.corpus_path);
    } else {
      corpus_gen::CorpusGenParams params = config.corpus;
      params.seed = config.seed;
      corpus = corpus_gen::generate_corpus(params);
    }
    save_corpus(corpus, (out / "corpus.jsonl").string());
    track("corpus.jsonl");
  });

  Conference conf;
  run_stage("gen-conference", [&] {
    conf = synthgen::generate_conference(corpus, config.conference, config.seed);
    if (config.k > conf.m())
      throw ParamError("candidate cutoff k=" + std::to_string(config.k) +
                       " exceeds the reviewer count m=" + std::to_string(conf.m()));
    if (config.attack_reviewer >= conf.m() || config.attack_paper >= conf.n())
      throw ParamError("attack target is outside the conference");
    save_conference(conf, (out / "conference").string());
    for (const char* name : {"papers.jsonl", "reviewers.jsonl", "paper_subjects.csv",
                             "tpms.csv", "bids.csv", "manifest.json"})
      track(std::string("conference/") + name);
  });

  featurize::FeatureSchema schema;
  CsrMatrix X;
  run_stage("featurize", [&] {
    const featurize::FeatureInputs inputs = featurize::make_feature_inputs(conf);
    schema = featurize::build_schema(inputs, config.hash_ratio);
    X = featurize::assemble_feature_matrix(inputs, schema);
    featurize::save_schema(schema, (out / "schema.json").string());
    featurize::FeatureFile file;
    file.m = conf.m();
    file.n = conf.n();
    file.matrix = X;
    featurize::save_features(file, (out / "features.bin").string());
    track("schema.json");
    track("features.bin");
  });

  evalharness::PreparedConference prep;
  run_stage("train", [&] {
    prep = evalharness::prepare(conf, X, config.lambda, config.u_cap, config.seed);
    scoring::save_model(prep.model, (out / "model.bin").string());
    scoring::save_scores(prep.honest_scores, (out / "scores.csv").string());
    track("model.bin");
    track("scores.csv");
  });
  // prepare() keeps pointers into local state; repair them after the copy.
  prep.conf = &conf;
  prep.X = &X;

  std::vector<double> y_final = prep.y;
  scoring::ScoreMatrix scores_final = prep.honest_scores;
  run_stage("attack", [&] {
    if (config.attack_reviewer < 0 || config.attack_paper < 0) return;
    attack::AttackPlan plan;
    if (config.attack_kind == "simple") {
      plan.kind = "simple";
      plan.target_reviewer = config.attack_reviewer;
      plan.target_paper = config.attack_paper;
      plan.party_bids.emplace_back(config.attack_reviewer,
                                   attack::simple_blackbox_bids(config.attack_paper));
    } else if (config.attack_kind == "whitebox") {
      plan = attack::whitebox_colluding(X, prep.model, prep.capped_bids,
                                        config.attack_reviewer, config.attack_paper,
                                        config.attack_m_a, config.u_cap);
    } else {
      plan = attack::colluding_blackbox(conf, X, config.attack_reviewer,
                                        config.attack_paper, config.attack_m_a,
                                        config.u_cap);
    }
    attack::save_plan(plan, (out / "attack_plan.json").string());
    track("attack_plan.json");
    const auto delta = attack::plan_label_delta(prep.capped_bids, plan);
    for (const auto& [i, dv] : delta) y_final[i] += dv;
    const std::vector<double> shift = scoring::score_shift(X, prep.model, delta);
    for (std::size_t i = 0; i < scores_final.s.size(); ++i) scores_final.s[i] += shift[i];
    scoring::save_scores(scores_final, (out / "scores_poisoned.csv").string());
    track("scores_poisoned.csv");
  });

  defense::FilterResult filtered;
  run_stage("defend", [&] {
    const defense::CandidateSet cands =
        defense::build_candidate_set(scores_final, config.k);
    filtered = defense::filter_candidates(
        cands, scores_final, prep.model, X, y_final,
        config.detector == "exact" ? defense::Detector::kExact
                                   : defense::Detector::kApprox,
        config.defend_m_d, config.threads);
    defense::save_verdicts(filtered.verdicts, (out / "verdicts.csv").string());
    track("verdicts.csv");
  });

  run_stage("assign", [&] {
    const assign::Assignment a = assign::solve_assignment(
        scores_final, &filtered.pruned, config.r_demand, config.p_cap);
    assign::save_assignment(a, (out / "assignment.csv").string());
    track("assignment.csv");
    evalharness::write_quality_csv(
        (out / "quality.csv").string(),
        {{"robust_pipeline", evalharness::assignment_quality(a, conf)}});
    track("quality.csv");
  });

  const fs::path reports = out / "reports";
  run_stage("evaluate", [&] {
    fs::create_directories(reports);
    if (!config.evaluate) return;
    EvaluationSpec spec;
    spec.config.n_target_papers = config.eval_n_target_papers > 0
                                      ? config.eval_n_target_papers
                                      : std::min(400, conf.n());
    spec.config.k = config.k;
    spec.config.r_demand = config.r_demand;
    spec.config.p_cap = config.p_cap;
    spec.config.u_cap = config.u_cap;
    spec.config.lambda = config.lambda;
    spec.config.m_a_list = config.eval_m_a_list;
    spec.config.m_d_list = config.eval_m_d_list;
    spec.config.per_bin = config.eval_per_bin;
    spec.config.trim_max_trials = config.eval_trim_max_trials;
    spec.config.seed = config.seed;
    spec.config.threads = config.threads;
    spec.trim_l_list = config.eval_trim_l_list;
    run_evaluation(conf, X, spec, reports.string());
    for (const char* name : {"fig1.csv", "fig2.csv", "fig3.csv", "table1.csv",
                             "table2.csv"})
      track(std::string("reports/") + name);
  });

  run_stage("manifest", [&] {
    json j;
    j["params"] = json::parse(serialize_config(config));
    // Execution details that cannot affect artifact bytes stay out of the
    // manifest so reruns at any thread count produce identical manifests.
    j["params"].erase("threads");
    j["params"].erase("out_dir");
    json arts = json::object();
    for (const std::string& rel : artifacts)
      arts[rel] = to_hex(fnv1a64_file((out / rel).string()));
    j["artifacts"] = arts;
    std::ofstream manifest(out / "manifest.json", std::ios::binary);
    manifest << j.dump(2) << "\n";
    if (!manifest) throw std::runtime_error("cannot write manifest.json");
  });

  fs::remove(stale_path);
  return reports.string();
}

std::string emit_report(const std::string& reports_dir) {
  const fs::path dir(reports_dir);
  for (const char* name :
       {"fig1.csv", "fig2.csv", "fig3.csv", "table1.csv", "table2.csv"}) {
    if (!fs::exists(dir / name))
      throw ParseError("missing report file: " + (dir / name).string());
  }
  std::ostringstream out;

  {
    const CsvFile f = read_csv((dir / "fig1.csv").string());
    const int rule = column_of(f, "scoring_rule"), lo = column_of(f, "bin_lo"),
              hi = column_of(f, "bin_hi"), trials = column_of(f, "trials"),
              honest = column_of(f, "honest_rate"), attacked = column_of(f, "attack_rate");
    out << "Single-reviewer row-replacement attack, success by honest-rank bin"
           " (fig1.csv)\n";
    for (const auto& row : f.rows) {
      out << "  rule=" << row[rule] << " ranks [" << row[lo] << "," << row[hi]
          << "] trials=" << row[trials] << " honest=" << field6(row[honest])
          << " attacked=" << field6(row[attacked]) << "\n";
    }
    out << "  full-scale reference (2483x2446): the bid-amplifying formula rule"
           " lifted ranks 16-31 from 0.000000 to above 0.700000; under the"
           " regression rule post-attack rates fall below honest rates.\n\n";
  }

  {
    const CsvFile f = read_csv((dir / "fig2.csv").string());
    const int kind = column_of(f, "attack_kind"), ma = column_of(f, "m_a"),
              lo = column_of(f, "bin_lo"), hi = column_of(f, "bin_hi"),
              honest = column_of(f, "honest_rate"), attacked = column_of(f, "attack_rate");
    out << "Colluding attacks vs the regression rule (fig2.csv)\n";
    for (const auto& row : f.rows) {
      out << "  attack=" << row[kind] << " m_a=" << row[ma] << " ranks [" << row[lo]
          << "," << row[hi] << "] honest=" << field6(row[honest])
          << " attacked=" << field6(row[attacked]) << "\n";
    }
    out << "  full-scale reference: rank-51 white-box success reaches 0.220000"
           " at m_a=10 and up to 0.050000 without collusion.\n\n";
  }

  {
    const CsvFile f = read_csv((dir / "fig3.csv").string());
    const int pop = column_of(f, "trial_population"), ma = column_of(f, "m_a"),
              md = column_of(f, "m_d"), count = column_of(f, "population"),
              tpr = column_of(f, "tpr");
    out << "Detection rate over planted white-box attacks (fig3.csv)\n";
    for (const auto& row : f.rows) {
      out << "  population=" << row[pop] << " m_a=" << row[ma] << " m_d=" << row[md]
          << " trials=" << row[count] << " tpr=" << field6(row[tpr]) << "\n";
    }
    out << "  full-scale reference: detection stays near 1.000000 whenever"
           " m_a <= m_d and reaches about 0.400000 at m_a=5, m_d=4.\n\n";
  }

  {
    const CsvFile f = read_csv((dir / "table1.csv").string());
    const int system = column_of(f, "system"), md = column_of(f, "m_d"),
              frac = column_of(f, "frac_positive_bids"), bid = column_of(f, "avg_bid"),
              tpms = column_of(f, "avg_tpms"), maxt = column_of(f, "avg_max_tpms"),
              under = column_of(f, "n_under_reviewed"), f5 = column_of(f, "fpr_top5"),
              fk = column_of(f, "fpr_topk");
    out << "Assignment quality and screening FPR (table1.csv)\n";
    for (const auto& row : f.rows) {
      out << "  system=" << row[system];
      if (!row[md].empty()) out << " m_d=" << row[md];
      out << " frac_positive_bids=" << field6(row[frac]) << " avg_bid="
          << field6(row[bid]) << " avg_tpms=" << field6(row[tpms])
          << " avg_max_tpms=" << field6(row[maxt]) << " under_reviewed=" << row[under];
      if (!row[f5].empty())
        out << " fpr_top5=" << field6(row[f5]) << " fpr_topk=" << field6(row[fk]);
      out << "\n";
    }
    out << "  full-scale reference: formula stand-in 0.990000/2.732000/0.732000/"
           "0.737000, similarity-only 0.323000/0.872000/0.949000/0.997000,"
           " regression 0.442000/1.200000/0.848000/0.943000; FPR top-5/top-50"
           " grows from 0.022000/0.259000 at m_d=1 to 0.139000/0.657000 at"
           " m_d=5.\n\n";
  }

  {
    const CsvFile f = read_csv((dir / "table2.csv").string());
    const int defense = column_of(f, "defense"), param = column_of(f, "param"),
              frac = column_of(f, "frac_positive_bids"), bid = column_of(f, "avg_bid"),
              tpms = column_of(f, "avg_tpms"), maxt = column_of(f, "avg_max_tpms");
    std::vector<int> tpr_cols;
    std::vector<std::string> tpr_names;
    for (std::size_t i = 0; i < f.header.size(); ++i) {
      if (f.header[i].rfind("tpr_ma", 0) == 0) {
        tpr_cols.push_back(static_cast<int>(i));
        tpr_names.push_back(f.header[i].substr(6));
      }
    }
    out << "Trimmed regression vs candidate screening (table2.csv)\n";
    for (const auto& row : f.rows) {
      out << "  defense=" << row[defense] << " param=" << field6(row[param])
          << " frac_positive_bids=" << field6(row[frac]) << " avg_bid="
          << field6(row[bid]) << " avg_tpms=" << field6(row[tpms])
          << " avg_max_tpms=" << field6(row[maxt]);
      for (std::size_t i = 0; i < tpr_cols.size(); ++i)
        out << " tpr[m_a=" << tpr_names[i] << "]=" << field6(row[tpr_cols[i]]);
      out << "\n";
    }
    out << "  full-scale reference: trimming 10000 rows reached 0.201000"
           " detection at m_a=1 versus 1.000000 for screening at m_d=1;"
           " trimming 30000 rows drove positive-bid fraction to 0.219000"
           " against 0.442000 with no defense.\n";
  }

  return out.str();
}

}  // namespace robustbid::pipeline
