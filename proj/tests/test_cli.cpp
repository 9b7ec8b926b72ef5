#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "robustbid/errors.hpp"
#include "robustbid/pipeline.hpp"
#include "support.hpp"

using namespace robustbid;
using testsupport::TempDir;
using testsupport::write_file;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// A pipeline configuration small enough for unit tests: tiny corpus, tiny
// conference, one-bin evaluation.
pipeline::PipelineConfig tiny_config(const std::string& out_dir) {
  pipeline::PipelineConfig c;
  c.out_dir = out_dir;
  c.seed = 5;
  c.corpus.papers = 120;
  c.corpus.authors = 60;
  c.corpus.communities = 2;
  c.corpus.vocab_per_community = 50;
  c.corpus.shared_vocab = 80;
  c.corpus.cites_per_paper = 12;
  c.conference.target_clusters = 8;
  c.conference.min_cluster_size = 3;
  c.conference.min_cites = 3;
  c.conference.max_cites = 10000;
  c.conference.mu = 10.0;
  c.conference.beta = 500.0;
  c.conference.target_papers = 24;
  c.conference.target_reviewers = 24;
  c.hash_ratio = 0.05;
  c.u_cap = 20;
  c.k = 6;
  c.r_demand = 2;
  c.p_cap = 6;
  c.defend_m_d = 1;
  c.evaluate = true;
  c.eval_n_target_papers = 6;
  c.eval_per_bin = 2;
  c.eval_m_a_list = {1};
  c.eval_m_d_list = {1};
  c.eval_trim_l_list = {20};
  c.eval_trim_max_trials = 3;
  return c;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config serialization is a fixpoint and rejects unknown keys") {
  const pipeline::PipelineConfig defaults;
  const std::string text = pipeline::serialize_config(defaults);
  const pipeline::PipelineConfig parsed = pipeline::parse_config(text);
  CHECK(pipeline::serialize_config(parsed) == text);

  // Overriding a subset keeps every other default.
  const pipeline::PipelineConfig partial =
      pipeline::parse_config("{\"seed\": 9, \"k\": 12}");
  CHECK(partial.seed == 9);
  CHECK(partial.k == 12);
  CHECK(partial.u_cap == defaults.u_cap);
  CHECK(partial.out_dir == defaults.out_dir);

  CHECK_THROWS_WITH_AS(pipeline::parse_config("{\"no_such_knob\": 1}"),
                       doctest::Contains("no_such_knob"), ParamError);
  CHECK_THROWS_AS(pipeline::parse_config("{\"seed\": -3}"), ParamError);
  CHECK_THROWS_AS(pipeline::parse_config("not json"), ParseError);
}

TEST_CASE("config validation catches bad ranges before any work") {
  CHECK_THROWS_AS(pipeline::parse_config("{\"lambda\": 0.0}"), ParamError);
  CHECK_THROWS_AS(pipeline::parse_config("{\"k\": 0}"), ParamError);
  CHECK_THROWS_AS(pipeline::parse_config("{\"hash_ratio\": 0.0}"), ParamError);
  CHECK_THROWS_AS(pipeline::parse_config("{\"detector\": \"psychic\"}"), ParamError);
  CHECK_THROWS_AS(pipeline::parse_config("{\"attack_kind\": \"loud\"}"), ParamError);
}

TEST_CASE("experiment config parses the harness knobs") {
  const pipeline::EvaluationSpec spec = pipeline::parse_experiment_config(
      "{\"k\": 10, \"per_bin\": 3, \"m_a_list\": [1, 2], \"trim_l_list\": [100]}");
  CHECK(spec.config.k == 10);
  CHECK(spec.config.per_bin == 3);
  CHECK(spec.config.m_a_list == std::vector<int>{1, 2});
  CHECK(spec.trim_l_list == std::vector<long>{100});
  CHECK_THROWS_AS(pipeline::parse_experiment_config("{\"bogus\": 1}"), ParamError);
}

TEST_CASE("the pipeline writes identical artifacts on identical configs") {
  TempDir tmp;
  pipeline::PipelineConfig one = tiny_config(tmp.file("run1"));
  pipeline::PipelineConfig two = tiny_config(tmp.file("run2"));
  two.threads = 2;  // thread count must not leak into any artifact

  const std::string reports1 = pipeline::run_pipeline(one);
  const std::string reports2 = pipeline::run_pipeline(two);
  CHECK(std::filesystem::exists(reports1));

  namespace fs = std::filesystem;
  std::vector<std::string> rel;
  for (const auto& entry : fs::recursive_directory_iterator(tmp.file("run1")))
    if (entry.is_regular_file())
      rel.push_back(fs::relative(entry.path(), tmp.file("run1")).string());
  std::sort(rel.begin(), rel.end());
  REQUIRE(!rel.empty());
  for (const std::string& name : rel) {
    const std::string a = slurp(tmp.file("run1") + "/" + name);
    const std::string b = slurp(tmp.file("run2") + "/" + name);
    CHECK_MESSAGE(a == b, "artifact differs: ", name);
  }

  // The reports digest parses its own directory.
  const std::string digest = pipeline::emit_report(reports1);
  CHECK(digest.find("fig1") != std::string::npos);
  CHECK(!digest.empty());

  CHECK_THROWS_AS(pipeline::emit_report(tmp.file("nowhere")), ParseError);
}

#ifdef ROBUSTBID_CLI_PATH
TEST_CASE("the command line binary reports usage and errors by exit code") {
  const std::string bin = ROBUSTBID_CLI_PATH;
  REQUIRE(std::filesystem::exists(bin));
  auto run = [&](const std::string& args) {
    const std::string cmd = bin + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };
  CHECK(run("--help") == 0);
  CHECK(run("gen-corpus --help") == 0);
  CHECK(run("--no-such-flag") == 2);
  // A missing reports directory is an input failure, not a usage error.
  CHECK(run("report --reports this-directory-does-not-exist") == 1);

  TempDir tmp;
  write_file(tmp.file("bad.json"), "{\"k\": 0}");
  CHECK(run("pipeline --config " + tmp.file("bad.json")) == 2);

  // A tiny corpus generation round trip through the binary.
  CHECK(run("gen-corpus --out " + tmp.file("c.jsonl") +
            " --papers 40 --authors 20 --communities 2 --seed 3") == 0);
  CHECK(std::filesystem::exists(tmp.file("c.jsonl")));
}
#endif

}  // TEST_SUITE
