// Copyright 2026 The topicreply Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <map>
#include <sstream>
#include <string>

#include "doctest.h"
#include "topicreply/common.h"
#include "topicreply/pipeline.h"
#include "topicreply/synth.h"

using namespace topicreply;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("topicreply_pipeline_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path small_corpus() {
  static const fs::path path = [] {
    const auto dir = fresh_dir("corpus");
    auto p = SynthParams::defaults(SynthProfile::kChain);
    p.num_topics = 6;
    p.num_pairs = 300;
    std::ostringstream out;
    write_pairs_jsonl(out, synthesize(p).pairs);
    write_file(dir / "pairs.jsonl", out.str());
    return dir / "pairs.jsonl";
  }();
  return path;
}

PipelineConfig small_config(const fs::path& out) {
  PipelineConfig c;
  c.corpus = small_corpus();
  c.out_dir = out;
  c.m_grid = {6};
  c.t2_m = 6;
  c.lda.sweeps = 60;
  c.vocabulary.min_doc_freq = 2;
  c.predictor.family_min_examples = 20;
  return c;
}

// Every artifact except manifests, keyed by path relative to root.
std::map<std::string, std::string> artifacts(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root).generic_string();
    if (rel.rfind("manifests/", 0) == 0) continue;
    out[rel] = read_file(e.path());
  }
  return out;
}

const Stage kAllStages[] = {Stage::kIngest,     Stage::kTrainLda,   Stage::kAnnotate,
                            Stage::kTrainPredictors, Stage::kEvaluate, Stage::kPerplexity,
                            Stage::kDescribeTopics};

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("full run writes every manifest and a rerun is a no-op") {
  const auto out = fresh_dir("full");
  Pipeline p(small_config(out));
  const auto first = p.run_all();
  REQUIRE(first.size() == 7);
  for (const auto& r : first) {
    CHECK_FALSE(r.skipped);
    CHECK(fs::exists(p.layout().manifest(r.stage)));
    for (const auto& f : r.outputs) CHECK(fs::exists(f));
  }
  CHECK(fs::exists(p.layout().topic_model(6, View::kSentence)));
  CHECK(fs::exists(p.layout().suite(6)));
  CHECK(fs::exists(p.layout().eval_dir() / "report.txt"));

  const auto before = artifacts(out);
  Pipeline again(small_config(out));
  for (const auto& r : again.run_all()) CHECK(r.skipped);
  CHECK(artifacts(out) == before);

  SUBCASE("a changed predictor config reruns only downstream stages") {
    auto c = small_config(out);
    c.predictor.t2_sgd.epochs = 5;
    Pipeline changed(c);
    for (Stage s : {Stage::kIngest, Stage::kTrainLda, Stage::kAnnotate}) {
      CHECK(changed.expected_hash(s) == again.expected_hash(s));
    }
    CHECK(changed.expected_hash(Stage::kTrainPredictors) !=
          again.expected_hash(Stage::kTrainPredictors));
    CHECK_THROWS_AS(changed.run(Stage::kEvaluate), MissingArtifactError);
    CHECK(changed.run(Stage::kAnnotate).skipped);
    CHECK_FALSE(changed.run(Stage::kTrainPredictors).skipped);
    CHECK_FALSE(changed.run(Stage::kEvaluate).skipped);
  }

  SUBCASE("a modified output is regenerated") {
    const auto silver = p.layout().silver(6, "train");
    const auto bytes = read_file(silver);
    write_file(silver, bytes + "\n");
    CHECK_FALSE(again.run(Stage::kAnnotate).skipped);
    CHECK(read_file(silver) == bytes);
  }
}

TEST_CASE("missing prerequisites name the expected artifact") {
  const auto out = fresh_dir("missing");
  Pipeline p(small_config(out));
  try {
    p.run(Stage::kEvaluate);
    FAIL("expected MissingArtifactError");
  } catch (const MissingArtifactError& e) {
    CHECK(e.path().string().find(out.string()) == 0);
  }
  CHECK_THROWS_AS(p.run(Stage::kTrainLda), MissingArtifactError);
  auto c = small_config(out);
  c.corpus.clear();
  CHECK_THROWS_AS(Pipeline(c).run(Stage::kIngest), std::invalid_argument);
}

TEST_CASE("two output directories receive identical artifacts") {
  const auto a = fresh_dir("det_a");
  const auto b = fresh_dir("det_b");
  auto ca = small_config(a);
  auto cb = small_config(b);
  ca.ablation = cb.ablation = false;
  Pipeline(ca).run_all();
  Pipeline(cb).run_all();
  const auto x = artifacts(a), y = artifacts(b);
  CHECK(x.size() == y.size());
  for (const auto& [rel, bytes] : x) {
    INFO(rel);
    REQUIRE(y.count(rel) == 1);
    CHECK(y.at(rel) == bytes);
  }
  for (Stage s : kAllStages) CHECK(Pipeline(ca).expected_hash(s) == Pipeline(cb).expected_hash(s));
}

TEST_CASE("config json") {
  auto c = small_config("x");
  c.seed = 9;
  c.views = {View::kConcat, View::kSentence};
  const auto back = PipelineConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  const auto merged = PipelineConfig::from_json({{"t2_m", 10}}, c);
  CHECK(merged.t2_m == 10);
  CHECK(merged.seed == 9);
  CHECK(merged.topic_counts() == std::vector<uint32_t>{6, 10});
  auto bad = c;
  bad.m_grid = {1};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.train_ratio = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

}  // TEST_SUITE
