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
//
// Staged pipeline over an output directory. Every stage writes a manifest
// with its config hash and the hashes of the files it read and wrote; a
// stage whose manifest still matches is skipped. Config hashes are chained,
// so a change upstream marks everything downstream stale.

#ifndef TOPICREPLY_PIPELINE_H_
#define TOPICREPLY_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "topicreply/corpus.h"
#include "topicreply/evaluation.h"
#include "topicreply/predictor.h"
#include "topicreply/topic_model.h"

namespace topicreply {

enum class Stage {
  kIngest,
  kTrainLda,
  kAnnotate,
  kTrainPredictors,
  kEvaluate,
  kPerplexity,
  kDescribeTopics,
};
std::string_view stage_name(Stage stage);  // "ingest", "train-lda", ...

struct PipelineConfig {
  std::filesystem::path corpus;
  std::filesystem::path out_dir = "out";
  std::vector<uint32_t> m_grid = {10, 20, 30, 40, 50, 75, 100};
  // Topic count for next-sentence models, ablations and serving.
  uint32_t t2_m = 50;
  uint64_t seed = 1;

  double train_ratio = 0.8;
  FilterOptions filter;
  Vocabulary::BuildOptions vocabulary;

  LdaOptions lda;  // num_topics and seed are set per model
  std::vector<View> views = {View::kCustomer, View::kAgent, View::kConcat, View::kSentence};
  InferOptions infer;
  InferOptions perplexity_infer;

  PredictorConfig predictor;
  bool ablation = true;

  T1EvalOptions t1_eval;
  T2EvalOptions t2_eval;
  DescribeOptions describe;

  // All grid points plus t2_m, ascending and unique.
  std::vector<uint32_t> topic_counts() const;
  // Throws std::invalid_argument for M < 2, an empty grid, or a bad ratio.
  void validate() const;
  nlohmann::json to_json() const;
  // Keys present in `j` override the fields of `base`.
  static PipelineConfig from_json(const nlohmann::json& j, const PipelineConfig& base);
  static PipelineConfig from_json(const nlohmann::json& j);
};

// File locations under the output directory.
class ArtifactLayout {
 public:
  explicit ArtifactLayout(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path pairs() const { return root_ / "corpus" / "pairs.jsonl"; }
  std::filesystem::path split() const { return root_ / "corpus" / "split.json"; }
  std::filesystem::path vocabulary() const { return root_ / "corpus" / "vocab.json"; }
  std::filesystem::path stats_json() const { return root_ / "corpus" / "stats.json"; }
  std::filesystem::path stats_txt() const { return root_ / "corpus" / "stats.txt"; }
  std::filesystem::path topic_model(uint32_t m, View view) const;
  std::filesystem::path silver(uint32_t m, std::string_view part) const;  // "train" / "test"
  std::filesystem::path silver_meta(uint32_t m) const;
  std::filesystem::path suite(uint32_t m) const;
  std::filesystem::path ablation_suite(uint32_t m, std::string_view subset) const;
  std::filesystem::path eval_dir() const { return root_ / "eval"; }
  std::filesystem::path perplexity_dir() const { return root_ / "perplexity"; }
  std::filesystem::path topics(uint32_t m, View view) const;
  std::filesystem::path manifest(Stage stage) const;

 private:
  std::filesystem::path root_;
};

struct StageResult {
  Stage stage = Stage::kIngest;
  bool skipped = false;  // manifest matched; nothing rewritten
  std::string config_hash;
  std::vector<std::filesystem::path> outputs;
};

// Train/test pairs with their tokenization under the stored vocabulary.
struct LoadedCorpus {
  Vocabulary vocabulary;
  CorpusSplit split;
  std::vector<EmailPair> train;
  std::vector<EmailPair> test;
  std::vector<TokenizedPair> train_tokens;
  std::vector<TokenizedPair> test_tokens;
};
LoadedCorpus load_corpus(const ArtifactLayout& layout);

std::vector<SilverAnnotation> load_silver(const std::filesystem::path& path);

class Pipeline {
 public:
  // `log` receives progress lines; may be null.
  Pipeline(PipelineConfig config, std::ostream* log = nullptr);

  const PipelineConfig& config() const { return config_; }
  const ArtifactLayout& layout() const { return layout_; }

  // Expected config hash of a stage under the current config (and corpus).
  std::string expected_hash(Stage stage) const;

  // Missing or stale prerequisites throw MissingArtifactError naming the
  // expected file.
  StageResult run(Stage stage);
  std::vector<StageResult> run_all();

 private:
  StageResult ingest();
  StageResult train_lda();
  StageResult annotate();
  StageResult train_predictors();
  StageResult evaluate();
  StageResult perplexity();
  StageResult describe_topics();

  nlohmann::json stage_config(Stage stage) const;
  std::vector<Stage> upstream(Stage stage) const;
  std::vector<std::filesystem::path> stage_inputs(Stage stage) const;
  void require_upstream(Stage stage) const;
  bool up_to_date(Stage stage) const;
  void write_manifest(Stage stage, const std::vector<std::filesystem::path>& outputs) const;
  void note(const std::string& line) const;

  PipelineConfig config_;
  ArtifactLayout layout_;
  std::ostream* log_;
};

}  // namespace topicreply

#endif  // TOPICREPLY_PIPELINE_H_
