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

#ifndef TOPICREPLY_EVALUATION_H_
#define TOPICREPLY_EVALUATION_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "topicreply/corpus.h"
#include "topicreply/predictor.h"
#include "topicreply/silver.h"
#include "topicreply/topic_model.h"

namespace topicreply {

// sum_k sqrt(p_k q_k), clamped to [0, 1].
double bhattacharyya(std::span<const double> p, std::span<const double> q);
inline double bhattacharyya(const TopicDistribution& p, const TopicDistribution& q) {
  return bhattacharyya(p.probs(), q.probs());
}

double mean_bc(std::span<const TopicDistribution> predictions,
               std::span<const TopicDistribution> targets);
// Mean KL(target || prediction).
double mean_kl(std::span<const TopicDistribution> predictions,
               std::span<const TopicDistribution> targets);

struct RankingItem {
  std::string id;
  TopicDistribution prediction;
  TopicDistribution truth;
};

struct RankingCandidate {
  std::string id;
  TopicDistribution dist;
};

// Each item's true distribution competes with k - 1 distractors drawn without
// replacement from `pool` (excluding candidates sharing the item's id). A hit
// needs BC(prediction, truth) strictly above every distractor's BC.
// Distractors for item i depend only on (seed, i).
double text_ranking_recall1(std::span<const RankingItem> items,
                            std::span<const RankingCandidate> pool, uint32_t k, uint64_t seed);

// Position of `label` when topics are sorted by descending probability with
// ties to the lower index (0 = top).
uint32_t topic_rank(std::span<const double> dist, uint32_t label);

double dominant_topic_accuracy(std::span<const TopicDistribution> predictions,
                               std::span<const uint32_t> dominants, uint32_t k);

enum class EvalTask { kT1, kT2 };

struct EvalRow {
  std::string system;
  std::string features;
  double mean_bc = 0;
  double mean_kl = 0;  // logged only
  std::map<uint32_t, double> dta;      // K -> accuracy
  std::map<uint32_t, double> recall1;  // k -> Recall@1
};

struct EvalReport {
  EvalTask task = EvalTask::kT1;
  uint32_t num_topics = 0;
  size_t test_size = 0;
  std::vector<EvalRow> rows;

  const EvalRow& row(std::string_view system, std::string_view features = "") const;
  // Throws Error on duplicate (system, features) keys or values outside [0, 1].
  void validate() const;
  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
  std::string to_table() const;
};

// One CSV over several reports; columns are the union of DTA/Recall keys.
std::string reports_csv(std::span<const EvalReport> reports);

struct T1EvalOptions {
  std::vector<uint32_t> recall_k = {2, 5, 10, 20};
  uint64_t seed = 7;
};

// Rows "proposed" (T1 regressor) and "copy_customer" (tau_CA of the query).
// Targets are the silver tau_CA of the agent replies; distractors come from
// the training annotations.
EvalReport evaluate_t1(const SoftmaxRegressor& t1, std::span<const TokenizedPair> test_pairs,
                       std::span<const SilverAnnotation> test_annotations,
                       std::span<const SilverAnnotation> train_annotations,
                       const T1EvalOptions& options = {});

struct NamedT2Models {
  std::string features;
  const T2Models* models = nullptr;
};

struct T2EvalOptions {
  std::vector<uint32_t> dta_k = {1, 2, 5, 10};  // values above M are dropped
};

// Every agent sentence of every test pair is one example. Sentence 0 is
// predicted from the customer alone; sentence j >= 1 from the silver labels of
// sentence j - 1. Rows: uniform, average, then proposed per feature subset.
EvalReport evaluate_t2(std::span<const NamedT2Models> proposed, const TopicDistribution& average,
                       std::span<const TokenizedPair> test_pairs,
                       std::span<const SilverAnnotation> test_annotations,
                       const T2EvalOptions& options = {});

}  // namespace topicreply

#endif  // TOPICREPLY_EVALUATION_H_
