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
// Topic predictors. T1 maps a customer query to the topic distribution of
// the whole agent reply (soft labels, KL loss). T2 predicts the dominant
// topic of the agent's next sentence with one multiclass model per dominant
// topic of the current sentence, a customer-only model for the first
// sentence, and a pooled fallback for rare current topics.

#ifndef TOPICREPLY_PREDICTOR_H_
#define TOPICREPLY_PREDICTOR_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "topicreply/corpus.h"
#include "topicreply/silver.h"
#include "topicreply/topic_model.h"

namespace topicreply {

struct FeatureConfig {
  bool customer_words = true;
  bool customer_topics = true;
  bool sentence_words = true;
  bool sentence_topics = true;
  bool position = true;
  // Use the whole tau_S of the current sentence instead of a one-hot of its
  // dominant topic.
  bool full_sentence_tau = false;

  bool operator==(const FeatureConfig&) const = default;
  nlohmann::json to_json() const;
  static FeatureConfig from_json(const nlohmann::json& j);
};

// Feature subsets of the next-sentence ablation grid.
struct NamedFeatureSubset {
  std::string name;
  FeatureConfig features;
};
std::vector<NamedFeatureSubset> t2_ablation_subsets();
FeatureConfig t1_default_features();

enum class FeatureBlock : uint8_t {
  kCustomerWords,
  kCustomerTopics,
  kSentenceWords,
  kSentenceTopics,
  kPosition,
  kBias,
};
std::string_view block_name(FeatureBlock block);

inline constexpr uint32_t kPositionBuckets = 7;
// Sentence index j -> bucket: 0, 1, 2, 3, 4, 5-7, >= 8.
uint32_t position_bucket(uint32_t j);

class FeatureLayout {
 public:
  struct Block {
    FeatureBlock kind;
    uint32_t offset;
    uint32_t size;
    bool operator==(const Block&) const = default;
  };

  FeatureLayout() = default;
  // Word blocks cover vocabulary ids [0, word_dims).
  static FeatureLayout make(const FeatureConfig& config, uint32_t word_dims, uint32_t num_topics);
  // Customer blocks of `config` plus bias; no agent-sentence blocks.
  static FeatureLayout customer_only(const FeatureConfig& config, uint32_t word_dims,
                                     uint32_t num_topics);

  uint32_t dim() const { return dim_; }
  uint32_t word_dims() const { return word_dims_; }
  uint32_t num_topics() const { return num_topics_; }
  bool full_sentence_tau() const { return full_sentence_tau_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  const Block* find(FeatureBlock kind) const;
  bool has(FeatureBlock kind) const { return find(kind) != nullptr; }

  bool operator==(const FeatureLayout&) const = default;
  nlohmann::json to_json() const;
  static FeatureLayout from_json(const nlohmann::json& j);

 private:
  void add(FeatureBlock kind, uint32_t size);

  std::vector<Block> blocks_;
  uint32_t dim_ = 0;
  uint32_t word_dims_ = 0;
  uint32_t num_topics_ = 0;
  bool full_sentence_tau_ = false;
};

// Sparse features; indices strictly increasing.
struct FeatureVector {
  std::vector<uint32_t> index;
  std::vector<double> value;
  size_t nnz() const { return index.size(); }
};

struct FeatureContext {
  std::span<const uint32_t> customer_tokens;
  const TopicDistribution* customer_tau = nullptr;
  std::span<const uint32_t> sentence_tokens;
  const TopicDistribution* sentence_tau = nullptr;
  uint32_t position = 0;  // index of the current sentence
};

// Word blocks are log(1 + tf); throws if the layout needs a distribution the
// context does not supply.
FeatureVector encode_features(const FeatureLayout& layout, const FeatureContext& context);

std::vector<double> softmax(std::span<const double> scores);

// KL(p || q) with 0 log 0 = 0; infinite when q_k = 0 < p_k.
double kl_divergence(std::span<const double> p, std::span<const double> q);

class SoftmaxRegressor {
 public:
  SoftmaxRegressor() = default;
  SoftmaxRegressor(FeatureLayout layout, uint32_t num_classes);
  SoftmaxRegressor(FeatureLayout layout, uint32_t num_classes, std::vector<double> weights);

  const FeatureLayout& layout() const { return layout_; }
  uint32_t num_classes() const { return num_classes_; }
  // Feature-major: weights()[f * num_classes + c].
  std::span<const double> weights() const { return weights_; }
  std::span<double> mutable_weights() { return weights_; }

  std::vector<double> scores(const FeatureVector& x) const;
  TopicDistribution predict(const FeatureVector& x) const;

 private:
  FeatureLayout layout_;
  uint32_t num_classes_ = 0;
  std::vector<double> weights_;
};

struct LabeledExample {
  FeatureVector x;
  std::vector<double> target;  // soft label; one-hot for hard labels
};

LabeledExample hard_label(FeatureVector x, uint32_t label, uint32_t num_classes);

struct SgdOptions {
  double learning_rate = 0.1;  // divided by sqrt(epoch)
  uint32_t epochs = 20;
  double l2 = 1e-4;
  uint64_t seed = 1;
  bool shuffle = true;

  nlohmann::json to_json() const;
  static SgdOptions from_json(const nlohmann::json& j);
};

// mean_i KL(target_i || softmax(W x_i)) + l2 ||W||^2.
double kl_objective(const SoftmaxRegressor& model, std::span<const LabeledExample> examples,
                    double l2);
// d kl_objective / dW in the weights() layout:
// mean_i x_i (softmax(W x_i) - target_i)^T + 2 l2 W.
std::vector<double> kl_gradient(const SoftmaxRegressor& model,
                                std::span<const LabeledExample> examples, double l2);

struct TrainTrace {
  std::vector<double> epoch_objective;
};

// Per-example SGD step W -= eta (x (p - y)^T + 2 l2 W), deterministic for a
// fixed seed. Throws std::invalid_argument when an example does not fit the
// layout or the class count.
SoftmaxRegressor train_softmax(const FeatureLayout& layout, uint32_t num_classes,
                               std::span<const LabeledExample> examples,
                               const SgdOptions& options, TrainTrace* trace = nullptr);

struct PredictorConfig {
  FeatureConfig t1_features = t1_default_features();
  FeatureConfig t2_features;
  SgdOptions t1_sgd;
  SgdOptions t2_sgd;
  uint32_t family_min_examples = 50;
  // Word features use the most frequent vocabulary ids only.
  uint32_t feature_vocab_limit = 5000;

  nlohmann::json to_json() const;
  static PredictorConfig from_json(const nlohmann::json& j);
};

struct T2Models {
  // Keyed by the dominant topic of the current sentence. Empty when the
  // feature config has no sentence-topic block (single pooled model).
  std::map<uint32_t, SoftmaxRegressor> family;
  SoftmaxRegressor first;
  SoftmaxRegressor fallback;
};

enum class NextRoute { kFirstSentence, kFamily, kFallback };
std::string_view route_name(NextRoute route);

struct NextContext {
  std::span<const uint32_t> customer_tokens;
  const TopicDistribution* customer_tau = nullptr;
  // Last composed sentence; ignored when sentences_so_far == 0.
  std::span<const uint32_t> last_sentence_tokens;
  const TopicDistribution* last_sentence_tau = nullptr;
  uint32_t sentences_so_far = 0;
};

struct NextPrediction {
  TopicDistribution dist;
  NextRoute route = NextRoute::kFirstSentence;
  uint32_t family_key = 0;  // dominant topic of the last sentence when j >= 1
};

uint32_t feature_word_dims(const PredictorConfig& config, size_t vocab_size);

SoftmaxRegressor train_t1(std::span<const TokenizedPair> pairs,
                          std::span<const SilverAnnotation> annotations,
                          const PredictorConfig& config, size_t vocab_size);

TopicDistribution predict_t1(const SoftmaxRegressor& t1, std::span<const uint32_t> customer_tokens,
                             const TopicDistribution& customer_tau);

// Throws Error when there are no transitions.
T2Models train_t2(std::span<const TokenizedPair> pairs,
                  std::span<const SilverAnnotation> annotations, const TransitionSet& transitions,
                  const PredictorConfig& config, size_t vocab_size);

NextPrediction predict_next(const T2Models& models, const NextContext& context);

struct PredictorSuite {
  uint32_t num_topics = 0;
  PredictorConfig config;
  SoftmaxRegressor t1;
  T2Models t2;
  std::string config_hash;
};

PredictorSuite train_suite(std::span<const TokenizedPair> pairs,
                           std::span<const SilverAnnotation> annotations,
                           const PredictorConfig& config, size_t vocab_size);

std::string save_suite(const PredictorSuite& suite);
PredictorSuite load_suite(std::string_view bytes);

TopicDistribution baseline_uniform(size_t num_topics);
// Normalized alpha of the (re-estimated) sentence model.
TopicDistribution baseline_average(const TopicModel& sentence_model);
// Mean tau_S over all annotated sentences.
TopicDistribution baseline_average(std::span<const SilverAnnotation> annotations);
TopicDistribution baseline_copy_customer(const TopicDistribution& customer_tau);

}  // namespace topicreply

#endif  // TOPICREPLY_PREDICTOR_H_
