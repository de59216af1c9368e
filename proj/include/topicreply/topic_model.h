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
// LDA topic models trained by collapsed Gibbs sampling over four views of an
// email-pair corpus, with fold-in inference for unseen documents.

#ifndef TOPICREPLY_TOPIC_MODEL_H_
#define TOPICREPLY_TOPIC_MODEL_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "topicreply/corpus.h"

namespace topicreply {

// Which text unit is an LDA document: customer emails, agent emails,
// customer+agent concatenations, or individual agent sentences.
enum class View { kCustomer, kAgent, kConcat, kSentence };

std::string_view view_tag(View view);  // "C", "A", "CA", "S"
View parse_view(std::string_view tag);  // throws std::invalid_argument

using Document = std::vector<uint32_t>;

class TopicDistribution {
 public:
  TopicDistribution() = default;
  // Throws std::invalid_argument unless entries are finite, non-negative and
  // sum to 1 within 1e-9.
  explicit TopicDistribution(std::vector<double> probs);

  static TopicDistribution uniform(size_t num_topics);
  // Divides by the sum; throws when the sum is not positive.
  static TopicDistribution normalized(std::span<const double> weights);

  size_t size() const { return probs_.size(); }
  double operator[](size_t k) const { return probs_[k]; }
  std::span<const double> probs() const { return probs_; }
  const std::vector<double>& vec() const { return probs_; }

  bool operator==(const TopicDistribution&) const = default;

 private:
  std::vector<double> probs_;
};

struct DominantTopic {
  uint32_t topic = 0;
  double probability = 0;
  bool peaked = false;
};

// Argmax with ties to the lowest index. Peaked when the maximum exceeds 0.5
// and is at least twice the runner-up.
DominantTopic dominant_topic(std::span<const double> dist);
inline DominantTopic dominant_topic(const TopicDistribution& dist) {
  return dominant_topic(dist.probs());
}

// Topic ids ordered by descending probability, ties to the lower index.
std::vector<uint32_t> ranked_topics(std::span<const double> dist, size_t k);

double peakedness_rate(std::span<const TopicDistribution> dists);

inline constexpr uint32_t kDefaultNumTopics = 50;
inline constexpr double kDefaultAlphaSum = 5.0;
inline constexpr double kDefaultBeta = 0.01;
inline constexpr uint32_t kDefaultSweeps = 1000;

struct LdaOptions {
  uint32_t num_topics = kDefaultNumTopics;
  double alpha_sum = kDefaultAlphaSum;  // symmetric alpha_k = alpha_sum / M
  double beta = kDefaultBeta;
  uint32_t sweeps = kDefaultSweeps;
  uint64_t seed = 1;
  // One moment-matching pass after sampling: alpha becomes the mean training
  // document-topic proportion scaled back to alpha_sum.
  bool reestimate_alpha = true;

  nlohmann::json to_json() const;
  static LdaOptions from_json(const nlohmann::json& j);
};

struct InferOptions {
  uint32_t burn_in = 20;
  uint32_t samples = 10;
  uint64_t seed = 0x5eedULL;

  nlohmann::json to_json() const;
  static InferOptions from_json(const nlohmann::json& j);
};

class TopicModel {
 public:
  // counts is the M x V topic-word matrix, row-major.
  TopicModel(View view, std::vector<double> alpha, double beta,
             std::vector<std::string> vocabulary, std::vector<uint32_t> counts,
             uint64_t seed, uint32_t sweeps);

  View view() const { return view_; }
  uint32_t num_topics() const { return static_cast<uint32_t>(alpha_.size()); }
  uint32_t vocab_size() const { return static_cast<uint32_t>(vocabulary_.size()); }
  const std::vector<double>& alpha() const { return alpha_; }
  double alpha_sum() const { return alpha_sum_; }
  double beta() const { return beta_; }
  uint64_t seed() const { return seed_; }
  uint32_t sweeps() const { return sweeps_; }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  std::string vocabulary_hash() const;

  uint32_t count(uint32_t topic, uint32_t word) const {
    return counts_[static_cast<size_t>(topic) * vocab_size() + word];
  }
  std::span<const uint32_t> counts() const { return counts_; }
  uint64_t topic_total(uint32_t topic) const { return totals_[topic]; }

  // P(w | k) = (n_kw + beta) / (n_k + V beta).
  double phi(uint32_t topic, uint32_t word) const {
    return phi_[static_cast<size_t>(word) * num_topics() + topic];
  }
  // All topics' probabilities for one word (length M).
  std::span<const double> phi_column(uint32_t word) const {
    return std::span<const double>(phi_).subspan(static_cast<size_t>(word) * num_topics(),
                                                 num_topics());
  }

  // alpha / sum(alpha): the inferred distribution of an empty document.
  TopicDistribution prior() const;

  // Stage hash of the configuration that produced this model, if any.
  const std::string& config_hash() const { return config_hash_; }
  void set_config_hash(std::string h) { config_hash_ = std::move(h); }

  nlohmann::json metadata() const;

 private:
  View view_;
  std::vector<double> alpha_;
  double alpha_sum_ = 0;
  double beta_;
  std::vector<std::string> vocabulary_;
  std::vector<uint32_t> counts_;
  std::vector<uint64_t> totals_;
  std::vector<double> phi_;  // word-major V x M
  uint64_t seed_;
  uint32_t sweeps_;
  std::string config_hash_;
};

std::vector<Document> build_documents(std::span<const TokenizedPair> pairs, View view);

// Collapsed Gibbs sampling:
//   P(z = k | rest) ~ (n_dk + alpha_k) (n_kw + beta) / (n_k + V beta).
TopicModel train_lda(std::span<const Document> docs, std::vector<std::string> vocabulary,
                     View view, const LdaOptions& options);

// Fold-in Gibbs with the model's counts frozen. Averages
// (n_dk + alpha_k) / (N + sum alpha) over `samples` sweeps after `burn_in`.
// The chain is seeded from options.seed and the token ids, so the result for
// a document does not depend on what else is being inferred.
TopicDistribution infer(const TopicModel& model, std::span<const uint32_t> tokens,
                        const InferOptions& options = {});

struct TopicDescriptor {
  uint32_t topic = 0;
  std::vector<std::string> top_words;
  std::vector<std::string> top_phrases;
};

struct DescribeOptions {
  size_t top_words = 10;
  size_t top_phrases = 5;
  uint32_t min_phrase_count = 5;
};

// Words ranked by P(w|k); phrases are corpus bigrams/trigrams (occurring at
// least min_phrase_count times) ranked by the product of member P(w|k).
std::vector<TopicDescriptor> describe_topics(const TopicModel& model,
                                             std::span<const Document> docs,
                                             const DescribeOptions& options = {});
nlohmann::json descriptors_to_json(std::span<const TopicDescriptor> descriptors);
std::vector<TopicDescriptor> descriptors_from_json(const nlohmann::json& j);

std::string save_topic_model(const TopicModel& model);
TopicModel load_topic_model(std::string_view bytes);

}  // namespace topicreply

#endif  // TOPICREPLY_TOPIC_MODEL_H_
