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
// Word-level perplexity of agent replies, with and without the customer
// query as context.

#ifndef TOPICREPLY_PERPLEXITY_H_
#define TOPICREPLY_PERPLEXITY_H_

#include <span>
#include <string>

#include "json.hpp"
#include "topicreply/topic_model.h"

namespace topicreply {

inline constexpr const char* kLikelihoodEstimator = "fold-in point estimate";

struct PerplexityReport {
  uint32_t num_topics = 0;
  double pp_unconditional = 0;
  double pp_conditional = 0;
  size_t token_total = 0;  // agent tokens only
  size_t doc_count = 0;
  std::string estimator = kLikelihoodEstimator;

  nlohmann::json to_json() const;
};

// log L(w_1..w_N) ~= sum_i log sum_k theta_k phi_k(w_i), with theta inferred
// by fold-in on the same tokens. Zero for an empty document.
double doc_log_likelihood(const TopicModel& model, std::span<const uint32_t> tokens,
                          const InferOptions& options = {});

// exp(-log_likelihood / token_total). Throws Error when token_total is 0.
double perplexity_from_log_likelihood(double log_likelihood, size_t token_total);

double perplexity_unconditional(const TopicModel& agent_model,
                                std::span<const Document> agent_docs,
                                const InferOptions& options = {});

// exp(-sum_i [log L(C_i + A_i) - log L(C_i)] / sum_i N_{A_i}).
double perplexity_conditional(const TopicModel& concat_model,
                              std::span<const Document> customer_docs,
                              std::span<const Document> agent_docs,
                              const InferOptions& options = {});

PerplexityReport perplexity_report(const TopicModel& agent_model,
                                   const TopicModel& concat_model,
                                   std::span<const TokenizedPair> test_pairs,
                                   const InferOptions& options = {});

// Header "M,pp_unconditional,pp_conditional" then one row per report.
std::string perplexity_csv(std::span<const PerplexityReport> reports);

}  // namespace topicreply

#endif  // TOPICREPLY_PERPLEXITY_H_
