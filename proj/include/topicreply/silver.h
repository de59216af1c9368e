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

#ifndef TOPICREPLY_SILVER_H_
#define TOPICREPLY_SILVER_H_

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "topicreply/corpus.h"
#include "topicreply/topic_model.h"

namespace topicreply {

struct SentenceLabel {
  uint32_t j = 0;
  TopicDistribution tau_s;
  uint32_t dominant = 0;
  bool peaked = false;
  // No in-vocabulary tokens: tau_s is the sentence model's prior.
  bool empty = false;
};

// Machine-generated topic labels for one email pair.
struct SilverAnnotation {
  std::string id;
  TopicDistribution tau_ca_customer;
  TopicDistribution tau_ca_agent;
  std::vector<SentenceLabel> sentences;
};

// tau_CA of the customer and agent texts under concat_model, and tau_S of
// every agent sentence under sentence_model. Pairs are annotated in parallel;
// output order matches input order.
std::vector<SilverAnnotation> annotate(std::span<const TokenizedPair> pairs,
                                       const TopicModel& concat_model,
                                       const TopicModel& sentence_model,
                                       const InferOptions& options = {});

// Agent sentence j (current) followed by sentence j + 1.
struct TransitionExample {
  size_t pair_index = 0;
  uint32_t j = 0;
  uint32_t current_dominant = 0;
  uint32_t next_dominant = 0;
};

// Customer context only; target is the dominant topic of agent sentence 0.
struct FirstSentenceExample {
  size_t pair_index = 0;
  uint32_t target_dominant = 0;
};

struct TransitionSet {
  std::vector<TransitionExample> transitions;
  std::vector<FirstSentenceExample> first;
};

TransitionSet transition_pairs(std::span<const SilverAnnotation> annotations);

void write_silver_jsonl(std::ostream& out, std::span<const SilverAnnotation> annotations);
std::vector<SilverAnnotation> read_silver_jsonl(std::istream& in);

}  // namespace topicreply

#endif  // TOPICREPLY_SILVER_H_
