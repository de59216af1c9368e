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
// Synthetic email-pair corpora with known generating structure.
//
//   coupled    customer topic t; agent reply mixes t (weight `echo`) with
//              pi(t) for a fixed derangement pi; Dirichlet noise on both.
//   chain      agent sentence topics follow a Markov chain with mass
//              `concentration` on k -> k+1 mod M; the customer's topic is
//              the state before agent sentence 0.
//   two_vocab  two disjoint five-word vocabularies, every document pure.

#ifndef TOPICREPLY_SYNTH_H_
#define TOPICREPLY_SYNTH_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "topicreply/corpus.h"

namespace topicreply {

enum class SynthProfile { kCoupled, kChain, kTwoVocab };
std::string_view profile_name(SynthProfile profile);
SynthProfile parse_profile(std::string_view name);  // throws std::invalid_argument

struct LengthRange {
  uint32_t min = 0;
  uint32_t max = 0;
};

struct SynthParams {
  SynthProfile profile = SynthProfile::kCoupled;
  uint64_t seed = 1;
  uint32_t num_pairs = 5000;
  uint32_t num_topics = 20;
  uint32_t words_per_topic = 30;
  LengthRange customer_tokens{10, 14};
  LengthRange agent_tokens{20, 26};
  LengthRange sentence_tokens{5, 9};

  // coupled
  double echo = 0.7;
  double noise = 0.1;  // weight of a Dirichlet(1) draw mixed into each doc

  // chain
  double concentration = 0.9;
  uint32_t sentences_per_email = 6;
  // Relative amplitude of a cosine skew on the customer topic distribution.
  double start_skew = 0.2;
  // Where the 1 - concentration residual goes, as (offset, weight).
  std::vector<std::pair<int, double>> residual = {{2, 0.4}, {3, 0.3}, {0, 0.3}};
  // Probability a token is drawn from its sentence's topic rather than a
  // uniformly random topic.
  double purity = 1.0;

  static SynthParams defaults(SynthProfile profile);
  // Throws std::invalid_argument for out-of-range parameters.
  void validate() const;
  nlohmann::json to_json() const;
  // Unspecified keys keep the profile defaults.
  static SynthParams from_json(const nlohmann::json& j);
};

struct SynthCorpus {
  std::vector<EmailPair> pairs;
  // Parameters, per-topic vocabularies, and the latent topics of every pair.
  nlohmann::json oracle;
};

SynthCorpus synthesize(const SynthParams& params);

// Row k of the chain profile's transition matrix.
std::vector<double> chain_transition_row(const SynthParams& params, uint32_t k);
// Distribution of the customer topic in the chain profile.
std::vector<double> chain_start_distribution(const SynthParams& params);

}  // namespace topicreply

#endif  // TOPICREPLY_SYNTH_H_
