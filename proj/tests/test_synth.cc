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

#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "topicreply/corpus.h"
#include "topicreply/synth.h"

using namespace topicreply;

namespace {

std::set<std::string> word_set(const nlohmann::json& words) {
  std::set<std::string> s;
  for (const auto& w : words) s.insert(w.get<std::string>());
  return s;
}

std::string jsonl(const SynthCorpus& c) {
  std::ostringstream out;
  write_pairs_jsonl(out, c.pairs);
  return out.str();
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("chain transitions match the configured concentration") {
  auto p = SynthParams::defaults(SynthProfile::kChain);
  p.num_topics = 10;
  p.concentration = 0.95;
  p.num_pairs = 3000;
  const auto c = synthesize(p);
  const auto& seqs = c.oracle.at("sentence_topics");
  const auto& first = c.oracle.at("customer_topic");
  size_t forward = 0, total = 0;
  for (size_t i = 0; i < seqs.size(); ++i) {
    uint32_t prev = first[i].get<uint32_t>();
    for (const auto& z : seqs[i]) {
      const auto cur = z.get<uint32_t>();
      forward += cur == (prev + 1) % p.num_topics;
      ++total;
      prev = cur;
    }
  }
  CHECK(std::abs(static_cast<double>(forward) / total - 0.95) <= 0.03);
  for (uint32_t k = 0; k < p.num_topics; ++k) {
    const auto row = chain_transition_row(p, k);
    double s = 0;
    for (double v : row) s += v;
    CHECK(s == doctest::Approx(1.0));
    CHECK(row[(k + 1) % p.num_topics] == doctest::Approx(0.95));
  }
}

TEST_CASE("chain sentences use their topic's vocabulary") {
  auto p = SynthParams::defaults(SynthProfile::kChain);
  p.num_topics = 6;
  p.num_pairs = 50;
  const auto c = synthesize(p);
  std::vector<std::set<std::string>> vocab;
  for (const auto& v : c.oracle.at("vocabularies")) vocab.push_back(word_set(v));
  for (size_t i = 0; i < c.pairs.size(); ++i) {
    const auto sents = segment_sentences(c.pairs[i].agent_text);
    const auto& seq = c.oracle.at("sentence_topics")[i];
    REQUIRE(sents.size() == seq.size());
    for (size_t j = 0; j < sents.size(); ++j) {
      const auto words = tokenize_words(sents[j]);
      CHECK_FALSE(words.empty());
      for (const auto& w : words) CHECK(vocab[seq[j].get<uint32_t>()].count(w) == 1);
    }
  }
}

TEST_CASE("two_vocab documents are pure") {
  const auto c = synthesize(SynthParams::defaults(SynthProfile::kTwoVocab));
  REQUIRE(c.pairs.size() == 400);
  const auto& vocab = c.oracle.at("vocabularies");
  const auto a = word_set(vocab[0]), b = word_set(vocab[1]);
  CHECK(a.size() == 5);
  for (const auto& w : a) CHECK(b.count(w) == 0);
  for (size_t i = 0; i < c.pairs.size(); ++i) {
    const auto& own = c.oracle.at("pair_topic")[i].get<uint32_t>() == 0 ? a : b;
    for (const auto* text : {&c.pairs[i].customer_text, &c.pairs[i].agent_text}) {
      for (const auto& w : tokenize_words(*text)) CHECK(own.count(w) == 1);
    }
  }
}

TEST_CASE("coupled oracle") {
  auto p = SynthParams::defaults(SynthProfile::kCoupled);
  p.num_pairs = 200;
  const auto c = synthesize(p);
  const auto pi = c.oracle.at("permutation").get<std::vector<uint32_t>>();
  REQUIRE(pi.size() == p.num_topics);
  std::set<uint32_t> image(pi.begin(), pi.end());
  CHECK(image.size() == p.num_topics);
  for (uint32_t k = 0; k < pi.size(); ++k) CHECK(pi[k] != k);
  CHECK(c.oracle.at("customer_topic").size() == 200);
  CHECK(c.pairs[0].id == "p000000");
  CHECK(c.pairs[199].id == "p000199");
}

TEST_CASE("generation is seeded") {
  auto p = SynthParams::defaults(SynthProfile::kChain);
  p.num_pairs = 100;
  const auto a = synthesize(p);
  const auto b = synthesize(p);
  CHECK(jsonl(a) == jsonl(b));
  CHECK(a.oracle == b.oracle);
  p.seed = 2;
  CHECK(jsonl(synthesize(p)) != jsonl(a));
}

TEST_CASE("params json and validation") {
  auto p = SynthParams::defaults(SynthProfile::kChain);
  p.concentration = 0.8;
  const auto back = SynthParams::from_json(p.to_json());
  CHECK(back.to_json() == p.to_json());
  CHECK(SynthParams::from_json({{"profile", "coupled"}}).to_json() ==
        SynthParams::defaults(SynthProfile::kCoupled).to_json());

  auto bad = p;
  bad.concentration = 1.5;
  CHECK_THROWS_AS(synthesize(bad), std::invalid_argument);
  bad = p;
  bad.num_topics = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.residual = {{1, 1.0}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  auto tv = SynthParams::defaults(SynthProfile::kTwoVocab);
  tv.num_topics = 3;
  CHECK_THROWS_AS(tv.validate(), std::invalid_argument);
  CHECK_THROWS_AS(parse_profile("nope"), std::invalid_argument);
}

}  // TEST_SUITE
