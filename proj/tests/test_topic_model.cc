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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "topicreply/common.h"
#include "topicreply/corpus.h"
#include "topicreply/topic_model.h"

using namespace topicreply;

namespace {

// Ids 0..4 are a1..a5, 5..9 are b1..b5. Every document draws from one set.
struct TwoVocab {
  std::vector<std::string> vocabulary;
  std::vector<Document> docs;
  std::vector<int> side;  // 0 = a, 1 = b
};

TwoVocab two_vocab_docs(size_t per_side, uint64_t seed) {
  TwoVocab t;
  for (const char* p : {"a", "b"}) {
    for (int i = 1; i <= 5; ++i) t.vocabulary.push_back(p + std::to_string(i));
  }
  Rng rng(seed);
  for (size_t d = 0; d < 2 * per_side; ++d) {
    const int side = static_cast<int>(d % 2);
    Document doc;
    const size_t n = 8 + uniform_index(rng, 5);
    for (size_t i = 0; i < n; ++i) doc.push_back(static_cast<uint32_t>(side * 5 + uniform_index(rng, 5)));
    t.docs.push_back(doc);
    t.side.push_back(side);
  }
  return t;
}

std::set<uint32_t> top_ids(const TopicModel& model, uint32_t k, size_t n) {
  std::vector<uint32_t> ids(model.vocab_size());
  std::iota(ids.begin(), ids.end(), 0);
  std::stable_sort(ids.begin(), ids.end(),
                   [&](uint32_t a, uint32_t b) { return model.phi(k, a) > model.phi(k, b); });
  return {ids.begin(), ids.begin() + static_cast<long>(n)};
}

const std::set<uint32_t> kSetA = {0, 1, 2, 3, 4};
const std::set<uint32_t> kSetB = {5, 6, 7, 8, 9};

TopicModel train_two_vocab(uint64_t seed = 1, uint32_t sweeps = 200) {
  const auto t = two_vocab_docs(200, 17);
  LdaOptions o;
  o.num_topics = 2;
  o.sweeps = sweeps;
  o.seed = seed;
  return train_lda(t.docs, t.vocabulary, View::kCustomer, o);
}

// Topic index that holds vocabulary set A.
uint32_t topic_of_a(const TopicModel& m) { return top_ids(m, 0, 5) == kSetA ? 0 : 1; }

}  // namespace

TEST_SUITE("topic_model") {

TEST_CASE("two-vocabulary corpus is recovered under best matching") {
  const auto model = train_two_vocab();
  const auto t0 = top_ids(model, 0, 5);
  const auto t1 = top_ids(model, 1, 5);
  const bool direct = t0 == kSetA && t1 == kSetB;
  const bool swapped = t0 == kSetB && t1 == kSetA;
  CHECK((direct || swapped));
}

TEST_CASE("counts and totals agree after training") {
  const auto t = two_vocab_docs(50, 3);
  LdaOptions o;
  o.num_topics = 4;
  o.sweeps = 30;
  const auto model = train_lda(t.docs, t.vocabulary, View::kAgent, o);
  uint64_t tokens = 0;
  for (const auto& d : t.docs) tokens += d.size();
  uint64_t sum_totals = 0;
  for (uint32_t k = 0; k < model.num_topics(); ++k) {
    uint64_t row = 0;
    for (uint32_t w = 0; w < model.vocab_size(); ++w) row += model.count(k, w);
    CHECK(row == model.topic_total(k));
    sum_totals += row;
  }
  CHECK(sum_totals == tokens);
  for (double a : model.alpha()) CHECK(a > 0);
}

TEST_CASE("training contract") {
  const auto t = two_vocab_docs(5, 3);
  LdaOptions o;
  o.num_topics = 2;
  o.sweeps = 0;
  CHECK_THROWS_AS(train_lda(t.docs, t.vocabulary, View::kCustomer, o), std::invalid_argument);
  o.sweeps = 5;
  o.num_topics = 1;
  CHECK_THROWS_AS(train_lda(t.docs, t.vocabulary, View::kCustomer, o), std::invalid_argument);
  o.num_topics = 2;
  CHECK_THROWS_AS(train_lda(std::vector<Document>{}, t.vocabulary, View::kCustomer, o), Error);
  CHECK_THROWS_AS(train_lda(std::vector<Document>{{}, {}}, t.vocabulary, View::kCustomer, o), Error);
  CHECK_THROWS(train_lda(std::vector<Document>{{99}}, t.vocabulary, View::kCustomer, o));
}

TEST_CASE("same seed gives byte-identical models") {
  const auto a = train_two_vocab(5, 40);
  const auto b = train_two_vocab(5, 40);
  CHECK(save_topic_model(a) == save_topic_model(b));
  const auto c = train_two_vocab(6, 40);
  CHECK(save_topic_model(a) != save_topic_model(c));
}

TEST_CASE("save and load round-trip bit-exactly") {
  const auto model = train_two_vocab(2, 20);
  const auto bytes = save_topic_model(model);
  const auto back = load_topic_model(bytes);
  CHECK(save_topic_model(back) == bytes);
  CHECK(back.alpha() == model.alpha());
  CHECK(back.vocabulary() == model.vocabulary());
  CHECK(back.view() == model.view());
  std::string corrupt = bytes;
  corrupt[corrupt.size() - 1] ^= 1;
  CHECK_THROWS(load_topic_model(corrupt));
}

TEST_CASE("infer recovers the generating topic") {
  const auto model = train_two_vocab();
  const uint32_t a = topic_of_a(model);
  const std::vector<uint32_t> doc = {0, 1, 2, 3, 4, 0, 2, 4};
  const auto tau = infer(model, doc);
  // Every token goes to topic a, so tau[a] is (N + alpha_a) / (N + sum alpha).
  const double expected = (doc.size() + model.alpha()[a]) / (doc.size() + model.alpha_sum());
  CHECK(std::abs(tau[a] - expected) < 0.01);
}

TEST_CASE("infer on an empty document returns the normalized prior") {
  const auto model = train_two_vocab(1, 20);
  const auto tau = infer(model, std::vector<uint32_t>{});
  const double s = model.alpha_sum();
  for (uint32_t k = 0; k < model.num_topics(); ++k) CHECK(tau[k] == doctest::Approx(model.alpha()[k] / s).epsilon(1e-12));
}

TEST_CASE("a word shared equally by every topic infers uniform") {
  // Same count for word 0 and the same total in all three topics, symmetric
  // alpha: each topic is equally likely in every sweep.
  const TopicModel model(View::kSentence, {0.5, 0.5, 0.5}, 0.01, {"w", "x"},
                         {4, 1, 4, 1, 4, 1}, 1, 1);
  const auto tau = infer(model, std::vector<uint32_t>{0}, {20, 3000});
  for (uint32_t k = 0; k < 3; ++k) CHECK(std::abs(tau[k] - 1.0 / 3) < 0.02);
}

TEST_CASE("infer is a valid distribution for many random documents") {
  const auto model = train_two_vocab(1, 20);
  Rng rng(99);
  for (int i = 0; i < 1000; ++i) {
    std::vector<uint32_t> doc(uniform_index(rng, 30));
    for (auto& w : doc) w = static_cast<uint32_t>(uniform_index(rng, 10));
    const auto tau = infer(model, doc, {5, 3});
    double s = 0;
    for (double p : tau.probs()) {
      CHECK(p >= 0);
      s += p;
    }
    CHECK(std::abs(s - 1.0) < 1e-9);
  }
}

TEST_CASE("infer of a document does not depend on what else is inferred") {
  const auto model = train_two_vocab(1, 20);
  const std::vector<std::vector<uint32_t>> docs = {{0, 5, 1}, {6, 7, 8, 2}, {3, 3, 9}};
  std::vector<TopicDistribution> forward, backward(docs.size());
  for (const auto& d : docs) forward.push_back(infer(model, d));
  for (size_t i = docs.size(); i-- > 0;) backward[i] = infer(model, docs[i]);
  CHECK(forward == backward);
}

TEST_CASE("phi rows sum to one") {
  const auto model = train_two_vocab(1, 20);
  for (uint32_t k = 0; k < model.num_topics(); ++k) {
    double s = 0;
    for (uint32_t w = 0; w < model.vocab_size(); ++w) s += model.phi(k, w);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("dominant topic and peakedness rule") {
  auto d = dominant_topic(std::vector<double>{0.6, 0.2, 0.1, 0.1});
  CHECK(d.topic == 0);
  CHECK(d.peaked);
  d = dominant_topic(std::vector<double>{0.55, 0.35, 0.10});
  CHECK(d.topic == 0);
  CHECK_FALSE(d.peaked);
  d = dominant_topic(std::vector<double>{0.5, 0.5});
  CHECK(d.topic == 0);
  CHECK_FALSE(d.peaked);
  d = dominant_topic(std::vector<double>{0.2, 0.8});
  CHECK(d.topic == 1);
  CHECK(d.peaked);
}

TEST_CASE("dominant topic ignores positive rescaling of scores") {
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> w(6);
    for (auto& x : w) x = uniform01(rng) + 1e-3;
    const double c = 0.01 + 100 * uniform01(rng);
    std::vector<double> scaled = w;
    for (auto& x : scaled) x *= c;
    const auto a = dominant_topic(TopicDistribution::normalized(w));
    const auto b = dominant_topic(TopicDistribution::normalized(scaled));
    CHECK(a.topic == b.topic);
    CHECK(a.peaked == b.peaked);
  }
}

TEST_CASE("peakedness rate") {
  std::vector<TopicDistribution> deltas(5, TopicDistribution({0.0, 1.0, 0.0}));
  CHECK(peakedness_rate(deltas) == 1.0);
  std::vector<TopicDistribution> flat(5, TopicDistribution::uniform(4));
  CHECK(peakedness_rate(flat) == 0.0);
  CHECK_THROWS_AS(peakedness_rate(std::vector<TopicDistribution>{}), Error);
}

TEST_CASE("sentence model on one-topic sentences is mostly peaked") {
  const auto t = two_vocab_docs(200, 8);
  LdaOptions o;
  o.num_topics = 2;
  o.sweeps = 100;
  const auto model = train_lda(t.docs, t.vocabulary, View::kSentence, o);
  std::vector<TopicDistribution> dists;
  for (const auto& d : t.docs) dists.push_back(infer(model, d));
  CHECK(peakedness_rate(dists) >= 0.9);
}

TEST_CASE("distribution contract") {
  CHECK_THROWS_AS(TopicDistribution({0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(TopicDistribution({-0.1, 1.1}), std::invalid_argument);
  CHECK_THROWS_AS(TopicDistribution::uniform(0), std::invalid_argument);
  CHECK(TopicDistribution::uniform(4)[3] == 0.25);
  CHECK(ranked_topics(std::vector<double>{0.2, 0.5, 0.2, 0.1}, 3) == std::vector<uint32_t>{1, 0, 2});
}

TEST_CASE("build_documents per view") {
  const std::vector<std::vector<std::string>> words = {{"alpha", "beta", "gamma", "delta"}};
  const auto vocab = Vocabulary::build(words, {1, 100});
  std::vector<EmailPair> pairs;
  for (int i = 0; i < 100; ++i) {
    pairs.push_back({"p" + std::to_string(i), "Alpha beta here.",
                     "Gamma one. Delta two. Alpha three."});
  }
  const auto tok = tokenize_pairs(pairs, vocab);
  CHECK(build_documents(tok, View::kCustomer).size() == 100);
  CHECK(build_documents(tok, View::kAgent).size() == 100);
  const auto s = build_documents(std::span(tok).first(1), View::kSentence);
  CHECK(s.size() == 3);
  const auto ca = build_documents(std::span(tok).first(1), View::kConcat);
  CHECK(ca[0].size() == tok[0].customer.tokens.size() + tok[0].agent.tokens.size());
  CHECK_THROWS_AS(parse_view("X"), std::invalid_argument);
  CHECK(parse_view("CA") == View::kConcat);
}

TEST_CASE("describe topics lists the generating words") {
  const auto t = two_vocab_docs(200, 17);
  const auto model = train_two_vocab();
  const uint32_t a = topic_of_a(model);
  DescribeOptions opts;
  opts.top_words = 5;
  const auto desc = describe_topics(model, t.docs, opts);
  REQUIRE(desc.size() == 2);
  for (const auto& w : desc[a].top_words) CHECK(w[0] == 'a');
  for (const auto& p : desc[a].top_phrases) {
    CHECK(p[0] == 'a');
    CHECK(p.find(' ') != std::string::npos);
  }
  CHECK(std::set<std::string>(desc[a].top_words.begin(), desc[a].top_words.end()).size() == 5);
  opts.top_words = 0;
  for (const auto& d : describe_topics(model, t.docs, opts)) CHECK(d.top_words.empty());
  const auto j = descriptors_to_json(desc);
  const auto back = descriptors_from_json(j);
  CHECK(back.size() == 2);
  CHECK(back[a].top_words == desc[a].top_words);
}

}  // TEST_SUITE
