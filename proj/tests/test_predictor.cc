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
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "doctest.h"
#include "topicreply/common.h"
#include "topicreply/corpus.h"
#include "topicreply/predictor.h"
#include "topicreply/silver.h"
#include "topicreply/synth.h"
#include "topicreply/topic_model.h"

using namespace topicreply;

namespace {

FeatureConfig words_only() {
  FeatureConfig f;
  f.customer_words = true;
  f.customer_topics = false;
  f.sentence_words = false;
  f.sentence_topics = false;
  f.position = false;
  return f;
}

// Dense reference objective, written independently of the library:
// mean_i sum_c y_ic log(y_ic / softmax(W x_i)_c) + l2 sum W^2.
double reference_objective(const std::vector<double>& w, uint32_t classes,
                           const std::vector<LabeledExample>& ex, double l2) {
  double total = 0;
  for (const auto& e : ex) {
    std::vector<double> s(classes, 0.0);
    for (size_t n = 0; n < e.x.nnz(); ++n) {
      for (uint32_t c = 0; c < classes; ++c) s[c] += w[e.x.index[n] * classes + c] * e.x.value[n];
    }
    const double mx = *std::max_element(s.begin(), s.end());
    double z = 0;
    for (double v : s) z += std::exp(v - mx);
    for (uint32_t c = 0; c < classes; ++c) {
      const double logq = s[c] - mx - std::log(z);
      if (e.target[c] > 0) total += e.target[c] * (std::log(e.target[c]) - logq);
    }
  }
  double reg = 0;
  for (double v : w) reg += v * v;
  return total / static_cast<double>(ex.size()) + l2 * reg;
}

std::vector<double> random_simplex(Rng& rng, size_t n) {
  std::vector<double> p(n);
  for (auto& x : p) x = -std::log(1.0 - uniform01(rng));
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& x : p) x /= s;
  return p;
}

// Pairs whose agent sentences carry the given dominant topics. Tokens are
// arbitrary ids below `vocab`.
struct Labeled {
  std::vector<TokenizedPair> pairs;
  std::vector<SilverAnnotation> ann;
};

void add_email(Labeled& l, const std::vector<uint32_t>& dominants, uint32_t m, uint32_t vocab) {
  TokenizedPair p;
  p.id = "e" + std::to_string(l.pairs.size());
  p.customer.tokens = {0, 1 % vocab};
  p.customer.sentences = {{0, 2}};
  SilverAnnotation a;
  a.id = p.id;
  a.tau_ca_customer = TopicDistribution::uniform(m);
  a.tau_ca_agent = TopicDistribution::uniform(m);
  for (size_t j = 0; j < dominants.size(); ++j) {
    const auto begin = static_cast<uint32_t>(p.agent.tokens.size());
    p.agent.tokens.push_back(dominants[j] % vocab);
    p.agent.sentences.push_back({begin, begin + 1});
    std::vector<double> tau(m, 0.2 / (m - 1));
    tau[dominants[j]] = 0.8;
    SentenceLabel s;
    s.j = static_cast<uint32_t>(j);
    s.tau_s = TopicDistribution(tau);
    s.dominant = dominants[j];
    s.peaked = true;
    a.sentences.push_back(s);
  }
  l.pairs.push_back(std::move(p));
  l.ann.push_back(std::move(a));
}

}  // namespace

TEST_SUITE("predictor") {

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(2024);
  const uint32_t classes = 3;
  const auto layout = FeatureLayout::make(words_only(), 4, 3);
  REQUIRE(layout.dim() == 5);
  for (int instance = 0; instance < 20; ++instance) {
    std::vector<LabeledExample> ex;
    for (int i = 0; i < 6; ++i) {
      FeatureVector x;
      for (uint32_t f = 0; f < 5; ++f) {
        if (f == 4 || uniform01(rng) < 0.7) {
          x.index.push_back(f);
          x.value.push_back(f == 4 ? 1.0 : 2 * uniform01(rng) - 1);
        }
      }
      ex.push_back({x, random_simplex(rng, classes)});
    }
    std::vector<double> w(5 * classes);
    for (auto& v : w) v = 2 * uniform01(rng) - 1;
    const double l2 = 0.01 * uniform01(rng);
    const SoftmaxRegressor model(layout, classes, w);

    CHECK(kl_objective(model, ex, l2) ==
          doctest::Approx(reference_objective(w, classes, ex, l2)).epsilon(1e-12));

    const auto g = kl_gradient(model, ex, l2);
    const double h = 1e-5;
    double diff = 0, norm_g = 0, norm_fd = 0;
    for (size_t i = 0; i < w.size(); ++i) {
      auto wp = w, wm = w;
      wp[i] += h;
      wm[i] -= h;
      const double fd = (reference_objective(wp, classes, ex, l2) -
                         reference_objective(wm, classes, ex, l2)) / (2 * h);
      diff += (g[i] - fd) * (g[i] - fd);
      norm_g += g[i] * g[i];
      norm_fd += fd * fd;
    }
    const double rel = std::sqrt(diff) / std::max(std::sqrt(std::max(norm_g, norm_fd)), 1e-12);
    CHECK(rel < 1e-4);
  }
}

TEST_CASE("softmax is shift invariant and normalized") {
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> s(7);
    for (auto& x : s) x = 50 * (uniform01(rng) - 0.5);
    auto shifted = s;
    const double c = 100 * (uniform01(rng) - 0.5);
    for (auto& x : shifted) x += c;
    const auto a = softmax(s);
    const auto b = softmax(shifted);
    CHECK(std::accumulate(a.begin(), a.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (size_t k = 0; k < a.size(); ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-9));
  }
}

TEST_CASE("kl divergence conventions") {
  CHECK(kl_divergence(std::vector<double>{0.5, 0.5}, std::vector<double>{0.5, 0.5}) == 0.0);
  CHECK(kl_divergence(std::vector<double>{1.0, 0.0}, std::vector<double>{0.5, 0.5}) ==
        doctest::Approx(std::log(2.0)));
  CHECK(std::isinf(kl_divergence(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0, 0.0})));
}

TEST_CASE("zero weights predict uniform and give KL to uniform") {
  const auto layout = FeatureLayout::make(words_only(), 4, 3);
  const SoftmaxRegressor model(layout, 3);
  FeatureVector x{{0, 2, 4}, {0.5, 1.0, 1.0}};
  const auto p = model.predict(x);
  for (size_t k = 0; k < 3; ++k) CHECK(p[k] == doctest::Approx(1.0 / 3).epsilon(1e-15));
  const std::vector<double> y = {0.7, 0.2, 0.1};
  const std::vector<LabeledExample> ex = {{x, y}};
  const std::vector<double> u(3, 1.0 / 3);
  CHECK(kl_objective(model, ex, 0.5) == kl_divergence(y, u));
}

TEST_CASE("position buckets") {
  const std::vector<uint32_t> expect = {0, 1, 2, 3, 4, 5, 5, 5, 6, 6, 6};
  for (uint32_t j = 0; j < expect.size(); ++j) CHECK(position_bucket(j) == expect[j]);
  CHECK(position_bucket(1000) == 6);
}

TEST_CASE("feature layout blocks are contiguous") {
  const auto layout = FeatureLayout::make(FeatureConfig{}, 100, 8);
  uint32_t offset = 0;
  for (const auto& b : layout.blocks()) {
    CHECK(b.offset == offset);
    offset += b.size;
  }
  CHECK(offset == layout.dim());
  CHECK(layout.dim() == 100 + 8 + 100 + 8 + kPositionBuckets + 1);
  CHECK(FeatureLayout::from_json(layout.to_json()) == layout);
  const auto first = FeatureLayout::customer_only(FeatureConfig{}, 100, 8);
  CHECK_FALSE(first.has(FeatureBlock::kSentenceWords));
  CHECK_FALSE(first.has(FeatureBlock::kSentenceTopics));
  CHECK_FALSE(first.has(FeatureBlock::kPosition));
  CHECK(first.has(FeatureBlock::kBias));
}

TEST_CASE("feature encoding") {
  const auto layout = FeatureLayout::make(FeatureConfig{}, 10, 4);
  const std::vector<uint32_t> customer = {3, 1, 3, 42};
  const std::vector<uint32_t> sentence = {2};
  const TopicDistribution ctau({0.1, 0.2, 0.3, 0.4});
  const TopicDistribution stau({0.1, 0.6, 0.2, 0.1});
  FeatureContext ctx{customer, &ctau, sentence, &stau, 6};
  const auto x = encode_features(layout, ctx);
  for (size_t i = 1; i < x.nnz(); ++i) CHECK(x.index[i - 1] < x.index[i]);
  auto value_at = [&](uint32_t idx) {
    for (size_t i = 0; i < x.nnz(); ++i) {
      if (x.index[i] == idx) return x.value[i];
    }
    return 0.0;
  };
  const auto* cw = layout.find(FeatureBlock::kCustomerWords);
  CHECK(value_at(cw->offset + 3) == doctest::Approx(std::log1p(2.0)));
  CHECK(value_at(cw->offset + 1) == doctest::Approx(std::log1p(1.0)));
  const auto* ct = layout.find(FeatureBlock::kCustomerTopics);
  CHECK(value_at(ct->offset + 3) == doctest::Approx(0.4));
  const auto* st = layout.find(FeatureBlock::kSentenceTopics);
  CHECK(value_at(st->offset + 1) == 1.0);
  CHECK(value_at(st->offset + 0) == 0.0);
  const auto* pos = layout.find(FeatureBlock::kPosition);
  CHECK(value_at(pos->offset + 5) == 1.0);
  CHECK(value_at(layout.find(FeatureBlock::kBias)->offset) == 1.0);

  FeatureContext missing{customer, nullptr, sentence, &stau, 0};
  CHECK_THROWS(encode_features(layout, missing));
}

TEST_CASE("one repeated example is fitted") {
  const auto layout = FeatureLayout::make(words_only(), 4, 3);
  const std::vector<double> y = {0.6, 0.3, 0.1};
  std::vector<LabeledExample> ex(20, {FeatureVector{{1, 4}, {1.0, 1.0}}, y});
  SgdOptions o;
  o.epochs = 50;
  o.l2 = 1e-6;
  const auto model = train_softmax(layout, 3, ex, o);
  const auto p = model.predict(ex[0].x);
  CHECK(kl_divergence(y, p.probs()) < 1e-3);
}

TEST_CASE("stronger regularization pulls predictions to uniform") {
  const auto layout = FeatureLayout::make(words_only(), 4, 3);
  std::vector<LabeledExample> ex(30, {FeatureVector{{0, 4}, {1.0, 1.0}}, {0.9, 0.05, 0.05}});
  double last = std::numeric_limits<double>::infinity();
  for (double l2 : {1e-4, 0.1, 1.0, 4.0}) {
    SgdOptions o;
    o.l2 = l2;
    o.epochs = 30;
    const auto model = train_softmax(layout, 3, ex, o);
    double norm = 0;
    for (double w : model.weights()) norm += w * w;
    CHECK(norm < last);
    last = norm;
  }
  CHECK(last < 0.05);
}

TEST_CASE("objective does not increase over epochs with a small step") {
  Rng rng(8);
  const auto layout = FeatureLayout::make(words_only(), 4, 3);
  std::vector<LabeledExample> ex;
  for (int i = 0; i < 40; ++i) {
    FeatureVector x{{static_cast<uint32_t>(i % 4), 4}, {1.0, 1.0}};
    ex.push_back({x, random_simplex(rng, 3)});
  }
  SgdOptions o;
  o.learning_rate = 0.01;
  o.epochs = 15;
  o.shuffle = false;
  TrainTrace trace;
  train_softmax(layout, 3, ex, o, &trace);
  REQUIRE(trace.epoch_objective.size() == 15);
  for (size_t e = 1; e < trace.epoch_objective.size(); ++e) {
    CHECK(trace.epoch_objective[e] <= trace.epoch_objective[e - 1] + 1e-12);
  }
}

TEST_CASE("training is seeded and rejects mismatched examples") {
  Rng rng(3);
  const auto layout = FeatureLayout::make(words_only(), 4, 3);
  std::vector<LabeledExample> ex;
  for (int i = 0; i < 30; ++i) ex.push_back({FeatureVector{{static_cast<uint32_t>(i % 4), 4}, {1.0, 1.0}}, random_simplex(rng, 3)});
  const auto a = train_softmax(layout, 3, ex, SgdOptions{});
  const auto b = train_softmax(layout, 3, ex, SgdOptions{});
  CHECK(std::equal(a.weights().begin(), a.weights().end(), b.weights().begin()));
  std::vector<LabeledExample> bad = {{FeatureVector{{9}, {1.0}}, {1.0, 0.0, 0.0}}};
  CHECK_THROWS_AS(train_softmax(layout, 3, bad, SgdOptions{}), std::invalid_argument);
  std::vector<LabeledExample> wrong_classes = {{FeatureVector{{0}, {1.0}}, {1.0, 0.0}}};
  CHECK_THROWS_AS(train_softmax(layout, 3, wrong_classes, SgdOptions{}), std::invalid_argument);
}

TEST_CASE("predictions are valid distributions for arbitrary inputs") {
  Rng rng(12);
  const auto layout = FeatureLayout::make(FeatureConfig{}, 20, 5);
  std::vector<double> w(static_cast<size_t>(layout.dim()) * 5);
  for (auto& v : w) v = 40 * (uniform01(rng) - 0.5);
  const SoftmaxRegressor model(layout, 5, w);
  for (int t = 0; t < 300; ++t) {
    std::vector<uint32_t> ctoks(uniform_index(rng, 15)), stoks(uniform_index(rng, 8));
    for (auto& x : ctoks) x = static_cast<uint32_t>(uniform_index(rng, 40));
    for (auto& x : stoks) x = static_cast<uint32_t>(uniform_index(rng, 40));
    const TopicDistribution ct(random_simplex(rng, 5)), st(random_simplex(rng, 5));
    const auto p = model.predict(encode_features(
        layout, {ctoks, &ct, stoks, &st, static_cast<uint32_t>(uniform_index(rng, 12))}));
    double s = 0;
    for (double x : p.probs()) {
      CHECK(x >= 0);
      s += x;
    }
    CHECK(std::abs(s - 1) < 1e-9);
  }
}

TEST_CASE("sparse family members route to the fallback") {
  Labeled l;
  const uint32_t m = 4;
  // 0 -> 1 transitions are plentiful; topic 2 is current in only 10 of them.
  for (int i = 0; i < 60; ++i) add_email(l, {0, 1}, m, 8);
  for (int i = 0; i < 10; ++i) add_email(l, {2, 3}, m, 8);
  PredictorConfig config;
  const auto transitions = transition_pairs(l.ann);
  const auto models = train_t2(l.pairs, l.ann, transitions, config, 8);
  CHECK(models.family.count(0) == 1);
  CHECK(models.family.count(2) == 0);
  for (const auto& [k, member] : models.family) {
    CHECK(k < m);
    CHECK(member.layout() == models.family.begin()->second.layout());
  }
  CHECK_FALSE(models.first.layout().has(FeatureBlock::kSentenceWords));
  CHECK_FALSE(models.first.layout().has(FeatureBlock::kSentenceTopics));

  const auto& ann = l.ann.back();
  const auto& pair = l.pairs.back();
  NextContext ctx;
  ctx.customer_tokens = pair.customer.tokens;
  ctx.customer_tau = &ann.tau_ca_customer;
  ctx.last_sentence_tokens = pair.agent.sentence(0);
  ctx.last_sentence_tau = &ann.sentences[0].tau_s;
  ctx.sentences_so_far = 1;
  const auto pred = predict_next(models, ctx);
  CHECK(pred.route == NextRoute::kFallback);
  CHECK(pred.family_key == 2);

  ctx.last_sentence_tau = &l.ann[0].sentences[0].tau_s;
  const auto fam = predict_next(models, ctx);
  CHECK(fam.route == NextRoute::kFamily);
  CHECK(fam.family_key == 0);

}

TEST_CASE("first position uses the first-sentence model") {
  Labeled l;
  for (int i = 0; i < 60; ++i) add_email(l, {static_cast<uint32_t>(i % 3), 1, 2}, 3, 6);
  PredictorConfig config;
  const auto models = train_t2(l.pairs, l.ann, transition_pairs(l.ann), config, 6);
  NextContext ctx;
  ctx.customer_tokens = l.pairs[0].customer.tokens;
  ctx.customer_tau = &l.ann[0].tau_ca_customer;
  const auto pred = predict_next(models, ctx);
  CHECK(pred.route == NextRoute::kFirstSentence);
  const auto direct = models.first.predict(encode_features(
      models.first.layout(), {ctx.customer_tokens, ctx.customer_tau, {}, nullptr, 0}));
  CHECK(pred.dist == direct);
}

TEST_CASE("deterministic chain is learned by the family") {
  SynthParams p = SynthParams::defaults(SynthProfile::kChain);
  p.num_topics = 5;
  p.num_pairs = 500;
  p.concentration = 1.0;
  p.seed = 6;
  const auto corpus = synthesize(p);
  std::vector<std::vector<std::string>> words;
  for (const auto& e : corpus.pairs) {
    words.push_back(tokenize_words(e.customer_text));
    words.push_back(tokenize_words(e.agent_text));
  }
  const auto vocab = Vocabulary::build(words, Vocabulary::BuildOptions{2, 20000});
  const auto pairs = tokenize_pairs(corpus.pairs, vocab);
  LdaOptions o;
  o.num_topics = 5;
  o.sweeps = 100;
  const auto ca = train_lda(build_documents(pairs, View::kConcat), vocab.words(), View::kConcat, o);
  const auto s = train_lda(build_documents(pairs, View::kSentence), vocab.words(), View::kSentence, o);
  const auto ann = annotate(pairs, ca, s);
  const size_t n_train = 400;
  const std::span<const TokenizedPair> train_pairs(pairs.data(), n_train);
  const std::span<const SilverAnnotation> train_ann(ann.data(), n_train);
  PredictorConfig config;
  const auto models = train_t2(train_pairs, train_ann, transition_pairs(train_ann), config, vocab.size());

  size_t hit = 0, total = 0;
  for (size_t i = n_train; i < pairs.size(); ++i) {
    for (size_t j = 1; j < ann[i].sentences.size(); ++j) {
      NextContext ctx;
      ctx.customer_tokens = pairs[i].customer.tokens;
      ctx.customer_tau = &ann[i].tau_ca_customer;
      ctx.last_sentence_tokens = pairs[i].agent.sentence(j - 1);
      ctx.last_sentence_tau = &ann[i].sentences[j - 1].tau_s;
      ctx.sentences_so_far = static_cast<uint32_t>(j);
      const auto pred = predict_next(models, ctx);
      CHECK(pred.family_key == ann[i].sentences[j - 1].dominant);
      hit += dominant_topic(pred.dist).topic == ann[i].sentences[j].dominant;
      ++total;
    }
  }
  REQUIRE(total > 0);
  CHECK(static_cast<double>(hit) / total >= 0.95);
}

TEST_CASE("suite containers round-trip bit-exactly") {
  Labeled l;
  for (int i = 0; i < 70; ++i) add_email(l, {static_cast<uint32_t>(i % 2), 1, 0}, 3, 6);
  PredictorConfig config;
  auto suite = train_suite(l.pairs, l.ann, config, 6);
  suite.config_hash = "abc";
  const auto bytes = save_suite(suite);
  const auto back = load_suite(bytes);
  CHECK(save_suite(back) == bytes);
  CHECK(back.config_hash == "abc");
  CHECK(back.t2.family.size() == suite.t2.family.size());
  CHECK(std::equal(back.t1.weights().begin(), back.t1.weights().end(), suite.t1.weights().begin()));
}

TEST_CASE("baselines") {
  const auto u = baseline_uniform(50);
  for (size_t k = 0; k < 50; ++k) CHECK(u[k] == doctest::Approx(0.02).epsilon(1e-15));
  CHECK(baseline_uniform(2).vec() == std::vector<double>{0.5, 0.5});
  CHECK_THROWS_AS(baseline_uniform(0), std::invalid_argument);
  CHECK(dominant_topic(baseline_uniform(7)).topic == 0);

  const TopicModel model(View::kSentence, {2.0, 1.0, 1.0}, 0.01, {"x"}, {1, 1, 1}, 1, 1);
  const auto avg = baseline_average(model);
  CHECK(avg[0] == doctest::Approx(0.5));
  CHECK(avg[1] == doctest::Approx(0.25));
  const TopicModel sym(View::kSentence, {0.1, 0.1, 0.1, 0.1}, 0.01, {"x"}, {1, 1, 1, 1}, 1, 1);
  const auto flat = baseline_average(sym);
  for (double p : flat.probs()) CHECK(p == doctest::Approx(0.25));

  const TopicDistribution c({0.7, 0.3});
  CHECK(baseline_copy_customer(c) == c);
  CHECK(baseline_copy_customer(baseline_copy_customer(c)) == c);
}

TEST_CASE("ablation subsets") {
  const auto subsets = t2_ablation_subsets();
  REQUIRE(subsets.size() == 5);
  CHECK(subsets[0].name == "words");
  CHECK_FALSE(subsets[0].features.sentence_topics);
  CHECK(subsets.back().name == "topics+words+position");
  CHECK(subsets.back().features == FeatureConfig{});
  CHECK(FeatureConfig::from_json(subsets[2].features.to_json()) == subsets[2].features);
}

}  // TEST_SUITE
