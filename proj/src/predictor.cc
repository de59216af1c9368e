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

#include "topicreply/predictor.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "topicreply/common.h"
#include "topicreply/container.h"

namespace topicreply {

using nlohmann::json;

json FeatureConfig::to_json() const {
  return {{"customer_words", customer_words},   {"customer_topics", customer_topics},
          {"sentence_words", sentence_words},   {"sentence_topics", sentence_topics},
          {"position", position},               {"full_sentence_tau", full_sentence_tau}};
}

FeatureConfig FeatureConfig::from_json(const json& j) {
  FeatureConfig c;
  c.customer_words = j.value("customer_words", c.customer_words);
  c.customer_topics = j.value("customer_topics", c.customer_topics);
  c.sentence_words = j.value("sentence_words", c.sentence_words);
  c.sentence_topics = j.value("sentence_topics", c.sentence_topics);
  c.position = j.value("position", c.position);
  c.full_sentence_tau = j.value("full_sentence_tau", c.full_sentence_tau);
  return c;
}

std::vector<NamedFeatureSubset> t2_ablation_subsets() {
  auto make = [](bool words, bool topics, bool position) {
    FeatureConfig c;
    c.customer_words = c.sentence_words = words;
    c.customer_topics = c.sentence_topics = topics;
    c.position = position;
    return c;
  };
  return {{"words", make(true, false, false)},
          {"words+position", make(true, false, true)},
          {"topics", make(false, true, false)},
          {"topics+words", make(true, true, false)},
          {"topics+words+position", make(true, true, true)}};
}

FeatureConfig t1_default_features() {
  FeatureConfig c;
  c.sentence_words = false;
  c.sentence_topics = false;
  c.position = false;
  return c;
}

std::string_view block_name(FeatureBlock block) {
  switch (block) {
    case FeatureBlock::kCustomerWords: return "customer_words";
    case FeatureBlock::kCustomerTopics: return "customer_topics";
    case FeatureBlock::kSentenceWords: return "sentence_words";
    case FeatureBlock::kSentenceTopics: return "sentence_topics";
    case FeatureBlock::kPosition: return "position";
    case FeatureBlock::kBias: return "bias";
  }
  return "?";
}

namespace {

FeatureBlock parse_block(std::string_view name) {
  for (auto b : {FeatureBlock::kCustomerWords, FeatureBlock::kCustomerTopics,
                 FeatureBlock::kSentenceWords, FeatureBlock::kSentenceTopics,
                 FeatureBlock::kPosition, FeatureBlock::kBias}) {
    if (block_name(b) == name) return b;
  }
  throw Error("unknown feature block: " + std::string(name));
}

}  // namespace

uint32_t position_bucket(uint32_t j) {
  if (j <= 4) return j;
  if (j <= 7) return 5;
  return 6;
}

void FeatureLayout::add(FeatureBlock kind, uint32_t size) {
  blocks_.push_back({kind, dim_, size});
  dim_ += size;
}

FeatureLayout FeatureLayout::make(const FeatureConfig& config, uint32_t word_dims,
                                  uint32_t num_topics) {
  FeatureLayout l;
  l.word_dims_ = word_dims;
  l.num_topics_ = num_topics;
  l.full_sentence_tau_ = config.sentence_topics && config.full_sentence_tau;
  if (config.customer_words) l.add(FeatureBlock::kCustomerWords, word_dims);
  if (config.customer_topics) l.add(FeatureBlock::kCustomerTopics, num_topics);
  if (config.sentence_words) l.add(FeatureBlock::kSentenceWords, word_dims);
  if (config.sentence_topics) l.add(FeatureBlock::kSentenceTopics, num_topics);
  if (config.position) l.add(FeatureBlock::kPosition, kPositionBuckets);
  l.add(FeatureBlock::kBias, 1);
  return l;
}

FeatureLayout FeatureLayout::customer_only(const FeatureConfig& config, uint32_t word_dims,
                                           uint32_t num_topics) {
  FeatureConfig c = config;
  c.sentence_words = c.sentence_topics = c.position = false;
  return make(c, word_dims, num_topics);
}

const FeatureLayout::Block* FeatureLayout::find(FeatureBlock kind) const {
  for (const auto& b : blocks_) {
    if (b.kind == kind) return &b;
  }
  return nullptr;
}

json FeatureLayout::to_json() const {
  json blocks = json::array();
  for (const auto& b : blocks_) blocks.push_back({{"kind", block_name(b.kind)}, {"size", b.size}});
  return {{"word_dims", word_dims_},
          {"num_topics", num_topics_},
          {"full_sentence_tau", full_sentence_tau_},
          {"blocks", blocks}};
}

FeatureLayout FeatureLayout::from_json(const json& j) {
  FeatureLayout l;
  l.word_dims_ = j.at("word_dims").get<uint32_t>();
  l.num_topics_ = j.at("num_topics").get<uint32_t>();
  l.full_sentence_tau_ = j.at("full_sentence_tau").get<bool>();
  for (const auto& b : j.at("blocks")) {
    l.add(parse_block(b.at("kind").get<std::string>()), b.at("size").get<uint32_t>());
  }
  return l;
}

namespace {

void append_words(FeatureVector& fv, uint32_t offset, uint32_t word_dims,
                  std::span<const uint32_t> tokens) {
  std::vector<uint32_t> ids;
  ids.reserve(tokens.size());
  for (uint32_t w : tokens) {
    if (w < word_dims) ids.push_back(w);
  }
  std::sort(ids.begin(), ids.end());
  for (size_t i = 0; i < ids.size();) {
    size_t k = i;
    while (k < ids.size() && ids[k] == ids[i]) ++k;
    fv.index.push_back(offset + ids[i]);
    fv.value.push_back(std::log1p(static_cast<double>(k - i)));
    i = k;
  }
}

void append_dense(FeatureVector& fv, uint32_t offset, const TopicDistribution& d, uint32_t m) {
  if (d.size() != m) throw std::invalid_argument("feature topic block: distribution size mismatch");
  for (uint32_t k = 0; k < m; ++k) {
    if (d[k] == 0) continue;
    fv.index.push_back(offset + k);
    fv.value.push_back(d[k]);
  }
}

}  // namespace

FeatureVector encode_features(const FeatureLayout& layout, const FeatureContext& ctx) {
  FeatureVector fv;
  for (const auto& b : layout.blocks()) {
    switch (b.kind) {
      case FeatureBlock::kCustomerWords:
        append_words(fv, b.offset, layout.word_dims(), ctx.customer_tokens);
        break;
      case FeatureBlock::kSentenceWords:
        append_words(fv, b.offset, layout.word_dims(), ctx.sentence_tokens);
        break;
      case FeatureBlock::kCustomerTopics:
        if (ctx.customer_tau == nullptr) throw std::invalid_argument("features: customer tau missing");
        append_dense(fv, b.offset, *ctx.customer_tau, b.size);
        break;
      case FeatureBlock::kSentenceTopics:
        if (ctx.sentence_tau == nullptr) throw std::invalid_argument("features: sentence tau missing");
        if (layout.full_sentence_tau()) {
          append_dense(fv, b.offset, *ctx.sentence_tau, b.size);
        } else {
          if (ctx.sentence_tau->size() != b.size) {
            throw std::invalid_argument("feature topic block: distribution size mismatch");
          }
          fv.index.push_back(b.offset + dominant_topic(*ctx.sentence_tau).topic);
          fv.value.push_back(1.0);
        }
        break;
      case FeatureBlock::kPosition:
        fv.index.push_back(b.offset + position_bucket(ctx.position));
        fv.value.push_back(1.0);
        break;
      case FeatureBlock::kBias:
        fv.index.push_back(b.offset);
        fv.value.push_back(1.0);
        break;
    }
  }
  return fv;
}

std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> p(scores.begin(), scores.end());
  if (p.empty()) return p;
  const double mx = *std::max_element(p.begin(), p.end());
  double z = 0;
  for (double& v : p) {
    v = std::exp(v - mx);
    z += v;
  }
  for (double& v : p) v /= z;
  return p;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: size mismatch");
  double kl = 0;
  for (size_t k = 0; k < p.size(); ++k) {
    if (p[k] <= 0) continue;
    if (q[k] <= 0) return std::numeric_limits<double>::infinity();
    kl += p[k] * std::log(p[k] / q[k]);
  }
  return std::max(kl, 0.0);
}

SoftmaxRegressor::SoftmaxRegressor(FeatureLayout layout, uint32_t num_classes)
    : layout_(std::move(layout)),
      num_classes_(num_classes),
      weights_(static_cast<size_t>(layout_.dim()) * num_classes, 0.0) {
  if (num_classes < 1) throw std::invalid_argument("softmax regressor needs at least one class");
}

SoftmaxRegressor::SoftmaxRegressor(FeatureLayout layout, uint32_t num_classes,
                                   std::vector<double> weights)
    : layout_(std::move(layout)), num_classes_(num_classes), weights_(std::move(weights)) {
  if (num_classes < 1) throw std::invalid_argument("softmax regressor needs at least one class");
  if (weights_.size() != static_cast<size_t>(layout_.dim()) * num_classes) {
    throw std::invalid_argument("softmax regressor: weight count does not match layout");
  }
}

std::vector<double> SoftmaxRegressor::scores(const FeatureVector& x) const {
  std::vector<double> s(num_classes_, 0.0);
  for (size_t i = 0; i < x.nnz(); ++i) {
    if (x.index[i] >= layout_.dim()) throw std::invalid_argument("feature index out of range");
    const double* row = &weights_[static_cast<size_t>(x.index[i]) * num_classes_];
    const double v = x.value[i];
    for (uint32_t c = 0; c < num_classes_; ++c) s[c] += v * row[c];
  }
  return s;
}

TopicDistribution SoftmaxRegressor::predict(const FeatureVector& x) const {
  return TopicDistribution::normalized(softmax(scores(x)));
}

LabeledExample hard_label(FeatureVector x, uint32_t label, uint32_t num_classes) {
  if (label >= num_classes) throw std::invalid_argument("hard_label: label out of range");
  LabeledExample e{std::move(x), std::vector<double>(num_classes, 0.0)};
  e.target[label] = 1.0;
  return e;
}

json SgdOptions::to_json() const {
  return {{"learning_rate", learning_rate}, {"epochs", epochs}, {"l2", l2},
          {"seed", seed},                   {"shuffle", shuffle}};
}

SgdOptions SgdOptions::from_json(const json& j) {
  SgdOptions o;
  o.learning_rate = j.value("learning_rate", o.learning_rate);
  o.epochs = j.value("epochs", o.epochs);
  o.l2 = j.value("l2", o.l2);
  o.seed = j.value("seed", o.seed);
  o.shuffle = j.value("shuffle", o.shuffle);
  return o;
}

namespace {

double squared_norm(std::span<const double> w) {
  double s = 0;
  for (double v : w) s += v * v;
  return s;
}

void validate_examples(const FeatureLayout& layout, uint32_t num_classes,
                       std::span<const LabeledExample> examples) {
  for (size_t i = 0; i < examples.size(); ++i) {
    const auto& e = examples[i];
    const auto where = " (example " + std::to_string(i) + ")";
    if (e.target.size() != num_classes) {
      throw std::invalid_argument("target length does not match class count" + where);
    }
    if (e.x.index.size() != e.x.value.size()) {
      throw std::invalid_argument("feature index/value length mismatch" + where);
    }
    for (size_t k = 0; k < e.x.nnz(); ++k) {
      if (e.x.index[k] >= layout.dim()) {
        throw std::invalid_argument("feature index beyond layout dimension" + where);
      }
      if (k > 0 && e.x.index[k] <= e.x.index[k - 1]) {
        throw std::invalid_argument("feature indices not strictly increasing" + where);
      }
    }
  }
}

}  // namespace

double kl_objective(const SoftmaxRegressor& model, std::span<const LabeledExample> examples,
                    double l2) {
  double total = 0;
  for (const auto& e : examples) {
    const auto p = softmax(model.scores(e.x));
    total += kl_divergence(e.target, p);
  }
  const double mean = examples.empty() ? 0.0 : total / static_cast<double>(examples.size());
  return mean + l2 * squared_norm(model.weights());
}

std::vector<double> kl_gradient(const SoftmaxRegressor& model,
                                std::span<const LabeledExample> examples, double l2) {
  const uint32_t c = model.num_classes();
  std::vector<double> g(model.weights().size(), 0.0);
  const double inv_n = examples.empty() ? 0.0 : 1.0 / static_cast<double>(examples.size());
  for (const auto& e : examples) {
    const auto p = softmax(model.scores(e.x));
    for (size_t i = 0; i < e.x.nnz(); ++i) {
      double* row = &g[static_cast<size_t>(e.x.index[i]) * c];
      const double v = e.x.value[i] * inv_n;
      for (uint32_t k = 0; k < c; ++k) row[k] += v * (p[k] - e.target[k]);
    }
  }
  const auto w = model.weights();
  for (size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * l2 * w[i];
  return g;
}

SoftmaxRegressor train_softmax(const FeatureLayout& layout, uint32_t num_classes,
                               std::span<const LabeledExample> examples,
                               const SgdOptions& options, TrainTrace* trace) {
  if (options.learning_rate <= 0 || options.l2 < 0) {
    throw std::invalid_argument("sgd: learning rate must be positive and l2 non-negative");
  }
  validate_examples(layout, num_classes, examples);
  SoftmaxRegressor model(layout, num_classes);
  if (examples.empty()) return model;

  // W = scale * V so the L2 shrink is O(1) per step.
  std::vector<double> v(model.weights().size(), 0.0);
  double scale = 1.0;
  std::vector<size_t> order(examples.size());
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(mix_seed(options.seed, 0x5d0fULL));
  std::vector<double> s(num_classes);

  auto materialize = [&] {
    auto w = model.mutable_weights();
    for (size_t i = 0; i < w.size(); ++i) w[i] = scale * v[i];
  };

  for (uint32_t epoch = 1; epoch <= options.epochs; ++epoch) {
    if (options.shuffle) shuffle(order, rng);
    const double eta = options.learning_rate / std::sqrt(static_cast<double>(epoch));
    const double shrink = 1.0 - 2.0 * eta * options.l2;
    if (shrink <= 0) throw std::invalid_argument("sgd: learning rate * l2 too large");
    for (size_t idx : order) {
      const auto& e = examples[idx];
      std::fill(s.begin(), s.end(), 0.0);
      for (size_t i = 0; i < e.x.nnz(); ++i) {
        const double* row = &v[static_cast<size_t>(e.x.index[i]) * num_classes];
        const double xv = e.x.value[i] * scale;
        for (uint32_t k = 0; k < num_classes; ++k) s[k] += xv * row[k];
      }
      const auto p = softmax(s);
      scale *= shrink;
      const double step = eta / scale;
      for (size_t i = 0; i < e.x.nnz(); ++i) {
        double* row = &v[static_cast<size_t>(e.x.index[i]) * num_classes];
        const double xv = e.x.value[i] * step;
        for (uint32_t k = 0; k < num_classes; ++k) row[k] -= xv * (p[k] - e.target[k]);
      }
      if (scale < 1e-6) {
        for (double& x : v) x *= scale;
        scale = 1.0;
      }
    }
    if (trace != nullptr) {
      materialize();
      trace->epoch_objective.push_back(kl_objective(model, examples, options.l2));
    }
  }
  materialize();
  return model;
}

json PredictorConfig::to_json() const {
  return {{"t1_features", t1_features.to_json()},
          {"t2_features", t2_features.to_json()},
          {"t1_sgd", t1_sgd.to_json()},
          {"t2_sgd", t2_sgd.to_json()},
          {"family_min_examples", family_min_examples},
          {"feature_vocab_limit", feature_vocab_limit}};
}

PredictorConfig PredictorConfig::from_json(const json& j) {
  PredictorConfig c;
  if (j.contains("t1_features")) c.t1_features = FeatureConfig::from_json(j["t1_features"]);
  if (j.contains("t2_features")) c.t2_features = FeatureConfig::from_json(j["t2_features"]);
  if (j.contains("t1_sgd")) c.t1_sgd = SgdOptions::from_json(j["t1_sgd"]);
  if (j.contains("t2_sgd")) c.t2_sgd = SgdOptions::from_json(j["t2_sgd"]);
  c.family_min_examples = j.value("family_min_examples", c.family_min_examples);
  c.feature_vocab_limit = j.value("feature_vocab_limit", c.feature_vocab_limit);
  return c;
}

std::string_view route_name(NextRoute route) {
  switch (route) {
    case NextRoute::kFirstSentence: return "first";
    case NextRoute::kFamily: return "family";
    case NextRoute::kFallback: return "fallback";
  }
  return "?";
}

uint32_t feature_word_dims(const PredictorConfig& config, size_t vocab_size) {
  return static_cast<uint32_t>(std::min<size_t>(config.feature_vocab_limit, vocab_size));
}

namespace {

void check_aligned(std::span<const TokenizedPair> pairs,
                   std::span<const SilverAnnotation> annotations) {
  if (pairs.size() != annotations.size()) {
    throw std::invalid_argument("pairs and silver annotations differ in length");
  }
  for (size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].id != annotations[i].id) {
      throw Error("silver annotation " + annotations[i].id + " does not match pair " +
                  pairs[i].id);
    }
  }
}

uint32_t topics_of(std::span<const SilverAnnotation> annotations) {
  if (annotations.empty()) throw Error("no training annotations");
  return static_cast<uint32_t>(annotations[0].tau_ca_customer.size());
}

FeatureContext transition_context(const TokenizedPair& pair, const SilverAnnotation& a,
                                  uint32_t j) {
  FeatureContext ctx;
  ctx.customer_tokens = pair.customer.tokens;
  ctx.customer_tau = &a.tau_ca_customer;
  ctx.sentence_tokens = pair.agent.sentence(j);
  ctx.sentence_tau = &a.sentences.at(j).tau_s;
  ctx.position = j;
  return ctx;
}

SgdOptions with_seed(SgdOptions o, uint64_t salt) {
  o.seed = mix_seed(o.seed, salt);
  return o;
}

}  // namespace

SoftmaxRegressor train_t1(std::span<const TokenizedPair> pairs,
                          std::span<const SilverAnnotation> annotations,
                          const PredictorConfig& config, size_t vocab_size) {
  check_aligned(pairs, annotations);
  const uint32_t m = topics_of(annotations);
  const auto layout =
      FeatureLayout::customer_only(config.t1_features, feature_word_dims(config, vocab_size), m);
  std::vector<LabeledExample> examples(pairs.size());
  parallel_for(pairs.size(), [&](size_t i) {
    FeatureContext ctx;
    ctx.customer_tokens = pairs[i].customer.tokens;
    ctx.customer_tau = &annotations[i].tau_ca_customer;
    examples[i] = {encode_features(layout, ctx), annotations[i].tau_ca_agent.vec()};
  });
  return train_softmax(layout, m, examples, config.t1_sgd);
}

TopicDistribution predict_t1(const SoftmaxRegressor& t1, std::span<const uint32_t> customer_tokens,
                             const TopicDistribution& customer_tau) {
  FeatureContext ctx;
  ctx.customer_tokens = customer_tokens;
  ctx.customer_tau = &customer_tau;
  return t1.predict(encode_features(t1.layout(), ctx));
}

T2Models train_t2(std::span<const TokenizedPair> pairs,
                  std::span<const SilverAnnotation> annotations, const TransitionSet& transitions,
                  const PredictorConfig& config, size_t vocab_size) {
  check_aligned(pairs, annotations);
  if (transitions.transitions.empty() && transitions.first.empty()) {
    throw Error("train_t2: no sentence transitions in the training set");
  }
  const uint32_t m = topics_of(annotations);
  const uint32_t wd = feature_word_dims(config, vocab_size);
  const FeatureConfig& fc = config.t2_features;
  const bool routed = fc.sentence_topics;
  T2Models out;

  const auto first_layout = FeatureLayout::customer_only(fc, wd, m);
  std::vector<LabeledExample> first(transitions.first.size());
  parallel_for(first.size(), [&](size_t i) {
    const auto& ex = transitions.first[i];
    FeatureContext ctx;
    ctx.customer_tokens = pairs[ex.pair_index].customer.tokens;
    ctx.customer_tau = &annotations[ex.pair_index].tau_ca_customer;
    first[i] = hard_label(encode_features(first_layout, ctx), ex.target_dominant, m);
  });
  out.first = train_softmax(first_layout, m, first, with_seed(config.t2_sgd, 0xf1));

  const auto layout = FeatureLayout::make(fc, wd, m);
  std::vector<LabeledExample> all(transitions.transitions.size());
  parallel_for(all.size(), [&](size_t i) {
    const auto& t = transitions.transitions[i];
    all[i] = hard_label(
        encode_features(layout, transition_context(pairs[t.pair_index], annotations[t.pair_index], t.j)),
        t.next_dominant, m);
  });
  out.fallback = train_softmax(layout, m, all, with_seed(config.t2_sgd, 0xfb));
  if (!routed) return out;

  std::map<uint32_t, std::vector<LabeledExample>> groups;
  for (size_t i = 0; i < all.size(); ++i) {
    groups[transitions.transitions[i].current_dominant].push_back(all[i]);
  }
  std::vector<uint32_t> keys;
  for (const auto& [k, ex] : groups) {
    if (ex.size() >= config.family_min_examples) keys.push_back(k);
  }
  std::vector<SoftmaxRegressor> members(keys.size());
  parallel_for(keys.size(), [&](size_t i) {
    members[i] = train_softmax(layout, m, groups[keys[i]], with_seed(config.t2_sgd, 0x100 + keys[i]));
  });
  for (size_t i = 0; i < keys.size(); ++i) out.family.emplace(keys[i], std::move(members[i]));
  return out;
}

NextPrediction predict_next(const T2Models& models, const NextContext& context) {
  NextPrediction out;
  FeatureContext ctx;
  ctx.customer_tokens = context.customer_tokens;
  ctx.customer_tau = context.customer_tau;
  if (context.sentences_so_far == 0) {
    out.route = NextRoute::kFirstSentence;
    out.dist = models.first.predict(encode_features(models.first.layout(), ctx));
    return out;
  }
  if (context.last_sentence_tau == nullptr) {
    throw std::invalid_argument("predict_next: last sentence distribution missing");
  }
  ctx.sentence_tokens = context.last_sentence_tokens;
  ctx.sentence_tau = context.last_sentence_tau;
  ctx.position = context.sentences_so_far - 1;
  out.family_key = dominant_topic(*context.last_sentence_tau).topic;
  const auto it = models.family.find(out.family_key);
  const SoftmaxRegressor& model = it != models.family.end() ? it->second : models.fallback;
  out.route = it != models.family.end() ? NextRoute::kFamily : NextRoute::kFallback;
  out.dist = model.predict(encode_features(model.layout(), ctx));
  return out;
}

PredictorSuite train_suite(std::span<const TokenizedPair> pairs,
                           std::span<const SilverAnnotation> annotations,
                           const PredictorConfig& config, size_t vocab_size) {
  PredictorSuite s;
  s.num_topics = topics_of(annotations);
  s.config = config;
  s.t1 = train_t1(pairs, annotations, config, vocab_size);
  s.t2 = train_t2(pairs, annotations, transition_pairs(annotations), config, vocab_size);
  return s;
}

std::string save_suite(const PredictorSuite& suite) {
  std::vector<std::pair<std::string, const SoftmaxRegressor*>> regs = {
      {"t1", &suite.t1}, {"first", &suite.t2.first}, {"fallback", &suite.t2.fallback}};
  for (const auto& [k, r] : suite.t2.family) regs.emplace_back("family/" + std::to_string(k), &r);
  json list = json::array();
  ByteWriter w;
  for (const auto& [name, r] : regs) {
    if (r->num_classes() == 0) continue;  // not trained
    list.push_back({{"name", name},
                    {"layout", r->layout().to_json()},
                    {"rows", r->layout().dim()},
                    {"cols", r->num_classes()}});
    for (double v : r->weights()) w.put_f64(v);
  }
  json meta = {{"kind", "predictor_suite"},
               {"M", suite.num_topics},
               {"config", suite.config.to_json()},
               {"config_hash", suite.config_hash},
               {"regressors", list}};
  return encode_container(meta, w.bytes());
}

PredictorSuite load_suite(std::string_view bytes) {
  const Container c = decode_container(bytes);
  if (c.meta.value("kind", "") != "predictor_suite") throw Error("not a predictor suite container");
  PredictorSuite s;
  s.num_topics = c.meta.at("M").get<uint32_t>();
  s.config = PredictorConfig::from_json(c.meta.at("config"));
  s.config_hash = c.meta.value("config_hash", "");
  ByteReader r(c.payload);
  for (const auto& entry : c.meta.at("regressors")) {
    const auto name = entry.at("name").get<std::string>();
    auto layout = FeatureLayout::from_json(entry.at("layout"));
    const auto rows = entry.at("rows").get<uint32_t>();
    const auto cols = entry.at("cols").get<uint32_t>();
    if (rows != layout.dim()) throw Error("predictor suite: layout/rows mismatch for " + name);
    std::vector<double> wts(static_cast<size_t>(rows) * cols);
    for (double& v : wts) v = r.get_f64();
    SoftmaxRegressor reg(std::move(layout), cols, std::move(wts));
    if (name == "t1") {
      s.t1 = std::move(reg);
    } else if (name == "first") {
      s.t2.first = std::move(reg);
    } else if (name == "fallback") {
      s.t2.fallback = std::move(reg);
    } else if (name.rfind("family/", 0) == 0) {
      s.t2.family.emplace(static_cast<uint32_t>(std::stoul(name.substr(7))), std::move(reg));
    } else {
      throw Error("predictor suite: unknown regressor " + name);
    }
  }
  if (r.remaining() != 0) throw Error("predictor suite: trailing payload bytes");
  return s;
}

TopicDistribution baseline_uniform(size_t num_topics) {
  return TopicDistribution::uniform(num_topics);
}

TopicDistribution baseline_average(const TopicModel& sentence_model) {
  return sentence_model.prior();
}

TopicDistribution baseline_average(std::span<const SilverAnnotation> annotations) {
  std::vector<double> sum;
  for (const auto& a : annotations) {
    for (const auto& s : a.sentences) {
      if (sum.empty()) sum.assign(s.tau_s.size(), 0.0);
      for (size_t k = 0; k < sum.size(); ++k) sum[k] += s.tau_s[k];
    }
  }
  if (sum.empty()) throw Error("baseline_average: no annotated sentences");
  return TopicDistribution::normalized(sum);
}

TopicDistribution baseline_copy_customer(const TopicDistribution& customer_tau) {
  return customer_tau;
}

}  // namespace topicreply
