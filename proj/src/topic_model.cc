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

#include "topicreply/topic_model.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "topicreply/common.h"
#include "topicreply/container.h"

namespace topicreply {
namespace {

using nlohmann::json;

// Draws an index from unnormalized cumulative weights.
uint32_t sample_cumulative(std::span<const double> cumulative, double u) {
  const double target = u * cumulative.back();
  const size_t m = cumulative.size();
  for (size_t k = 0; k + 1 < m; ++k) {
    if (target < cumulative[k]) return static_cast<uint32_t>(k);
  }
  return static_cast<uint32_t>(m - 1);
}

uint64_t token_hash(std::span<const uint32_t> tokens) {
  Fnv1a h;
  for (uint32_t t : tokens) h.update_u64(t);
  return h.digest();
}

void check_token_ids(std::span<const uint32_t> tokens, uint32_t vocab_size) {
  for (uint32_t t : tokens) {
    if (t >= vocab_size) {
      throw std::out_of_range("token id " + std::to_string(t) + " outside vocabulary of size " +
                              std::to_string(vocab_size));
    }
  }
}

}  // namespace

std::string_view view_tag(View view) {
  switch (view) {
    case View::kCustomer: return "C";
    case View::kAgent: return "A";
    case View::kConcat: return "CA";
    case View::kSentence: return "S";
  }
  return "?";
}

View parse_view(std::string_view tag) {
  if (tag == "C") return View::kCustomer;
  if (tag == "A") return View::kAgent;
  if (tag == "CA") return View::kConcat;
  if (tag == "S") return View::kSentence;
  throw std::invalid_argument("unknown view: " + std::string(tag));
}

TopicDistribution::TopicDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
  double sum = 0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0) {
      throw std::invalid_argument("TopicDistribution: negative or non-finite entry");
    }
    sum += p;
  }
  if (probs_.empty() || std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("TopicDistribution: entries must sum to 1");
  }
}

TopicDistribution TopicDistribution::uniform(size_t num_topics) {
  if (num_topics < 1) throw std::invalid_argument("uniform distribution needs M >= 1");
  return TopicDistribution(std::vector<double>(num_topics, 1.0 / static_cast<double>(num_topics)));
}

TopicDistribution TopicDistribution::normalized(std::span<const double> weights) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(sum > 0) || !std::isfinite(sum)) {
    throw std::invalid_argument("cannot normalize weights with non-positive sum");
  }
  std::vector<double> p(weights.begin(), weights.end());
  for (auto& x : p) x /= sum;
  return TopicDistribution(std::move(p));
}

DominantTopic dominant_topic(std::span<const double> dist) {
  if (dist.empty()) throw std::invalid_argument("dominant_topic: empty distribution");
  DominantTopic d;
  double second = 0;
  for (size_t k = 0; k < dist.size(); ++k) {
    if (k == 0 || dist[k] > d.probability) {
      if (k > 0) second = std::max(second, d.probability);
      d.topic = static_cast<uint32_t>(k);
      d.probability = dist[k];
    } else {
      second = std::max(second, dist[k]);
    }
  }
  d.peaked = d.probability > 0.5 && d.probability >= 2.0 * second;
  return d;
}

std::vector<uint32_t> ranked_topics(std::span<const double> dist, size_t k) {
  std::vector<uint32_t> order(dist.size());
  std::iota(order.begin(), order.end(), 0u);
  k = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(k), order.end(),
                    [&](uint32_t a, uint32_t b) {
                      if (dist[a] != dist[b]) return dist[a] > dist[b];
                      return a < b;
                    });
  order.resize(k);
  return order;
}

double peakedness_rate(std::span<const TopicDistribution> dists) {
  if (dists.empty()) throw Error("peakedness_rate: no distributions");
  size_t peaked = 0;
  for (const auto& d : dists) peaked += dominant_topic(d).peaked ? 1 : 0;
  return static_cast<double>(peaked) / static_cast<double>(dists.size());
}

json LdaOptions::to_json() const {
  return {{"num_topics", num_topics}, {"alpha_sum", alpha_sum}, {"beta", beta},
          {"sweeps", sweeps},         {"seed", seed},           {"reestimate_alpha", reestimate_alpha}};
}

LdaOptions LdaOptions::from_json(const json& j) {
  LdaOptions o;
  o.num_topics = j.value("num_topics", o.num_topics);
  o.alpha_sum = j.value("alpha_sum", o.alpha_sum);
  o.beta = j.value("beta", o.beta);
  o.sweeps = j.value("sweeps", o.sweeps);
  o.seed = j.value("seed", o.seed);
  o.reestimate_alpha = j.value("reestimate_alpha", o.reestimate_alpha);
  return o;
}

json InferOptions::to_json() const {
  return {{"burn_in", burn_in}, {"samples", samples}, {"seed", seed}};
}

InferOptions InferOptions::from_json(const json& j) {
  InferOptions o;
  o.burn_in = j.value("burn_in", o.burn_in);
  o.samples = j.value("samples", o.samples);
  o.seed = j.value("seed", o.seed);
  return o;
}

TopicModel::TopicModel(View view, std::vector<double> alpha, double beta,
                       std::vector<std::string> vocabulary, std::vector<uint32_t> counts,
                       uint64_t seed, uint32_t sweeps)
    : view_(view),
      alpha_(std::move(alpha)),
      beta_(beta),
      vocabulary_(std::move(vocabulary)),
      counts_(std::move(counts)),
      seed_(seed),
      sweeps_(sweeps) {
  const size_t m = alpha_.size();
  const size_t v = vocabulary_.size();
  if (m < 1) throw std::invalid_argument("TopicModel: need at least one topic");
  if (v < 1) throw std::invalid_argument("TopicModel: empty vocabulary");
  if (!(beta_ > 0)) throw std::invalid_argument("TopicModel: beta must be > 0");
  for (double a : alpha_) {
    if (!(a > 0) || !std::isfinite(a)) throw std::invalid_argument("TopicModel: alpha must be > 0");
    alpha_sum_ += a;
  }
  if (counts_.size() != m * v) throw std::invalid_argument("TopicModel: counts must be M x V");
  totals_.assign(m, 0);
  for (size_t k = 0; k < m; ++k) {
    totals_[k] = std::accumulate(counts_.begin() + static_cast<long>(k * v),
                                 counts_.begin() + static_cast<long>((k + 1) * v), uint64_t{0});
  }
  phi_.resize(m * v);
  const double vbeta = static_cast<double>(v) * beta_;
  for (size_t k = 0; k < m; ++k) {
    const double denom = static_cast<double>(totals_[k]) + vbeta;
    for (size_t w = 0; w < v; ++w) {
      phi_[w * m + k] = (static_cast<double>(counts_[k * v + w]) + beta_) / denom;
    }
  }
}

std::string TopicModel::vocabulary_hash() const {
  Fnv1a h;
  for (const auto& w : vocabulary_) {
    h.update_u64(w.size());
    h.update(w);
  }
  return h.hex();
}

TopicDistribution TopicModel::prior() const { return TopicDistribution::normalized(alpha_); }

json TopicModel::metadata() const {
  return {{"kind", "topic_model"},
          {"view", view_tag(view_)},
          {"M", num_topics()},
          {"V", vocab_size()},
          {"alpha", alpha_},
          {"beta", beta_},
          {"seed", seed_},
          {"sweeps", sweeps_},
          {"vocabulary_hash", vocabulary_hash()},
          {"config_hash", config_hash_}};
}

std::vector<Document> build_documents(std::span<const TokenizedPair> pairs, View view) {
  std::vector<Document> docs;
  switch (view) {
    case View::kCustomer:
      for (const auto& p : pairs) docs.push_back(p.customer.tokens);
      break;
    case View::kAgent:
      for (const auto& p : pairs) docs.push_back(p.agent.tokens);
      break;
    case View::kConcat:
      for (const auto& p : pairs) {
        Document d = p.customer.tokens;
        d.insert(d.end(), p.agent.tokens.begin(), p.agent.tokens.end());
        docs.push_back(std::move(d));
      }
      break;
    case View::kSentence:
      for (const auto& p : pairs) {
        for (size_t j = 0; j < p.agent.sentences.size(); ++j) {
          auto s = p.agent.sentence(j);
          docs.emplace_back(s.begin(), s.end());
        }
      }
      break;
    default:
      throw std::invalid_argument("build_documents: unknown view");
  }
  return docs;
}

TopicModel train_lda(std::span<const Document> docs, std::vector<std::string> vocabulary,
                     View view, const LdaOptions& options) {
  const uint32_t m = options.num_topics;
  const auto v = static_cast<uint32_t>(vocabulary.size());
  if (m < 2) throw std::invalid_argument("train_lda: need M >= 2");
  if (options.sweeps < 1) throw std::invalid_argument("train_lda: need sweeps >= 1");
  if (!(options.alpha_sum > 0) || !(options.beta > 0)) {
    throw std::invalid_argument("train_lda: alpha and beta must be > 0");
  }
  if (v == 0) throw Error("train_lda: empty vocabulary");
  if (docs.empty()) throw Error("train_lda: no documents");
  size_t total = 0;
  for (const auto& d : docs) {
    check_token_ids(d, v);
    total += d.size();
  }
  if (total == 0) throw Error("train_lda: all documents are empty");

  std::vector<double> alpha(m, options.alpha_sum / m);
  const double beta = options.beta;
  const double vbeta = beta * v;

  Rng rng(options.seed);
  std::vector<uint32_t> z(total);
  std::vector<uint32_t> word_topic(static_cast<size_t>(v) * m, 0);  // word-major
  std::vector<uint32_t> doc_topic(docs.size() * m, 0);
  std::vector<uint64_t> topic_total(m, 0);

  size_t pos = 0;
  for (size_t d = 0; d < docs.size(); ++d) {
    for (uint32_t w : docs[d]) {
      const auto k = static_cast<uint32_t>(uniform_index(rng, m));
      z[pos++] = k;
      ++word_topic[static_cast<size_t>(w) * m + k];
      ++doc_topic[d * m + k];
      ++topic_total[k];
    }
  }

  std::vector<double> inv_denom(m);
  for (uint32_t k = 0; k < m; ++k) inv_denom[k] = 1.0 / (static_cast<double>(topic_total[k]) + vbeta);
  std::vector<double> cumulative(m);

  for (uint32_t sweep = 0; sweep < options.sweeps; ++sweep) {
    pos = 0;
    for (size_t d = 0; d < docs.size(); ++d) {
      uint32_t* nd = &doc_topic[d * m];
      for (uint32_t w : docs[d]) {
        uint32_t* nw = &word_topic[static_cast<size_t>(w) * m];
        uint32_t k = z[pos];
        --nd[k];
        --nw[k];
        --topic_total[k];
        inv_denom[k] = 1.0 / (static_cast<double>(topic_total[k]) + vbeta);

        double acc = 0;
        for (uint32_t t = 0; t < m; ++t) {
          acc += (nd[t] + alpha[t]) * (nw[t] + beta) * inv_denom[t];
          cumulative[t] = acc;
        }
        k = sample_cumulative(cumulative, uniform01(rng));

        z[pos++] = k;
        ++nd[k];
        ++nw[k];
        ++topic_total[k];
        inv_denom[k] = 1.0 / (static_cast<double>(topic_total[k]) + vbeta);
      }
    }
  }

  // Running totals must agree with the count matrices they summarize.
  std::vector<uint64_t> column(m, 0);
  for (size_t i = 0; i < word_topic.size(); ++i) column[i % m] += word_topic[i];
  if (column != topic_total) throw Error("train_lda: topic totals drifted from word counts");
  for (size_t d = 0; d < docs.size(); ++d) {
    const uint64_t n = std::accumulate(doc_topic.begin() + static_cast<long>(d * m),
                                       doc_topic.begin() + static_cast<long>((d + 1) * m),
                                       uint64_t{0});
    if (n != docs[d].size()) throw Error("train_lda: document counts drifted");
  }

  if (options.reestimate_alpha) {
    std::vector<double> mean(m, 0.0);
    size_t used = 0;
    for (size_t d = 0; d < docs.size(); ++d) {
      if (docs[d].empty()) continue;
      const double denom = static_cast<double>(docs[d].size()) + options.alpha_sum;
      for (uint32_t k = 0; k < m; ++k) mean[k] += (doc_topic[d * m + k] + alpha[k]) / denom;
      ++used;
    }
    for (uint32_t k = 0; k < m; ++k) alpha[k] = options.alpha_sum * mean[k] / static_cast<double>(used);
  }

  std::vector<uint32_t> counts(static_cast<size_t>(m) * v);
  for (uint32_t w = 0; w < v; ++w) {
    for (uint32_t k = 0; k < m; ++k) {
      counts[static_cast<size_t>(k) * v + w] = word_topic[static_cast<size_t>(w) * m + k];
    }
  }
  return TopicModel(view, std::move(alpha), beta, std::move(vocabulary), std::move(counts),
                    options.seed, options.sweeps);
}

TopicDistribution infer(const TopicModel& model, std::span<const uint32_t> tokens,
                        const InferOptions& options) {
  if (tokens.empty()) return model.prior();
  check_token_ids(tokens, model.vocab_size());
  const uint32_t m = model.num_topics();
  const auto& alpha = model.alpha();
  Rng rng(mix_seed(options.seed, token_hash(tokens)));

  std::vector<uint32_t> z(tokens.size());
  std::vector<uint32_t> nd(m, 0);
  for (auto& k : z) {
    k = static_cast<uint32_t>(uniform_index(rng, m));
    ++nd[k];
  }
  std::vector<double> cumulative(m);
  std::vector<double> accum(m, 0.0);
  const double denom = static_cast<double>(tokens.size()) + model.alpha_sum();
  const uint32_t samples = std::max<uint32_t>(options.samples, 1);
  const uint32_t total_sweeps = options.burn_in + samples;

  for (uint32_t sweep = 0; sweep < total_sweeps; ++sweep) {
    for (size_t i = 0; i < tokens.size(); ++i) {
      --nd[z[i]];
      const auto phi = model.phi_column(tokens[i]);
      double acc = 0;
      for (uint32_t t = 0; t < m; ++t) {
        acc += (nd[t] + alpha[t]) * phi[t];
        cumulative[t] = acc;
      }
      z[i] = sample_cumulative(cumulative, uniform01(rng));
      ++nd[z[i]];
    }
    if (sweep >= options.burn_in) {
      for (uint32_t t = 0; t < m; ++t) accum[t] += (nd[t] + alpha[t]) / denom;
    }
  }
  return TopicDistribution::normalized(accum);
}

std::vector<TopicDescriptor> describe_topics(const TopicModel& model,
                                             std::span<const Document> docs,
                                             const DescribeOptions& options) {
  const uint32_t m = model.num_topics();
  const uint32_t v = model.vocab_size();

  std::map<std::vector<uint32_t>, uint32_t> ngram_counts;
  if (options.top_phrases > 0) {
    for (const auto& d : docs) {
      check_token_ids(d, v);
      for (size_t n = 2; n <= 3; ++n) {
        for (size_t i = 0; i + n <= d.size(); ++i) {
          ++ngram_counts[std::vector<uint32_t>(d.begin() + static_cast<long>(i),
                                               d.begin() + static_cast<long>(i + n))];
        }
      }
    }
  }
  std::vector<const std::pair<const std::vector<uint32_t>, uint32_t>*> phrases;
  for (const auto& entry : ngram_counts) {
    if (entry.second >= options.min_phrase_count) phrases.push_back(&entry);
  }

  auto join = [&](const std::vector<uint32_t>& ids) {
    std::string s;
    for (size_t i = 0; i < ids.size(); ++i) {
      if (i) s += ' ';
      s += model.vocabulary()[ids[i]];
    }
    return s;
  };

  std::vector<TopicDescriptor> out;
  out.reserve(m);
  std::vector<uint32_t> words(v);
  for (uint32_t k = 0; k < m; ++k) {
    TopicDescriptor desc;
    desc.topic = k;
    const size_t nw = std::min<size_t>(options.top_words, v);
    std::iota(words.begin(), words.end(), 0u);
    std::partial_sort(words.begin(), words.begin() + static_cast<long>(nw), words.end(),
                      [&](uint32_t a, uint32_t b) {
                        const double pa = model.phi(k, a), pb = model.phi(k, b);
                        if (pa != pb) return pa > pb;
                        return a < b;
                      });
    for (size_t i = 0; i < nw; ++i) desc.top_words.push_back(model.vocabulary()[words[i]]);

    if (options.top_phrases > 0 && !phrases.empty()) {
      std::vector<std::pair<double, size_t>> scored;
      scored.reserve(phrases.size());
      for (size_t i = 0; i < phrases.size(); ++i) {
        double score = 1.0;
        for (uint32_t w : phrases[i]->first) score *= model.phi(k, w);
        scored.emplace_back(score, i);
      }
      const size_t np = std::min(options.top_phrases, scored.size());
      std::partial_sort(scored.begin(), scored.begin() + static_cast<long>(np), scored.end(),
                        [&](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first > b.first;
                          return phrases[a.second]->first < phrases[b.second]->first;
                        });
      for (size_t i = 0; i < np; ++i) desc.top_phrases.push_back(join(phrases[scored[i].second]->first));
    }
    out.push_back(std::move(desc));
  }
  return out;
}

json descriptors_to_json(std::span<const TopicDescriptor> descriptors) {
  json arr = json::array();
  for (const auto& d : descriptors) {
    arr.push_back({{"topic", d.topic}, {"top_words", d.top_words}, {"top_phrases", d.top_phrases}});
  }
  return arr;
}

std::vector<TopicDescriptor> descriptors_from_json(const json& j) {
  std::vector<TopicDescriptor> out;
  for (const auto& d : j) {
    out.push_back({d.at("topic").get<uint32_t>(), d.at("top_words").get<std::vector<std::string>>(),
                   d.at("top_phrases").get<std::vector<std::string>>()});
  }
  return out;
}

std::string save_topic_model(const TopicModel& model) {
  ByteWriter w;
  for (uint32_t c : model.counts()) w.put_u32(c);
  for (const auto& word : model.vocabulary()) w.put_string(word);
  return encode_container(model.metadata(), w.bytes());
}

TopicModel load_topic_model(std::string_view bytes) {
  Container c = decode_container(bytes);
  const json& meta = c.meta;
  if (meta.value("kind", "") != "topic_model") throw Error("container is not a topic model");
  const auto m = meta.at("M").get<uint32_t>();
  const auto v = meta.at("V").get<uint32_t>();
  ByteReader r(c.payload);
  std::vector<uint32_t> counts(static_cast<size_t>(m) * v);
  for (auto& x : counts) x = r.get_u32();
  std::vector<std::string> vocabulary(v);
  for (auto& word : vocabulary) word = r.get_string();
  if (r.remaining() != 0) throw Error("topic model container: trailing bytes");
  auto alpha = meta.at("alpha").get<std::vector<double>>();
  if (alpha.size() != m) throw Error("topic model container: alpha length != M");
  TopicModel model(parse_view(meta.at("view").get<std::string>()), std::move(alpha),
                   meta.at("beta").get<double>(), std::move(vocabulary), std::move(counts),
                   meta.at("seed").get<uint64_t>(), meta.at("sweeps").get<uint32_t>());
  if (model.vocabulary_hash() != meta.at("vocabulary_hash").get<std::string>()) {
    throw Error("topic model container: vocabulary hash mismatch");
  }
  model.set_config_hash(meta.value("config_hash", ""));
  return model;
}

}  // namespace topicreply
