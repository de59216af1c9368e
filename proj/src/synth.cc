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

#include "topicreply/synth.h"

#include <cctype>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include "topicreply/common.h"

namespace topicreply {

using nlohmann::json;

std::string_view profile_name(SynthProfile profile) {
  switch (profile) {
    case SynthProfile::kCoupled: return "coupled";
    case SynthProfile::kChain: return "chain";
    case SynthProfile::kTwoVocab: return "two_vocab";
  }
  return "?";
}

SynthProfile parse_profile(std::string_view name) {
  if (name == "coupled") return SynthProfile::kCoupled;
  if (name == "chain") return SynthProfile::kChain;
  if (name == "two_vocab") return SynthProfile::kTwoVocab;
  throw std::invalid_argument("unknown synth profile: " + std::string(name));
}

SynthParams SynthParams::defaults(SynthProfile profile) {
  SynthParams p;
  p.profile = profile;
  switch (profile) {
    case SynthProfile::kCoupled:
      p.customer_tokens = {10, 12};
      p.agent_tokens = {140, 160};
      p.echo = 0.73;
      p.noise = 0.02;
      break;
    case SynthProfile::kChain:
      p.num_pairs = 3000;
      p.words_per_topic = 20;
      p.sentence_tokens = {6, 9};
      break;
    case SynthProfile::kTwoVocab:
      p.num_pairs = 400;
      p.num_topics = 2;
      p.words_per_topic = 5;
      p.customer_tokens = {10, 14};
      p.agent_tokens = {20, 26};
      break;
  }
  return p;
}

void SynthParams::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("synth: " + what); };
  if (num_pairs < 2) fail("num_pairs must be >= 2");
  if (num_topics < 2) fail("num_topics must be >= 2");
  if (words_per_topic < 1) fail("words_per_topic must be >= 1");
  for (const auto* r : {&customer_tokens, &agent_tokens, &sentence_tokens}) {
    if (r->min < 1 || r->min > r->max) fail("length ranges need 1 <= min <= max");
  }
  if (!(echo >= 0 && echo <= 1)) fail("echo must be in [0, 1]");
  if (!(noise >= 0 && noise <= 1)) fail("noise must be in [0, 1]");
  if (!(concentration > 0 && concentration <= 1)) fail("concentration must be in (0, 1]");
  if (sentences_per_email < 1) fail("sentences_per_email must be >= 1");
  if (!(start_skew >= 0 && start_skew < 1)) fail("start_skew must be in [0, 1)");
  if (!(purity >= 0 && purity <= 1)) fail("purity must be in [0, 1]");
  if (profile == SynthProfile::kTwoVocab && num_topics != 2) fail("two_vocab needs num_topics = 2");
  if (profile != SynthProfile::kChain) return;
  double w = 0;
  for (const auto& [off, weight] : residual) {
    if (!(weight >= 0)) fail("residual weights must be non-negative");
    if (((off % static_cast<int>(num_topics)) + static_cast<int>(num_topics)) %
            static_cast<int>(num_topics) ==
        1 % static_cast<int>(num_topics)) {
      fail("residual offsets must differ from +1");
    }
    w += weight;
  }
  if (concentration < 1 && !(w > 0)) fail("residual needs positive total weight");
}

json SynthParams::to_json() const {
  json res = json::array();
  for (const auto& [off, w] : residual) res.push_back({off, w});
  return {{"profile", profile_name(profile)},
          {"seed", seed},
          {"num_pairs", num_pairs},
          {"num_topics", num_topics},
          {"words_per_topic", words_per_topic},
          {"customer_tokens", {customer_tokens.min, customer_tokens.max}},
          {"agent_tokens", {agent_tokens.min, agent_tokens.max}},
          {"sentence_tokens", {sentence_tokens.min, sentence_tokens.max}},
          {"echo", echo},
          {"noise", noise},
          {"concentration", concentration},
          {"sentences_per_email", sentences_per_email},
          {"start_skew", start_skew},
          {"residual", res},
          {"purity", purity}};
}

SynthParams SynthParams::from_json(const json& j) {
  SynthParams p = defaults(parse_profile(j.value("profile", std::string("coupled"))));
  auto range = [&](const char* key, LengthRange& r) {
    if (j.contains(key)) {
      r.min = j[key].at(0).get<uint32_t>();
      r.max = j[key].at(1).get<uint32_t>();
    }
  };
  p.seed = j.value("seed", p.seed);
  p.num_pairs = j.value("num_pairs", p.num_pairs);
  p.num_topics = j.value("num_topics", p.num_topics);
  p.words_per_topic = j.value("words_per_topic", p.words_per_topic);
  range("customer_tokens", p.customer_tokens);
  range("agent_tokens", p.agent_tokens);
  range("sentence_tokens", p.sentence_tokens);
  p.echo = j.value("echo", p.echo);
  p.noise = j.value("noise", p.noise);
  p.concentration = j.value("concentration", p.concentration);
  p.sentences_per_email = j.value("sentences_per_email", p.sentences_per_email);
  p.start_skew = j.value("start_skew", p.start_skew);
  if (j.contains("residual")) {
    p.residual.clear();
    for (const auto& r : j["residual"]) p.residual.emplace_back(r.at(0).get<int>(), r.at(1).get<double>());
  }
  p.purity = j.value("purity", p.purity);
  return p;
}

std::vector<double> chain_transition_row(const SynthParams& params, uint32_t k) {
  const int m = static_cast<int>(params.num_topics);
  std::vector<double> row(m, 0.0);
  row[(k + 1) % m] += params.concentration;
  double total = 0;
  for (const auto& [off, w] : params.residual) total += w;
  if (params.concentration < 1) {
    for (const auto& [off, w] : params.residual) {
      row[((static_cast<int>(k) + off) % m + m) % m] += (1 - params.concentration) * w / total;
    }
  }
  return row;
}

std::vector<double> chain_start_distribution(const SynthParams& params) {
  const uint32_t m = params.num_topics;
  // Peak placed so that topic 0's marginal over the first few chain steps
  // stays at 1/M.
  const double centre = 2.5;
  std::vector<double> s(m);
  for (uint32_t k = 0; k < m; ++k) {
    s[k] = 1.0 + params.start_skew * std::cos(2 * std::numbers::pi * (k - centre) / m);
  }
  const double z = std::accumulate(s.begin(), s.end(), 0.0);
  for (double& v : s) v /= z;
  return s;
}

namespace {

uint32_t draw(Rng& rng, std::span<const double> weights) {
  double u = uniform01(rng) * std::accumulate(weights.begin(), weights.end(), 0.0);
  for (uint32_t k = 0; k < weights.size(); ++k) {
    u -= weights[k];
    if (u < 0) return k;
  }
  return static_cast<uint32_t>(weights.size() - 1);
}

uint32_t draw_length(Rng& rng, LengthRange r) {
  return r.min + static_cast<uint32_t>(uniform_index(rng, r.max - r.min + 1));
}

// Dirichlet(1, ..., 1) as normalized exponentials.
std::vector<double> dirichlet_ones(Rng& rng, uint32_t m) {
  std::vector<double> g(m);
  double z = 0;
  for (auto& v : g) {
    v = -std::log(1.0 - uniform01(rng));
    z += v;
  }
  for (auto& v : g) v /= z;
  return g;
}

std::vector<std::vector<std::string>> pseudo_vocabularies(Rng& rng, uint32_t topics, uint32_t per) {
  static constexpr std::string_view kConsonants = "bdfgklmnprstvz";
  static constexpr std::string_view kVowels = "aeiou";
  std::unordered_set<std::string> seen;
  std::vector<std::vector<std::string>> vocab(topics);
  for (auto& words : vocab) {
    while (words.size() < per) {
      std::string w;
      for (int s = 0; s < 3; ++s) {
        w += kConsonants[uniform_index(rng, kConsonants.size())];
        w += kVowels[uniform_index(rng, kVowels.size())];
      }
      if (is_stopword(w) || !seen.insert(w).second) continue;
      words.push_back(std::move(w));
    }
  }
  return vocab;
}

std::string render_sentence(const std::vector<std::string>& words) {
  std::string s;
  for (const auto& w : words) {
    if (!s.empty()) s += ' ';
    s += w;
  }
  s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  s += '.';
  return s;
}

// Splits `words` into sentences with lengths from `range` (the last one may
// be shorter) and renders them.
std::string render_text(Rng& rng, const std::vector<std::string>& words, LengthRange range) {
  std::string text;
  size_t i = 0;
  while (i < words.size()) {
    const size_t n = std::min<size_t>(draw_length(rng, range), words.size() - i);
    std::vector<std::string> sent(words.begin() + i, words.begin() + i + n);
    if (!text.empty()) text += ' ';
    text += render_sentence(sent);
    i += n;
  }
  return text;
}

const std::string& pick_word(Rng& rng, const std::vector<std::string>& words) {
  return words[uniform_index(rng, words.size())];
}

std::string pair_id(uint32_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "p%06u", i);
  return buf;
}

std::vector<uint32_t> derangement(Rng& rng, uint32_t m) {
  std::vector<uint32_t> p(m);
  while (true) {
    std::iota(p.begin(), p.end(), 0u);
    shuffle(p, rng);
    bool ok = true;
    for (uint32_t k = 0; k < m; ++k) ok = ok && p[k] != k;
    if (ok) return p;
  }
}

std::vector<std::string> mixture_words(Rng& rng, const std::vector<double>& theta, uint32_t n,
                                       const std::vector<std::vector<std::string>>& vocab) {
  std::vector<std::string> out;
  out.reserve(n);
  for (uint32_t i = 0; i < n; ++i) out.push_back(pick_word(rng, vocab[draw(rng, theta)]));
  return out;
}

std::vector<double> noisy(Rng& rng, std::vector<double> base, double noise) {
  const auto g = dirichlet_ones(rng, static_cast<uint32_t>(base.size()));
  for (size_t k = 0; k < base.size(); ++k) base[k] = (1 - noise) * base[k] + noise * g[k];
  return base;
}

SynthCorpus make_coupled(const SynthParams& p, Rng& rng,
                         const std::vector<std::vector<std::string>>& vocab) {
  SynthCorpus out;
  const uint32_t m = p.num_topics;
  const auto pi = derangement(rng, m);
  json topics = json::array();
  for (uint32_t i = 0; i < p.num_pairs; ++i) {
    const auto t = static_cast<uint32_t>(uniform_index(rng, m));
    std::vector<double> base_c(m, 0.0), base_a(m, 0.0);
    base_c[t] = 1.0;
    base_a[t] += p.echo;
    base_a[pi[t]] += 1.0 - p.echo;
    const auto theta_c = noisy(rng, base_c, p.noise);
    const auto theta_a = noisy(rng, base_a, p.noise);
    const auto cw = mixture_words(rng, theta_c, draw_length(rng, p.customer_tokens), vocab);
    const auto aw = mixture_words(rng, theta_a, draw_length(rng, p.agent_tokens), vocab);
    EmailPair pair{pair_id(i), render_text(rng, cw, p.sentence_tokens),
                   render_text(rng, aw, p.sentence_tokens)};
    out.pairs.push_back(std::move(pair));
    topics.push_back(t);
  }
  out.oracle["permutation"] = pi;
  out.oracle["customer_topic"] = std::move(topics);
  return out;
}

SynthCorpus make_chain(const SynthParams& p, Rng& rng,
                       const std::vector<std::vector<std::string>>& vocab) {
  SynthCorpus out;
  const uint32_t m = p.num_topics;
  const auto start = chain_start_distribution(p);
  std::vector<std::vector<double>> rows(m);
  for (uint32_t k = 0; k < m; ++k) rows[k] = chain_transition_row(p, k);
  auto sentence_words = [&](uint32_t topic, uint32_t n) {
    std::vector<std::string> words;
    for (uint32_t i = 0; i < n; ++i) {
      const uint32_t z =
          uniform01(rng) < p.purity ? topic : static_cast<uint32_t>(uniform_index(rng, m));
      words.push_back(pick_word(rng, vocab[z]));
    }
    return words;
  };
  json customer_topics = json::array(), sentence_topics = json::array();
  for (uint32_t i = 0; i < p.num_pairs; ++i) {
    const uint32_t t = draw(rng, start);
    const auto cw = sentence_words(t, draw_length(rng, p.customer_tokens));
    std::string agent;
    json seq = json::array();
    uint32_t z = t;
    for (uint32_t j = 0; j < p.sentences_per_email; ++j) {
      z = draw(rng, rows[z]);
      seq.push_back(z);
      if (!agent.empty()) agent += ' ';
      agent += render_sentence(sentence_words(z, draw_length(rng, p.sentence_tokens)));
    }
    out.pairs.push_back({pair_id(i), render_text(rng, cw, p.sentence_tokens), agent});
    customer_topics.push_back(t);
    sentence_topics.push_back(std::move(seq));
  }
  json matrix = json::array();
  for (const auto& r : rows) matrix.push_back(r);
  out.oracle["transition"] = std::move(matrix);
  out.oracle["start"] = start;
  out.oracle["customer_topic"] = std::move(customer_topics);
  out.oracle["sentence_topics"] = std::move(sentence_topics);
  return out;
}

SynthCorpus make_two_vocab(const SynthParams& p, Rng& rng,
                           const std::vector<std::vector<std::string>>& vocab) {
  SynthCorpus out;
  json topics = json::array();
  for (uint32_t i = 0; i < p.num_pairs; ++i) {
    const uint32_t t = i % 2;
    auto words = [&](LengthRange r) {
      std::vector<std::string> w;
      const uint32_t n = draw_length(rng, r);
      for (uint32_t k = 0; k < n; ++k) w.push_back(pick_word(rng, vocab[t]));
      return w;
    };
    const auto cw = words(p.customer_tokens);
    const auto aw = words(p.agent_tokens);
    out.pairs.push_back({pair_id(i), render_text(rng, cw, p.sentence_tokens),
                         render_text(rng, aw, p.sentence_tokens)});
    topics.push_back(t);
  }
  out.oracle["pair_topic"] = std::move(topics);
  return out;
}

}  // namespace

SynthCorpus synthesize(const SynthParams& params) {
  params.validate();
  Rng rng(mix_seed(params.seed, fnv1a(profile_name(params.profile))));
  std::vector<std::vector<std::string>> vocab;
  if (params.profile == SynthProfile::kTwoVocab) {
    for (char prefix : {'a', 'b'}) {
      std::vector<std::string> words;
      for (uint32_t k = 1; k <= params.words_per_topic; ++k) words.push_back(prefix + std::to_string(k));
      vocab.push_back(std::move(words));
    }
  } else {
    vocab = pseudo_vocabularies(rng, params.num_topics, params.words_per_topic);
  }
  SynthCorpus out;
  switch (params.profile) {
    case SynthProfile::kCoupled: out = make_coupled(params, rng, vocab); break;
    case SynthProfile::kChain: out = make_chain(params, rng, vocab); break;
    case SynthProfile::kTwoVocab: out = make_two_vocab(params, rng, vocab); break;
  }
  out.oracle["params"] = params.to_json();
  out.oracle["vocabularies"] = vocab;
  return out;
}

}  // namespace topicreply
