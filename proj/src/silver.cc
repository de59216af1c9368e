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

#include "topicreply/silver.h"

#include <istream>
#include <ostream>

#include "topicreply/common.h"

namespace topicreply {

using nlohmann::json;

std::vector<SilverAnnotation> annotate(std::span<const TokenizedPair> pairs,
                                       const TopicModel& concat_model,
                                       const TopicModel& sentence_model,
                                       const InferOptions& options) {
  if (concat_model.vocabulary_hash() != sentence_model.vocabulary_hash()) {
    throw Error("annotate: concat and sentence models use different vocabularies");
  }
  std::vector<SilverAnnotation> out(pairs.size());
  parallel_for(pairs.size(), [&](size_t i) {
    const auto& pair = pairs[i];
    SilverAnnotation& a = out[i];
    a.id = pair.id;
    a.tau_ca_customer = infer(concat_model, pair.customer.tokens, options);
    a.tau_ca_agent = infer(concat_model, pair.agent.tokens, options);
    a.sentences.reserve(pair.agent.sentences.size());
    for (size_t j = 0; j < pair.agent.sentences.size(); ++j) {
      SentenceLabel s;
      s.j = static_cast<uint32_t>(j);
      const auto tokens = pair.agent.sentence(j);
      s.empty = tokens.empty();
      s.tau_s = infer(sentence_model, tokens, options);
      const auto dom = dominant_topic(s.tau_s);
      s.dominant = dom.topic;
      s.peaked = dom.peaked;
      a.sentences.push_back(std::move(s));
    }
  });
  return out;
}

TransitionSet transition_pairs(std::span<const SilverAnnotation> annotations) {
  TransitionSet set;
  for (size_t i = 0; i < annotations.size(); ++i) {
    const auto& sents = annotations[i].sentences;
    if (sents.empty()) continue;
    set.first.push_back({i, sents[0].dominant});
    for (size_t j = 0; j + 1 < sents.size(); ++j) {
      set.transitions.push_back(
          {i, static_cast<uint32_t>(j), sents[j].dominant, sents[j + 1].dominant});
    }
  }
  return set;
}

void write_silver_jsonl(std::ostream& out, std::span<const SilverAnnotation> annotations) {
  for (const auto& a : annotations) {
    json sentences = json::array();
    for (const auto& s : a.sentences) {
      json rec = {{"j", s.j}, {"tau_s", s.tau_s.vec()}, {"dom", s.dominant}, {"peaked", s.peaked}};
      if (s.empty) rec["empty"] = true;
      sentences.push_back(std::move(rec));
    }
    json record = {{"id", a.id},
                   {"tau_ca_c", a.tau_ca_customer.vec()},
                   {"tau_ca_a", a.tau_ca_agent.vec()},
                   {"sentences", std::move(sentences)}};
    out << record.dump() << '\n';
  }
}

std::vector<SilverAnnotation> read_silver_jsonl(std::istream& in) {
  std::vector<SilverAnnotation> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const json r = json::parse(line);
      SilverAnnotation a;
      a.id = r.at("id").get<std::string>();
      a.tau_ca_customer = TopicDistribution(r.at("tau_ca_c").get<std::vector<double>>());
      a.tau_ca_agent = TopicDistribution(r.at("tau_ca_a").get<std::vector<double>>());
      for (const auto& s : r.at("sentences")) {
        SentenceLabel label;
        label.j = s.at("j").get<uint32_t>();
        if (label.j != a.sentences.size()) throw Error("sentence indices must be 0..n-1 in order");
        label.tau_s = TopicDistribution(s.at("tau_s").get<std::vector<double>>());
        label.dominant = s.at("dom").get<uint32_t>();
        label.peaked = s.at("peaked").get<bool>();
        label.empty = s.value("empty", false);
        a.sentences.push_back(std::move(label));
      }
      out.push_back(std::move(a));
    } catch (const std::exception& e) {
      throw Error("silver file line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace topicreply
