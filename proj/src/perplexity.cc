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

#include "topicreply/perplexity.h"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "topicreply/common.h"

namespace topicreply {

nlohmann::json PerplexityReport::to_json() const {
  return {{"M", num_topics},         {"pp_unconditional", pp_unconditional},
          {"pp_conditional", pp_conditional}, {"token_total", token_total},
          {"doc_count", doc_count},   {"estimator", estimator}};
}

double doc_log_likelihood(const TopicModel& model, std::span<const uint32_t> tokens,
                          const InferOptions& options) {
  if (tokens.empty()) return 0.0;
  const TopicDistribution theta = infer(model, tokens, options);
  const uint32_t m = model.num_topics();
  double ll = 0;
  for (uint32_t w : tokens) {
    const auto phi = model.phi_column(w);
    double p = 0;
    for (uint32_t k = 0; k < m; ++k) p += theta[k] * phi[k];
    ll += std::log(p);
  }
  return ll;
}

double perplexity_from_log_likelihood(double log_likelihood, size_t token_total) {
  if (token_total == 0) throw Error("perplexity: zero tokens");
  return std::exp(-log_likelihood / static_cast<double>(token_total));
}

double perplexity_unconditional(const TopicModel& agent_model,
                                std::span<const Document> agent_docs,
                                const InferOptions& options) {
  if (agent_docs.empty()) throw Error("perplexity: empty test set");
  std::vector<double> ll(agent_docs.size());
  parallel_for(agent_docs.size(),
               [&](size_t i) { ll[i] = doc_log_likelihood(agent_model, agent_docs[i], options); });
  double total = 0;
  size_t tokens = 0;
  for (size_t i = 0; i < agent_docs.size(); ++i) {
    total += ll[i];
    tokens += agent_docs[i].size();
  }
  return perplexity_from_log_likelihood(total, tokens);
}

double perplexity_conditional(const TopicModel& concat_model,
                              std::span<const Document> customer_docs,
                              std::span<const Document> agent_docs,
                              const InferOptions& options) {
  if (agent_docs.empty()) throw Error("perplexity: empty test set");
  if (customer_docs.size() != agent_docs.size()) {
    throw std::invalid_argument("perplexity: customer and agent lists differ in length");
  }
  std::vector<double> ll(agent_docs.size());
  parallel_for(agent_docs.size(), [&](size_t i) {
    Document joint = customer_docs[i];
    joint.insert(joint.end(), agent_docs[i].begin(), agent_docs[i].end());
    ll[i] = doc_log_likelihood(concat_model, joint, options) -
            doc_log_likelihood(concat_model, customer_docs[i], options);
  });
  double total = 0;
  size_t tokens = 0;
  for (size_t i = 0; i < agent_docs.size(); ++i) {
    total += ll[i];
    tokens += agent_docs[i].size();
  }
  return perplexity_from_log_likelihood(total, tokens);
}

PerplexityReport perplexity_report(const TopicModel& agent_model,
                                   const TopicModel& concat_model,
                                   std::span<const TokenizedPair> test_pairs,
                                   const InferOptions& options) {
  std::vector<Document> customer, agent;
  for (const auto& p : test_pairs) {
    customer.push_back(p.customer.tokens);
    agent.push_back(p.agent.tokens);
  }
  PerplexityReport r;
  r.num_topics = agent_model.num_topics();
  r.doc_count = test_pairs.size();
  for (const auto& a : agent) r.token_total += a.size();
  r.pp_unconditional = perplexity_unconditional(agent_model, agent, options);
  r.pp_conditional = perplexity_conditional(concat_model, customer, agent, options);
  return r;
}

std::string perplexity_csv(std::span<const PerplexityReport> reports) {
  std::ostringstream out;
  out << "M,pp_unconditional,pp_conditional\n";
  char buf[96];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof(buf), "%u,%.6f,%.6f\n", r.num_topics, r.pp_unconditional,
                  r.pp_conditional);
    out << buf;
  }
  return out.str();
}

}  // namespace topicreply
