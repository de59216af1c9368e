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

#include "topicreply/evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include "topicreply/common.h"

namespace topicreply {

using nlohmann::json;

double bhattacharyya(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("bhattacharyya: length mismatch");
  double s = 0;
  for (size_t k = 0; k < p.size(); ++k) s += std::sqrt(p[k] * q[k]);
  return std::clamp(s, 0.0, 1.0);
}

double mean_bc(std::span<const TopicDistribution> predictions,
               std::span<const TopicDistribution> targets) {
  if (predictions.size() != targets.size()) throw std::invalid_argument("mean_bc: length mismatch");
  if (predictions.empty()) throw Error("mean_bc: empty input");
  double s = 0;
  for (size_t i = 0; i < predictions.size(); ++i) s += bhattacharyya(predictions[i], targets[i]);
  return s / static_cast<double>(predictions.size());
}

double mean_kl(std::span<const TopicDistribution> predictions,
               std::span<const TopicDistribution> targets) {
  if (predictions.size() != targets.size()) throw std::invalid_argument("mean_kl: length mismatch");
  if (predictions.empty()) throw Error("mean_kl: empty input");
  double s = 0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    s += kl_divergence(targets[i].probs(), predictions[i].probs());
  }
  return s / static_cast<double>(predictions.size());
}

double text_ranking_recall1(std::span<const RankingItem> items,
                            std::span<const RankingCandidate> pool, uint32_t k, uint64_t seed) {
  if (k < 1) throw std::invalid_argument("recall@1: k must be >= 1");
  if (items.empty()) throw Error("recall@1: no test items");
  if (k == 1) return 1.0;
  std::vector<int> hits(items.size(), 0);
  parallel_for(items.size(), [&](size_t i) {
    const auto& item = items[i];
    size_t eligible = 0;
    for (const auto& c : pool) eligible += c.id != item.id;
    if (eligible < k - 1) {
      throw Error("recall@1: only " + std::to_string(eligible) + " distractors for k=" +
                  std::to_string(k));
    }
    const double truth_bc = bhattacharyya(item.prediction, item.truth);
    Rng rng(mix_seed(seed, i));
    std::set<size_t> used;
    bool win = true;
    while (used.size() < k - 1) {
      const size_t c = uniform_index(rng, pool.size());
      if (pool[c].id == item.id || !used.insert(c).second) continue;
      if (bhattacharyya(item.prediction, pool[c].dist) >= truth_bc) win = false;
    }
    hits[i] = win;
  });
  double s = 0;
  for (int h : hits) s += h;
  return s / static_cast<double>(items.size());
}

uint32_t topic_rank(std::span<const double> dist, uint32_t label) {
  if (label >= dist.size()) throw std::invalid_argument("topic_rank: label out of range");
  uint32_t rank = 0;
  for (uint32_t k = 0; k < dist.size(); ++k) {
    if (dist[k] > dist[label] || (k < label && dist[k] == dist[label])) ++rank;
  }
  return rank;
}

double dominant_topic_accuracy(std::span<const TopicDistribution> predictions,
                               std::span<const uint32_t> dominants, uint32_t k) {
  if (predictions.size() != dominants.size()) {
    throw std::invalid_argument("dta: length mismatch");
  }
  if (predictions.empty()) throw Error("dta: empty input");
  const size_t m = predictions[0].size();
  if (k < 1 || k > m) throw std::invalid_argument("dta: K must be in [1, M]");
  size_t hits = 0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    hits += topic_rank(predictions[i].probs(), dominants[i]) < k;
  }
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

const EvalRow& EvalReport::row(std::string_view system, std::string_view features) const {
  for (const auto& r : rows) {
    if (r.system == system && r.features == features) return r;
  }
  throw Error("no eval row " + std::string(system) + "/" + std::string(features));
}

void EvalReport::validate() const {
  std::set<std::pair<std::string, std::string>> keys;
  auto in_range = [](double v) { return v >= 0.0 && v <= 1.0; };
  for (const auto& r : rows) {
    if (!keys.insert({r.system, r.features}).second) {
      throw Error("duplicate eval row " + r.system + "/" + r.features);
    }
    bool ok = in_range(r.mean_bc);
    for (const auto& [key, v] : r.dta) ok = ok && in_range(v);
    for (const auto& [key, v] : r.recall1) ok = ok && in_range(v);
    if (!ok) throw Error("eval row " + r.system + "/" + r.features + " has a value outside [0,1]");
  }
}

namespace {

json metric_map(const std::map<uint32_t, double>& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[std::to_string(k)] = v;
  return j;
}

std::map<uint32_t, double> parse_metric_map(const json& j) {
  std::map<uint32_t, double> m;
  for (const auto& [k, v] : j.items()) m[static_cast<uint32_t>(std::stoul(k))] = v.get<double>();
  return m;
}

std::string task_name(EvalTask t) { return t == EvalTask::kT1 ? "T1" : "T2"; }

}  // namespace

json EvalReport::to_json() const {
  json list = json::array();
  for (const auto& r : rows) {
    list.push_back({{"system", r.system},
                    {"features", r.features},
                    {"mean_bc", r.mean_bc},
                    {"mean_kl", r.mean_kl},
                    {"dta", metric_map(r.dta)},
                    {"recall1", metric_map(r.recall1)}});
  }
  return {{"task", task_name(task)}, {"M", num_topics}, {"test_size", test_size}, {"rows", list}};
}

EvalReport EvalReport::from_json(const json& j) {
  EvalReport r;
  const auto task = j.at("task").get<std::string>();
  if (task != "T1" && task != "T2") throw Error("unknown eval task " + task);
  r.task = task == "T1" ? EvalTask::kT1 : EvalTask::kT2;
  r.num_topics = j.at("M").get<uint32_t>();
  r.test_size = j.at("test_size").get<size_t>();
  for (const auto& x : j.at("rows")) {
    EvalRow row;
    row.system = x.at("system").get<std::string>();
    row.features = x.at("features").get<std::string>();
    row.mean_bc = x.at("mean_bc").get<double>();
    row.mean_kl = x.at("mean_kl").get<double>();
    row.dta = parse_metric_map(x.at("dta"));
    row.recall1 = parse_metric_map(x.at("recall1"));
    r.rows.push_back(std::move(row));
  }
  return r;
}

std::string EvalReport::to_table() const {
  std::ostringstream out;
  char buf[64];
  out << task_name(task) << "  M=" << num_topics << "  test=" << test_size << '\n';
  std::set<uint32_t> dta_k, rec_k;
  for (const auto& r : rows) {
    for (const auto& [k, v] : r.dta) dta_k.insert(k);
    for (const auto& [k, v] : r.recall1) rec_k.insert(k);
  }
  std::snprintf(buf, sizeof(buf), "%-14s %-22s %8s %8s", "system", "features", "BC", "KL");
  out << buf;
  for (uint32_t k : dta_k) {
    std::snprintf(buf, sizeof(buf), " %8s", ("DTA@" + std::to_string(k)).c_str());
    out << buf;
  }
  for (uint32_t k : rec_k) {
    std::snprintf(buf, sizeof(buf), " %8s", ("R@1k=" + std::to_string(k)).c_str());
    out << buf;
  }
  out << '\n';
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-14s %-22s %8.4f %8.4f", r.system.c_str(),
                  r.features.empty() ? "-" : r.features.c_str(), r.mean_bc, r.mean_kl);
    out << buf;
    for (uint32_t k : dta_k) {
      const auto it = r.dta.find(k);
      if (it == r.dta.end()) {
        std::snprintf(buf, sizeof(buf), " %8s", "-");
      } else {
        std::snprintf(buf, sizeof(buf), " %8.4f", it->second);
      }
      out << buf;
    }
    for (uint32_t k : rec_k) {
      const auto it = r.recall1.find(k);
      if (it == r.recall1.end()) {
        std::snprintf(buf, sizeof(buf), " %8s", "-");
      } else {
        std::snprintf(buf, sizeof(buf), " %8.4f", it->second);
      }
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

std::string reports_csv(std::span<const EvalReport> reports) {
  std::set<uint32_t> dta_k, rec_k;
  for (const auto& rep : reports) {
    for (const auto& r : rep.rows) {
      for (const auto& [k, v] : r.dta) dta_k.insert(k);
      for (const auto& [k, v] : r.recall1) rec_k.insert(k);
    }
  }
  std::ostringstream out;
  out << "task,M,system,features,mean_bc,mean_kl";
  for (uint32_t k : dta_k) out << ",dta@" << k;
  for (uint32_t k : rec_k) out << ",recall1@" << k;
  out << '\n';
  char buf[32];
  auto cell = [&](const std::map<uint32_t, double>& m, uint32_t k) {
    const auto it = m.find(k);
    if (it == m.end()) return std::string();
    std::snprintf(buf, sizeof(buf), "%.6f", it->second);
    return std::string(buf);
  };
  for (const auto& rep : reports) {
    for (const auto& r : rep.rows) {
      out << task_name(rep.task) << ',' << rep.num_topics << ',' << r.system << ','
          << r.features;
      std::snprintf(buf, sizeof(buf), ",%.6f", r.mean_bc);
      out << buf;
      std::snprintf(buf, sizeof(buf), ",%.6f", r.mean_kl);
      out << buf;
      for (uint32_t k : dta_k) out << ',' << cell(r.dta, k);
      for (uint32_t k : rec_k) out << ',' << cell(r.recall1, k);
      out << '\n';
    }
  }
  return out.str();
}

EvalReport evaluate_t1(const SoftmaxRegressor& t1, std::span<const TokenizedPair> test_pairs,
                       std::span<const SilverAnnotation> test_annotations,
                       std::span<const SilverAnnotation> train_annotations,
                       const T1EvalOptions& options) {
  if (test_pairs.size() != test_annotations.size()) {
    throw std::invalid_argument("evaluate_t1: pairs and annotations differ in length");
  }
  if (test_pairs.empty()) throw Error("evaluate_t1: empty test set");
  const size_t n = test_pairs.size();
  std::vector<TopicDistribution> proposed(n), copy(n), truth(n);
  parallel_for(n, [&](size_t i) {
    if (test_pairs[i].id != test_annotations[i].id) throw Error("evaluate_t1: id mismatch");
    proposed[i] = predict_t1(t1, test_pairs[i].customer.tokens, test_annotations[i].tau_ca_customer);
    copy[i] = baseline_copy_customer(test_annotations[i].tau_ca_customer);
    truth[i] = test_annotations[i].tau_ca_agent;
  });
  std::vector<RankingCandidate> pool;
  pool.reserve(train_annotations.size());
  for (const auto& a : train_annotations) pool.push_back({a.id, a.tau_ca_agent});

  EvalReport report;
  report.task = EvalTask::kT1;
  report.num_topics = static_cast<uint32_t>(truth[0].size());
  report.test_size = n;
  auto add = [&](const std::string& name, const std::vector<TopicDistribution>& pred) {
    EvalRow row;
    row.system = name;
    row.mean_bc = mean_bc(pred, truth);
    row.mean_kl = mean_kl(pred, truth);
    std::vector<RankingItem> items(n);
    for (size_t i = 0; i < n; ++i) items[i] = {test_pairs[i].id, pred[i], truth[i]};
    for (uint32_t k : options.recall_k) {
      row.recall1[k] = text_ranking_recall1(items, pool, k, options.seed);
    }
    report.rows.push_back(std::move(row));
  };
  add("proposed", proposed);
  add("copy_customer", copy);
  report.validate();
  return report;
}

EvalReport evaluate_t2(std::span<const NamedT2Models> proposed, const TopicDistribution& average,
                       std::span<const TokenizedPair> test_pairs,
                       std::span<const SilverAnnotation> test_annotations,
                       const T2EvalOptions& options) {
  if (test_pairs.size() != test_annotations.size()) {
    throw std::invalid_argument("evaluate_t2: pairs and annotations differ in length");
  }
  struct Slot {
    size_t pair;
    uint32_t j;
  };
  std::vector<Slot> slots;
  std::vector<TopicDistribution> truth;
  std::vector<uint32_t> dominants;
  for (size_t i = 0; i < test_pairs.size(); ++i) {
    if (test_pairs[i].id != test_annotations[i].id) throw Error("evaluate_t2: id mismatch");
    const auto& sents = test_annotations[i].sentences;
    for (uint32_t j = 0; j < sents.size(); ++j) {
      slots.push_back({i, j});
      truth.push_back(sents[j].tau_s);
      dominants.push_back(sents[j].dominant);
    }
  }
  if (slots.empty()) throw Error("evaluate_t2: no test sentences");
  const uint32_t m = static_cast<uint32_t>(average.size());

  EvalReport report;
  report.task = EvalTask::kT2;
  report.num_topics = m;
  report.test_size = slots.size();
  auto add = [&](const std::string& system, const std::string& features,
                 const std::vector<TopicDistribution>& pred) {
    EvalRow row;
    row.system = system;
    row.features = features;
    row.mean_bc = mean_bc(pred, truth);
    row.mean_kl = mean_kl(pred, truth);
    for (uint32_t k : options.dta_k) {
      if (k >= 1 && k <= m) row.dta[k] = dominant_topic_accuracy(pred, dominants, k);
    }
    report.rows.push_back(std::move(row));
  };
  add("uniform", "", std::vector<TopicDistribution>(slots.size(), baseline_uniform(m)));
  add("average", "", std::vector<TopicDistribution>(slots.size(), average));
  for (const auto& p : proposed) {
    std::vector<TopicDistribution> pred(slots.size());
    parallel_for(slots.size(), [&](size_t s) {
      const auto& pair = test_pairs[slots[s].pair];
      const auto& ann = test_annotations[slots[s].pair];
      const uint32_t j = slots[s].j;
      NextContext ctx;
      ctx.customer_tokens = pair.customer.tokens;
      ctx.customer_tau = &ann.tau_ca_customer;
      ctx.sentences_so_far = j;
      if (j > 0) {
        ctx.last_sentence_tokens = pair.agent.sentence(j - 1);
        ctx.last_sentence_tau = &ann.sentences[j - 1].tau_s;
      }
      pred[s] = predict_next(*p.models, ctx).dist;
    });
    add("proposed", p.features, pred);
  }
  report.validate();
  return report;
}

}  // namespace topicreply
