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

#include "topicreply/service.h"

#include <algorithm>
#include <charconv>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

// Bursts of concurrent clients overflow httplib's default backlog of 5.
#define CPPHTTPLIB_LISTEN_BACKLOG 128
#include "httplib.h"
#include "topicreply/pipeline.h"
#include "topicreply/silver.h"

namespace topicreply {

namespace fs = std::filesystem;
using nlohmann::json;

InferOptions parse_serve_sweeps(std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) {
    throw std::invalid_argument("serve sweeps must look like B,S: " + std::string(text));
  }
  auto number = [&](std::string_view s) {
    const std::string t = trim(s);
    uint32_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
      throw std::invalid_argument("serve sweeps must look like B,S: " + std::string(text));
    }
    return v;
  };
  InferOptions o;
  o.burn_in = number(text.substr(0, comma));
  o.samples = number(text.substr(comma + 1));
  if (o.samples == 0) throw std::invalid_argument("serve sweeps need at least one sample");
  return o;
}

namespace {

json read_json_file(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error("malformed JSON in " + path.string() + ": " + e.what());
  }
}

uint32_t manifest_topic_count(const ArtifactLayout& layout) {
  const auto path = layout.manifest(Stage::kTrainPredictors);
  if (!fs::exists(path)) {
    throw MissingArtifactError(path, "no trained predictors; run `topicreply train-predictors` first");
  }
  return read_json_file(path).at("config").at("t2_m").get<uint32_t>();
}

struct Candidate {
  double probability;
  size_t pair;
  size_t j;
  std::string text;
};

// Highest probability first; ties keep corpus order. Repeated texts are kept
// once.
std::vector<Exemplar> top_exemplars(std::vector<Candidate> c, size_t cap) {
  std::sort(c.begin(), c.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(b.probability, a.pair, a.j) < std::tie(a.probability, b.pair, b.j);
  });
  std::vector<Exemplar> out;
  std::set<std::string> seen;
  for (auto& x : c) {
    if (out.size() >= cap) break;
    if (!seen.insert(x.text).second) continue;
    out.push_back({std::move(x.text), x.probability});
  }
  return out;
}

std::vector<TopicDescriptor> load_descriptors(const ArtifactLayout& layout, uint32_t m,
                                              const TopicModel& model,
                                              const LoadedCorpus& corpus) {
  const auto path = layout.topics(m, model.view());
  if (fs::exists(path)) return descriptors_from_json(read_json_file(path));
  const auto docs = build_documents(corpus.train_tokens, model.view());
  return describe_topics(model, docs);
}

std::string required_string(const json& body, const char* key) {
  if (!body.contains(key) || !body[key].is_string()) {
    throw BadRequest(std::string("field '") + key + "' must be a string");
  }
  return body[key].get<std::string>();
}

}  // namespace

std::unique_ptr<SuggestEngine> SuggestEngine::load(const ServeOptions& options) {
  const ArtifactLayout layout(options.models_dir);
  std::unique_ptr<SuggestEngine> e(new SuggestEngine());
  e->num_topics_ = options.num_topics ? options.num_topics : manifest_topic_count(layout);
  e->infer_ = options.infer;
  e->exemplars_per_suggestion_ = options.exemplars_per_suggestion;
  const uint32_t m = e->num_topics_;

  auto fingerprint = [&](const fs::path& p) {
    e->fingerprints_[fs::relative(p, layout.root()).generic_string()] = hash_file_hex(p);
  };

  const auto corpus = load_corpus(layout);
  e->vocabulary_ = corpus.vocabulary;
  fingerprint(layout.vocabulary());

  const auto ca_path = layout.topic_model(m, View::kConcat);
  const auto s_path = layout.topic_model(m, View::kSentence);
  const auto suite_path = layout.suite(m);
  e->concat_model_ = std::make_unique<TopicModel>(load_topic_model(read_file(ca_path)));
  e->sentence_model_ = std::make_unique<TopicModel>(load_topic_model(read_file(s_path)));
  e->suite_ = load_suite(read_file(suite_path));
  fingerprint(ca_path);
  fingerprint(s_path);
  fingerprint(suite_path);
  if (e->suite_.num_topics != m || e->concat_model_->num_topics() != m ||
      e->sentence_model_->num_topics() != m) {
    throw Error("served artifacts disagree on the number of topics");
  }

  e->descriptors_[View::kConcat] = load_descriptors(layout, m, *e->concat_model_, corpus);
  e->descriptors_[View::kSentence] = load_descriptors(layout, m, *e->sentence_model_, corpus);
  for (View v : {View::kCustomer, View::kAgent}) {
    const auto path = layout.topic_model(m, v);
    if (!fs::exists(path)) continue;
    const auto model = load_topic_model(read_file(path));
    e->descriptors_[v] = load_descriptors(layout, m, model, corpus);
  }

  const auto silver_path = layout.silver(m, "train");
  const auto silver = load_silver(silver_path);
  fingerprint(silver_path);
  if (silver.size() != corpus.train.size()) {
    throw Error("training silver does not match the stored corpus split");
  }
  std::vector<std::vector<Candidate>> by_sentence(m), by_reply(m);
  for (size_t i = 0; i < silver.size(); ++i) {
    const auto texts = segment_sentences(corpus.train[i].agent_text);
    for (const auto& s : silver[i].sentences) {
      if (!s.peaked || s.empty || s.j >= texts.size()) continue;
      by_sentence[s.dominant].push_back({s.tau_s[s.dominant], i, s.j, texts[s.j]});
    }
    const auto d = dominant_topic(silver[i].tau_ca_agent);
    if (d.peaked && !texts.empty()) by_reply[d.topic].push_back({d.probability, i, 0, texts[0]});
  }
  auto& s_ex = e->exemplars_[View::kSentence];
  auto& ca_ex = e->exemplars_[View::kConcat];
  for (uint32_t k = 0; k < m; ++k) {
    s_ex.push_back(top_exemplars(std::move(by_sentence[k]), options.exemplar_cap));
    ca_ex.push_back(top_exemplars(std::move(by_reply[k]), options.exemplar_cap));
  }
  return e;
}

const std::vector<Exemplar>& SuggestEngine::exemplars(View view, uint32_t topic) const {
  return exemplars_.at(view).at(topic);
}

json SuggestEngine::sweeps_json() const {
  return {{"burn_in", infer_.burn_in}, {"samples", infer_.samples}};
}

json SuggestEngine::health() const {
  return {{"status", "ok"},
          {"num_topics", num_topics_},
          {"fingerprints", fingerprints_},
          {"serve_sweeps", sweeps_json()}};
}

size_t SuggestEngine::parse_k(const json& body) const {
  if (!body.contains("k")) return std::min<size_t>(5, num_topics_);
  const auto& k = body["k"];
  if (!k.is_number_integer()) throw BadRequest("field 'k' must be an integer");
  const auto v = k.get<int64_t>();
  if (v < 1 || v > static_cast<int64_t>(num_topics_)) {
    throw BadRequest("k must be in [1, " + std::to_string(num_topics_) + "]");
  }
  return static_cast<size_t>(v);
}

json SuggestEngine::suggestions(View view, const TopicDistribution& dist, size_t k) const {
  const auto& desc = descriptors_.at(view);
  const auto& ex = exemplars_.at(view);
  json out = json::array();
  for (uint32_t t : ranked_topics(dist.probs(), k)) {
    json texts = json::array();
    for (size_t i = 0; i < ex[t].size() && i < exemplars_per_suggestion_; ++i) {
      texts.push_back(ex[t][i].text);
    }
    out.push_back({{"topic", t},
                   {"probability", dist[t]},
                   {"top_words", desc[t].top_words},
                   {"top_phrases", desc[t].top_phrases},
                   {"exemplars", std::move(texts)}});
  }
  return out;
}

json SuggestEngine::suggest_reply(const json& body) const {
  if (!body.is_object()) throw BadRequest("body must be a JSON object");
  const auto customer = required_string(body, "customer");
  if (trim(customer).empty()) throw BadRequest("customer text is empty");
  const size_t k = parse_k(body);

  const auto tokens = vocabulary_.encode(customer);
  const auto customer_tau = infer(*concat_model_, tokens, infer_);
  const auto tau = predict_t1(suite_.t1, tokens, customer_tau);
  return {{"view", "CA"},
          {"topics", suggestions(View::kConcat, tau, k)},
          {"tau", tau.vec()},
          {"serve_sweeps", sweeps_json()}};
}

json SuggestEngine::suggest_next(const json& body) const {
  if (!body.is_object()) throw BadRequest("body must be a JSON object");
  const auto customer = required_string(body, "customer");
  if (trim(customer).empty()) throw BadRequest("customer text is empty");
  std::vector<std::string> sentences;
  if (body.contains("sentences")) {
    if (!body["sentences"].is_array()) throw BadRequest("field 'sentences' must be an array");
    for (const auto& s : body["sentences"]) {
      if (!s.is_string()) throw BadRequest("every sentence must be a string");
      sentences.push_back(s.get<std::string>());
    }
  }
  const size_t k = parse_k(body);

  const auto customer_tokens = vocabulary_.encode(customer);
  const auto customer_tau = infer(*concat_model_, customer_tokens, infer_);
  NextContext ctx;
  ctx.customer_tokens = customer_tokens;
  ctx.customer_tau = &customer_tau;
  ctx.sentences_so_far = static_cast<uint32_t>(sentences.size());
  std::vector<uint32_t> last_tokens;
  TopicDistribution last_tau;
  if (!sentences.empty()) {
    last_tokens = vocabulary_.encode(sentences.back());
    last_tau = infer(*sentence_model_, last_tokens, infer_);
    ctx.last_sentence_tokens = last_tokens;
    ctx.last_sentence_tau = &last_tau;
  }
  const auto pred = predict_next(suite_.t2, ctx);
  json out = {{"view", "S"},
              {"position", sentences.size()},
              {"route", route_name(pred.route)},
              {"topics", suggestions(View::kSentence, pred.dist, k)},
              {"tau", pred.dist.vec()},
              {"serve_sweeps", sweeps_json()}};
  if (pred.route != NextRoute::kFirstSentence) out["last_dominant"] = pred.family_key;
  return out;
}

json SuggestEngine::topics(std::string_view view) const {
  View v;
  try {
    v = parse_view(view);
  } catch (const std::invalid_argument&) {
    throw BadRequest("unknown view '" + std::string(view) + "'; expected C, A, CA or S");
  }
  const auto it = descriptors_.find(v);
  if (it == descriptors_.end()) {
    throw BadRequest("view " + std::string(view) + " is not loaded");
  }
  return {{"view", view_tag(v)},
          {"num_topics", num_topics_},
          {"topics", descriptors_to_json(it->second)}};
}

HttpReply dispatch(const SuggestEngine* engine, const std::string& load_error,
                   std::string_view method, std::string_view path,
                   const std::map<std::string, std::string>& query, std::string_view body) {
  const bool known = path == "/health" || path == "/topics" || path == "/suggest/reply" ||
                     path == "/suggest/next";
  if (!known) return {404, {{"error", "no route for " + std::string(path)}}};
  const bool is_get = path == "/health" || path == "/topics";
  if (method != (is_get ? "GET" : "POST")) {
    return {405, {{"error", "method not allowed"}}};
  }
  if (engine == nullptr) {
    if (!load_error.empty()) return {503, {{"status", "error"}, {"error", load_error}}};
    return {503, {{"status", "loading"}}};
  }
  try {
    if (path == "/health") return {200, engine->health()};
    if (path == "/topics") {
      const auto it = query.find("view");
      return {200, engine->topics(it == query.end() ? "S" : it->second)};
    }
    json parsed;
    try {
      parsed = json::parse(body);
    } catch (const json::exception&) {
      throw BadRequest("body is not valid JSON");
    }
    if (path == "/suggest/reply") return {200, engine->suggest_reply(parsed)};
    return {200, engine->suggest_next(parsed)};
  } catch (const BadRequest& e) {
    return {400, {{"error", e.what()}}};
  } catch (const std::exception& e) {
    return {500, {{"error", e.what()}}};
  }
}

struct SuggestServer::Impl {
  httplib::Server http;
  std::thread listener;
  std::thread loader;
  std::mutex mu;
  std::shared_ptr<const SuggestEngine> engine;
  std::string load_error;
};

SuggestServer::SuggestServer(ServerOptions options, Loader loader)
    : impl_(std::make_unique<Impl>()), options_(std::move(options)), loader_(std::move(loader)) {}

SuggestServer::~SuggestServer() {
  stop();
  if (impl_->listener.joinable()) impl_->listener.join();
  if (impl_->loader.joinable()) impl_->loader.join();
}

int SuggestServer::start() {
  auto* impl = impl_.get();
  const std::string origin = options_.cors_origin;
  auto handle = [impl, origin](const httplib::Request& req, httplib::Response& res) {
    std::shared_ptr<const SuggestEngine> engine;
    std::string error;
    {
      std::lock_guard<std::mutex> lock(impl->mu);
      engine = impl->engine;
      error = impl->load_error;
    }
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);
    const auto reply = dispatch(engine.get(), error, req.method, req.path, query, req.body);
    res.status = reply.status;
    res.set_content(reply.body.dump(), "application/json");
  };
  // dispatch() owns routing so unknown paths and wrong methods get JSON errors.
  impl->http.Get(".*", handle);
  impl->http.Post(".*", handle);
  if (!origin.empty()) {
    impl->http.set_default_headers({{"Access-Control-Allow-Origin", origin},
                                    {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                    {"Access-Control-Allow-Headers", "Content-Type"}});
    impl->http.Options(".*", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
    });
  }

  int port = options_.port;
  if (port == 0) {
    port = impl->http.bind_to_any_port(options_.host);
    if (port < 0) throw Error("cannot bind " + options_.host);
  } else if (!impl->http.bind_to_port(options_.host, port)) {
    throw Error("cannot bind " + options_.host + ":" + std::to_string(port));
  }

  impl->loader = std::thread([this, impl] {
    std::shared_ptr<const SuggestEngine> engine;
    std::string error;
    try {
      engine = loader_();
      if (!engine) error = "loader returned no engine";
    } catch (const std::exception& e) {
      error = e.what();
    }
    std::lock_guard<std::mutex> lock(impl->mu);
    impl->engine = std::move(engine);
    impl->load_error = std::move(error);
    engine_ready_ = impl->engine != nullptr;
  });
  impl->listener = std::thread([impl] { impl->http.listen_after_bind(); });
  impl->http.wait_until_ready();
  return port;
}

void SuggestServer::wait() {
  if (impl_->listener.joinable()) impl_->listener.join();
}

void SuggestServer::stop() { impl_->http.stop(); }

}  // namespace topicreply
