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
//
// Suggestion service. SuggestEngine holds the loaded artifacts and answers
// requests as pure functions of the request body; SuggestServer is the HTTP
// shell around it.

#ifndef TOPICREPLY_SERVICE_H_
#define TOPICREPLY_SERVICE_H_

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "topicreply/common.h"
#include "topicreply/corpus.h"
#include "topicreply/predictor.h"
#include "topicreply/topic_model.h"

namespace topicreply {

// Malformed request; maps to HTTP 400.
class BadRequest : public Error {
 public:
  using Error::Error;
};

// Parses "B,S" into burn-in and sample sweeps.
InferOptions parse_serve_sweeps(std::string_view text);

struct ServeOptions {
  std::filesystem::path models_dir = "out";
  // 0 selects the t2_m recorded by the train-predictors manifest.
  uint32_t num_topics = 0;
  InferOptions infer{5, 3};
  size_t exemplars_per_suggestion = 3;
  size_t exemplar_cap = 200;  // per topic, held in memory
};

struct Exemplar {
  std::string text;
  double probability = 0;
};

class SuggestEngine {
 public:
  // Throws MissingArtifactError when a required file is absent.
  static std::unique_ptr<SuggestEngine> load(const ServeOptions& options);

  uint32_t num_topics() const { return num_topics_; }
  const InferOptions& infer_options() const { return infer_; }
  const std::map<std::string, std::string>& fingerprints() const { return fingerprints_; }
  // Exemplars kept for topic k of the given view ("CA" or "S").
  const std::vector<Exemplar>& exemplars(View view, uint32_t topic) const;

  nlohmann::json health() const;
  // Both throw BadRequest on invalid bodies.
  nlohmann::json suggest_reply(const nlohmann::json& body) const;
  nlohmann::json suggest_next(const nlohmann::json& body) const;
  // Throws BadRequest for an unknown view tag.
  nlohmann::json topics(std::string_view view) const;

 private:
  SuggestEngine() = default;

  nlohmann::json suggestions(View view, const TopicDistribution& dist, size_t k) const;
  size_t parse_k(const nlohmann::json& body) const;
  nlohmann::json sweeps_json() const;

  uint32_t num_topics_ = 0;
  size_t exemplars_per_suggestion_ = 3;
  InferOptions infer_;
  Vocabulary vocabulary_;
  std::unique_ptr<TopicModel> concat_model_;
  std::unique_ptr<TopicModel> sentence_model_;
  PredictorSuite suite_;
  std::map<View, std::vector<TopicDescriptor>> descriptors_;
  std::map<View, std::vector<std::vector<Exemplar>>> exemplars_;
  std::map<std::string, std::string> fingerprints_;
};

struct HttpReply {
  int status = 200;
  nlohmann::json body;
};

// Routes one request to the engine. A null engine means loading has not
// finished; `load_error` non-empty means it failed.
HttpReply dispatch(const SuggestEngine* engine, const std::string& load_error,
                   std::string_view method, std::string_view path,
                   const std::map<std::string, std::string>& query, std::string_view body);

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 binds any free port
  std::string cors_origin = "*";  // empty disables CORS headers
};

class SuggestServer {
 public:
  using Loader = std::function<std::unique_ptr<SuggestEngine>()>;

  SuggestServer(ServerOptions options, Loader loader);
  ~SuggestServer();
  SuggestServer(const SuggestServer&) = delete;
  SuggestServer& operator=(const SuggestServer&) = delete;

  // Binds, starts loading in the background and serves on a worker thread.
  // Returns the bound port; throws Error when binding fails.
  int start();
  // Blocks until stop() is called from another thread.
  void wait();
  void stop();
  bool loaded() const { return engine_ready_.load(); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  ServerOptions options_;
  Loader loader_;
  std::atomic<bool> engine_ready_{false};
};

}  // namespace topicreply

#endif  // TOPICREPLY_SERVICE_H_
