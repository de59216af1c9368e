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
// topicreply command-line tool. Exit codes: 0 success, 1 runtime failure,
// 2 usage error, 3 missing or stale prerequisite artifact.

#include <csignal>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "topicreply/common.h"
#include "topicreply/pipeline.h"
#include "topicreply/service.h"
#include "topicreply/synth.h"

namespace {

using namespace topicreply;
using nlohmann::json;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitMissing = 3;

struct PipelineFlags {
  std::string config_path;
  std::string corpus;
  std::string out_dir = "out";
  std::vector<uint32_t> m_grid;
  std::optional<uint32_t> t2_m;
  std::optional<uint64_t> seed;
  std::optional<uint32_t> sweeps;
  bool quiet = false;

  void attach(CLI::App* app, bool with_corpus) {
    app->add_option("--config", config_path, "JSON config; its keys override flags")
        ->check(CLI::ExistingFile);
    if (with_corpus) app->add_option("--corpus", corpus, "JSONL corpus of email pairs");
    app->add_option("--out", out_dir, "Output directory")->capture_default_str();
    app->add_option("--m-grid", m_grid, "Topic counts to train")->delimiter(',');
    app->add_option("--t2-m", t2_m, "Topic count for next-sentence models and serving");
    app->add_option("--seed", seed, "Pipeline seed");
    app->add_option("--sweeps", sweeps, "Gibbs sweeps for LDA training");
    app->add_flag("--quiet", quiet, "Suppress progress lines");
  }

  PipelineConfig build() const {
    PipelineConfig c;
    c.corpus = corpus;
    c.out_dir = out_dir;
    if (!m_grid.empty()) c.m_grid = m_grid;
    if (t2_m) c.t2_m = *t2_m;
    if (seed) c.seed = *seed;
    if (sweeps) c.lda.sweeps = *sweeps;
    if (!config_path.empty()) {
      json j;
      try {
        j = json::parse(read_file(config_path));
      } catch (const json::exception& e) {
        throw std::invalid_argument("config " + config_path + ": " + e.what());
      }
      c = PipelineConfig::from_json(j, c);
    }
    c.validate();
    return c;
  }
};

struct SynthFlags {
  std::string profile = "coupled";
  std::string out;
  std::string params_path;
  std::optional<uint64_t> seed;
  std::optional<uint32_t> num_pairs;
  std::optional<uint32_t> num_topics;
  std::optional<double> concentration;
};

struct ServeFlags {
  std::string models_dir = "out";
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string sweeps = "5,3";
  std::string cors_origin = "*";
  uint32_t num_topics = 0;
};

std::string oracle_path(const std::string& corpus) { return corpus + ".oracle.json"; }

int cmd_synth(const SynthFlags& f) {
  json j = json::object();
  if (!f.params_path.empty()) j = json::parse(read_file(f.params_path));
  j["profile"] = f.profile;
  if (f.seed) j["seed"] = *f.seed;
  if (f.num_pairs) j["num_pairs"] = *f.num_pairs;
  if (f.num_topics) j["num_topics"] = *f.num_topics;
  if (f.concentration) j["concentration"] = *f.concentration;
  const auto params = SynthParams::from_json(j);
  const auto corpus = synthesize(params);
  std::ostringstream out;
  write_pairs_jsonl(out, corpus.pairs);
  write_file(f.out, out.str());
  write_file(oracle_path(f.out), corpus.oracle.dump() + "\n");
  std::cout << "wrote " << corpus.pairs.size() << " pairs to " << f.out << "\n";
  return 0;
}

void print_results(const std::vector<StageResult>& results) {
  for (const auto& r : results) {
    std::cout << stage_name(r.stage) << (r.skipped ? ": up to date" : ": done") << " ("
              << r.config_hash << ")\n";
  }
}

int cmd_stage(const PipelineFlags& f, std::optional<Stage> stage) {
  const auto config = f.build();
  Pipeline p(config, f.quiet ? nullptr : &std::cerr);
  if (stage) {
    print_results({p.run(*stage)});
  } else {
    print_results(p.run_all());
  }
  if (stage == Stage::kEvaluate) {
    std::cout << read_file(p.layout().eval_dir() / "report.txt");
  }
  return 0;
}

int cmd_serve(const ServeFlags& f) {
  ServeOptions so;
  so.models_dir = f.models_dir;
  so.num_topics = f.num_topics;
  so.infer = parse_serve_sweeps(f.sweeps);
  ServerOptions opts;
  opts.host = f.host;
  opts.port = f.port;
  opts.cors_origin = f.cors_origin;

  // Block termination signals before any thread starts so sigwait sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  SuggestServer server(opts, [so] {
    auto engine = SuggestEngine::load(so);
    std::cerr << "[topicreply] serve: loaded M=" << engine->num_topics() << "\n";
    return engine;
  });
  const int port = server.start();
  std::cerr << "[topicreply] serve: listening on " << f.host << ":" << port << "\n";
  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topic-based reply suggestions for customer email"};
  app.require_subcommand(1);

  SynthFlags synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus and its oracle");
  synth_cmd->add_option("--profile", synth.profile, "coupled, chain or two_vocab")
      ->check(CLI::IsMember({"coupled", "chain", "two_vocab"}))
      ->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "Output JSONL path")->required();
  synth_cmd->add_option("--params", synth.params_path, "JSON file of generator parameters")
      ->check(CLI::ExistingFile);
  synth_cmd->add_option("--seed", synth.seed, "Generator seed");
  synth_cmd->add_option("--num-pairs", synth.num_pairs, "Number of email pairs");
  synth_cmd->add_option("--num-topics", synth.num_topics, "Generator topic count");
  synth_cmd->add_option("--concentration", synth.concentration, "Chain mass on k -> k+1");

  struct StageCommand {
    const char* name;
    const char* help;
    std::optional<Stage> stage;
  };
  const std::vector<StageCommand> stage_commands = {
      {"ingest", "Filter, split and build the vocabulary", Stage::kIngest},
      {"train-lda", "Train the C, A, CA and S topic models", Stage::kTrainLda},
      {"annotate", "Write silver topic labels", Stage::kAnnotate},
      {"train-predictors", "Train the reply and next-sentence predictors",
       Stage::kTrainPredictors},
      {"evaluate", "Evaluate predictors and baselines", Stage::kEvaluate},
      {"perplexity", "Conditional and unconditional perplexity", Stage::kPerplexity},
      {"describe-topics", "Top words and phrases per topic", Stage::kDescribeTopics},
      {"run", "Run every stage in order", std::nullopt},
  };
  std::vector<PipelineFlags> stage_flags(stage_commands.size());
  std::vector<CLI::App*> stage_apps;
  for (size_t i = 0; i < stage_commands.size(); ++i) {
    auto* sub = app.add_subcommand(stage_commands[i].name, stage_commands[i].help);
    const bool needs_corpus = !stage_commands[i].stage || *stage_commands[i].stage == Stage::kIngest;
    stage_flags[i].attach(sub, needs_corpus);
    stage_apps.push_back(sub);
  }

  ServeFlags serve;
  auto* serve_cmd = app.add_subcommand("serve", "Serve suggestions over HTTP");
  serve_cmd->add_option("--models-dir", serve.models_dir, "Pipeline output directory")
      ->capture_default_str();
  serve_cmd->add_option("--host", serve.host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--port", serve.port, "Port; 0 picks a free one")->capture_default_str();
  serve_cmd->add_option("--serve-sweeps", serve.sweeps, "Fold-in burn-in and sample sweeps")
      ->capture_default_str();
  serve_cmd->add_option("--cors-origin", serve.cors_origin, "Allowed origin; empty disables")
      ->capture_default_str();
  serve_cmd->add_option("--num-topics", serve.num_topics, "Model size; 0 uses the trained t2_m");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth);
    if (serve_cmd->parsed()) return cmd_serve(serve);
    for (size_t i = 0; i < stage_apps.size(); ++i) {
      if (stage_apps[i]->parsed()) return cmd_stage(stage_flags[i], stage_commands[i].stage);
    }
  } catch (const MissingArtifactError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMissing;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const json::exception& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
