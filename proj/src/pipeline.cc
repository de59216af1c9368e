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

#include "topicreply/pipeline.h"

#include <algorithm>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "topicreply/common.h"
#include "topicreply/perplexity.h"
#include "topicreply/silver.h"

namespace topicreply {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::kIngest: return "ingest";
    case Stage::kTrainLda: return "train-lda";
    case Stage::kAnnotate: return "annotate";
    case Stage::kTrainPredictors: return "train-predictors";
    case Stage::kEvaluate: return "evaluate";
    case Stage::kPerplexity: return "perplexity";
    case Stage::kDescribeTopics: return "describe-topics";
  }
  return "?";
}

std::vector<uint32_t> PipelineConfig::topic_counts() const {
  std::set<uint32_t> s(m_grid.begin(), m_grid.end());
  s.insert(t2_m);
  return {s.begin(), s.end()};
}

void PipelineConfig::validate() const {
  if (m_grid.empty()) throw std::invalid_argument("config: empty M grid");
  for (uint32_t m : topic_counts()) {
    if (m < 2) throw std::invalid_argument("config: every M must be >= 2");
  }
  if (!(train_ratio > 0 && train_ratio < 1)) {
    throw std::invalid_argument("config: train_ratio must be in (0, 1)");
  }
  if (views.empty()) throw std::invalid_argument("config: no topic views");
  if (out_dir.empty()) throw std::invalid_argument("config: empty output directory");
}

json PipelineConfig::to_json() const {
  json v = json::array();
  for (View view : views) v.push_back(view_tag(view));
  return {{"corpus", corpus.string()},
          {"out_dir", out_dir.string()},
          {"m_grid", m_grid},
          {"t2_m", t2_m},
          {"seed", seed},
          {"train_ratio", train_ratio},
          {"filter", {{"min_customer", filter.min_customer}, {"min_agent", filter.min_agent}}},
          {"vocabulary",
           {{"min_doc_freq", vocabulary.min_doc_freq}, {"max_size", vocabulary.max_size}}},
          {"lda", lda.to_json()},
          {"views", v},
          {"infer", infer.to_json()},
          {"perplexity_infer", perplexity_infer.to_json()},
          {"predictor", predictor.to_json()},
          {"ablation", ablation},
          {"t1_eval", {{"recall_k", t1_eval.recall_k}, {"seed", t1_eval.seed}}},
          {"t2_eval", {{"dta_k", t2_eval.dta_k}}},
          {"describe",
           {{"top_words", describe.top_words},
            {"top_phrases", describe.top_phrases},
            {"min_phrase_count", describe.min_phrase_count}}}};
}

PipelineConfig PipelineConfig::from_json(const json& j) { return from_json(j, PipelineConfig{}); }

PipelineConfig PipelineConfig::from_json(const json& j, const PipelineConfig& base) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  json m = base.to_json();
  m.merge_patch(j);
  PipelineConfig c;
  c.corpus = m.at("corpus").get<std::string>();
  c.out_dir = m.at("out_dir").get<std::string>();
  c.m_grid = m.at("m_grid").get<std::vector<uint32_t>>();
  c.t2_m = m.at("t2_m").get<uint32_t>();
  c.seed = m.at("seed").get<uint64_t>();
  c.train_ratio = m.at("train_ratio").get<double>();
  c.filter.min_customer = m.at("filter").at("min_customer").get<size_t>();
  c.filter.min_agent = m.at("filter").at("min_agent").get<size_t>();
  c.vocabulary.min_doc_freq = m.at("vocabulary").at("min_doc_freq").get<uint32_t>();
  c.vocabulary.max_size = m.at("vocabulary").at("max_size").get<size_t>();
  c.lda = LdaOptions::from_json(m.at("lda"));
  c.views.clear();
  for (const auto& v : m.at("views")) c.views.push_back(parse_view(v.get<std::string>()));
  c.infer = InferOptions::from_json(m.at("infer"));
  c.perplexity_infer = InferOptions::from_json(m.at("perplexity_infer"));
  c.predictor = PredictorConfig::from_json(m.at("predictor"));
  c.ablation = m.at("ablation").get<bool>();
  c.t1_eval.recall_k = m.at("t1_eval").at("recall_k").get<std::vector<uint32_t>>();
  c.t1_eval.seed = m.at("t1_eval").at("seed").get<uint64_t>();
  c.t2_eval.dta_k = m.at("t2_eval").at("dta_k").get<std::vector<uint32_t>>();
  c.describe.top_words = m.at("describe").at("top_words").get<size_t>();
  c.describe.top_phrases = m.at("describe").at("top_phrases").get<size_t>();
  c.describe.min_phrase_count = m.at("describe").at("min_phrase_count").get<uint32_t>();
  return c;
}

namespace {

std::string m_dir(uint32_t m) { return "m" + std::to_string(m); }

std::string lower_tag(View view) {
  std::string s(view_tag(view));
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error("malformed JSON in " + path.string() + ": " + e.what());
  }
}

std::string subset_name(const FeatureConfig& f) {
  for (const auto& s : t2_ablation_subsets()) {
    if (s.features == f) return s.name;
  }
  return "custom";
}

}  // namespace

fs::path ArtifactLayout::topic_model(uint32_t m, View view) const {
  return root_ / "lda" / m_dir(m) / (lower_tag(view) + ".tpam");
}

fs::path ArtifactLayout::silver(uint32_t m, std::string_view part) const {
  return root_ / "silver" / m_dir(m) / (std::string(part) + ".jsonl");
}

fs::path ArtifactLayout::silver_meta(uint32_t m) const {
  return root_ / "silver" / m_dir(m) / "meta.json";
}

fs::path ArtifactLayout::suite(uint32_t m) const {
  return root_ / "predictors" / m_dir(m) / "suite.tpam";
}

fs::path ArtifactLayout::ablation_suite(uint32_t m, std::string_view subset) const {
  std::string name(subset);
  std::replace(name.begin(), name.end(), '+', '_');
  return root_ / "predictors" / m_dir(m) / ("suite_" + name + ".tpam");
}

fs::path ArtifactLayout::topics(uint32_t m, View view) const {
  return root_ / "topics" / m_dir(m) / (lower_tag(view) + ".json");
}

fs::path ArtifactLayout::manifest(Stage stage) const {
  return root_ / "manifests" / (std::string(stage_name(stage)) + ".json");
}

LoadedCorpus load_corpus(const ArtifactLayout& layout) {
  LoadedCorpus c;
  std::istringstream in(read_file(layout.pairs()));
  const auto pairs = read_pairs_jsonl(in);
  c.split = CorpusSplit::from_json(read_json(layout.split()));
  c.vocabulary = Vocabulary::from_json(read_json(layout.vocabulary()));
  c.train = select_pairs(pairs, c.split.train);
  c.test = select_pairs(pairs, c.split.test);
  c.train_tokens = tokenize_pairs(c.train, c.vocabulary);
  c.test_tokens = tokenize_pairs(c.test, c.vocabulary);
  return c;
}

std::vector<SilverAnnotation> load_silver(const fs::path& path) {
  std::istringstream in(read_file(path));
  return read_silver_jsonl(in);
}

Pipeline::Pipeline(PipelineConfig config, std::ostream* log)
    : config_(std::move(config)), layout_(config_.out_dir), log_(log) {
  config_.validate();
}

void Pipeline::note(const std::string& line) const {
  if (log_ != nullptr) *log_ << "[" << "topicreply" << "] " << line << std::endl;
}

json Pipeline::stage_config(Stage stage) const {
  const json c = config_.to_json();
  switch (stage) {
    case Stage::kIngest:
      return {{"corpus_hash", hash_file_hex(config_.corpus)},
              {"train_ratio", c["train_ratio"]},
              {"filter", c["filter"]},
              {"vocabulary", c["vocabulary"]},
              {"seed", config_.seed}};
    case Stage::kTrainLda:
      return {{"lda", c["lda"]},
              {"views", c["views"]},
              {"M", config_.topic_counts()},
              {"seed", config_.seed}};
    case Stage::kAnnotate:
      return {{"infer", c["infer"]}};
    case Stage::kTrainPredictors:
      return {{"predictor", c["predictor"]},
              {"ablation", config_.ablation},
              {"t2_m", config_.t2_m},
              {"seed", config_.seed}};
    case Stage::kEvaluate:
      return {{"t1_eval", c["t1_eval"]}, {"t2_eval", c["t2_eval"]}};
    case Stage::kPerplexity:
      return {{"perplexity_infer", c["perplexity_infer"]}};
    case Stage::kDescribeTopics:
      return {{"describe", c["describe"]}};
  }
  return {};
}

std::vector<Stage> Pipeline::upstream(Stage stage) const {
  switch (stage) {
    case Stage::kIngest: return {};
    case Stage::kTrainLda: return {Stage::kIngest};
    case Stage::kAnnotate: return {Stage::kIngest, Stage::kTrainLda};
    case Stage::kTrainPredictors: return {Stage::kIngest, Stage::kAnnotate};
    case Stage::kEvaluate:
      return {Stage::kIngest, Stage::kTrainLda, Stage::kAnnotate, Stage::kTrainPredictors};
    case Stage::kPerplexity: return {Stage::kIngest, Stage::kTrainLda};
    case Stage::kDescribeTopics: return {Stage::kIngest, Stage::kTrainLda};
  }
  return {};
}

std::string Pipeline::expected_hash(Stage stage) const {
  if (stage == Stage::kIngest && config_.corpus.empty()) {
    // Downstream runs need not name the corpus; trust the ingest record.
    const auto path = layout_.manifest(Stage::kIngest);
    if (!fs::exists(path)) {
      throw MissingArtifactError(layout_.pairs(), "missing prerequisite (run `topicreply ingest`)");
    }
    return read_json(path).at("config_hash").get<std::string>();
  }
  Fnv1a h;
  h.update(stage_name(stage));
  h.update(stage_config(stage).dump());
  for (Stage u : upstream(stage)) h.update(expected_hash(u));
  return h.hex();
}

namespace {

fs::path representative_artifact(const ArtifactLayout& layout, const PipelineConfig& config,
                                 Stage stage) {
  const uint32_t m = config.topic_counts().front();
  switch (stage) {
    case Stage::kIngest: return layout.pairs();
    case Stage::kTrainLda: return layout.topic_model(m, config.views.front());
    case Stage::kAnnotate: return layout.silver(m, "train");
    case Stage::kTrainPredictors: return layout.suite(m);
    case Stage::kEvaluate: return layout.eval_dir() / "t1.csv";
    case Stage::kPerplexity: return layout.perplexity_dir() / "perplexity.csv";
    case Stage::kDescribeTopics: return layout.topics(m, config.views.front());
  }
  return layout.root();
}

}  // namespace

void Pipeline::require_upstream(Stage stage) const {
  for (Stage u : upstream(stage)) {
    const auto path = layout_.manifest(u);
    const std::string hint = "(run `topicreply " + std::string(stage_name(u)) + "` first)";
    if (!fs::exists(path)) {
      throw MissingArtifactError(representative_artifact(layout_, config_, u),
                                 "missing prerequisite " + hint);
    }
    const json m = read_json(path);
    if (m.at("config_hash").get<std::string>() != expected_hash(u)) {
      throw MissingArtifactError(path, "stale artifact, produced under a different config " + hint);
    }
    for (const auto& [rel, hash] : m.at("outputs").items()) {
      if (!fs::exists(layout_.root() / rel)) {
        throw MissingArtifactError(layout_.root() / rel, "missing prerequisite " + hint);
      }
    }
  }
}

std::vector<fs::path> Pipeline::stage_inputs(Stage stage) const {
  std::vector<fs::path> in;
  if (stage == Stage::kIngest) {
    in.push_back(config_.corpus);
    return in;
  }
  for (Stage u : upstream(stage)) {
    const json m = read_json(layout_.manifest(u));
    for (const auto& [rel, hash] : m.at("outputs").items()) in.push_back(layout_.root() / rel);
  }
  return in;
}

namespace {

std::string manifest_key(const fs::path& root, const fs::path& p) {
  const auto rel = p.lexically_relative(root);
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return fs::absolute(p).lexically_normal().generic_string();
}

json hash_files(const fs::path& root, const std::vector<fs::path>& files) {
  json j = json::object();
  for (const auto& f : files) j[manifest_key(root, f)] = hash_file_hex(f);
  return j;
}

fs::path resolve(const fs::path& root, const std::string& key) {
  const fs::path p(key);
  return p.is_absolute() ? p : root / p;
}

}  // namespace

bool Pipeline::up_to_date(Stage stage) const {
  const auto path = layout_.manifest(stage);
  if (!fs::exists(path)) return false;
  const json m = read_json(path);
  if (m.value("config_hash", "") != expected_hash(stage)) return false;
  for (const char* section : {"inputs", "outputs"}) {
    for (const auto& [key, hash] : m.at(section).items()) {
      const auto file = resolve(layout_.root(), key);
      if (!fs::exists(file) || hash_file_hex(file) != hash.get<std::string>()) return false;
    }
  }
  // A different set of inputs (new grid point upstream) also invalidates.
  json now = hash_files(layout_.root(), stage_inputs(stage));
  return now == m.at("inputs");
}

void Pipeline::write_manifest(Stage stage, const std::vector<fs::path>& outputs) const {
  json upstream_hashes = json::object();
  for (Stage u : upstream(stage)) upstream_hashes[std::string(stage_name(u))] = expected_hash(u);
  const json m = {{"stage", stage_name(stage)},
                  {"config_hash", expected_hash(stage)},
                  {"config", stage_config(stage)},
                  {"upstream", upstream_hashes},
                  {"inputs", hash_files(layout_.root(), stage_inputs(stage))},
                  {"outputs", hash_files(layout_.root(), outputs)}};
  write_json(layout_.manifest(stage), m);
}

StageResult Pipeline::run(Stage stage) {
  if (stage == Stage::kIngest && config_.corpus.empty()) {
    throw std::invalid_argument("ingest needs a corpus path");
  }
  require_upstream(stage);
  StageResult r;
  r.stage = stage;
  r.config_hash = expected_hash(stage);
  if (up_to_date(stage)) {
    note(std::string(stage_name(stage)) + ": up to date");
    r.skipped = true;
    return r;
  }
  note(std::string(stage_name(stage)) + ": running");
  switch (stage) {
    case Stage::kIngest: r = ingest(); break;
    case Stage::kTrainLda: r = train_lda(); break;
    case Stage::kAnnotate: r = annotate(); break;
    case Stage::kTrainPredictors: r = train_predictors(); break;
    case Stage::kEvaluate: r = evaluate(); break;
    case Stage::kPerplexity: r = perplexity(); break;
    case Stage::kDescribeTopics: r = describe_topics(); break;
  }
  r.stage = stage;
  r.config_hash = expected_hash(stage);
  write_manifest(stage, r.outputs);
  return r;
}

std::vector<StageResult> Pipeline::run_all() {
  std::vector<StageResult> out;
  for (Stage s : {Stage::kIngest, Stage::kTrainLda, Stage::kAnnotate, Stage::kTrainPredictors,
                  Stage::kEvaluate, Stage::kPerplexity, Stage::kDescribeTopics}) {
    if (s == Stage::kIngest && config_.corpus.empty() && fs::exists(layout_.manifest(s))) continue;
    out.push_back(run(s));
  }
  return out;
}

StageResult Pipeline::ingest() {
  const auto raw = topicreply::ingest(config_.corpus, CorpusFormat::kJsonl);
  const auto pairs = filter_pairs(raw, config_.filter);
  note("ingest: " + std::to_string(raw.size()) + " pairs read, " + std::to_string(pairs.size()) +
       " kept");
  const auto split = split_corpus(pairs, config_.train_ratio, config_.seed);
  const auto train = select_pairs(pairs, split.train);
  const auto test = select_pairs(pairs, split.test);

  std::vector<std::vector<std::string>> docs;
  docs.reserve(train.size() * 2);
  for (const auto& p : train) {
    docs.push_back(tokenize_words(p.customer_text));
    docs.push_back(tokenize_words(p.agent_text));
  }
  const auto vocab = Vocabulary::build(docs, config_.vocabulary);
  if (vocab.size() == 0) throw Error("ingest: empty vocabulary after frequency cut");

  std::ostringstream pairs_out;
  write_pairs_jsonl(pairs_out, pairs);
  write_file(layout_.pairs(), pairs_out.str());
  write_json(layout_.split(), split.to_json());
  write_json(layout_.vocabulary(), vocab.to_json());
  const auto train_stats = corpus_stats(train);
  const auto test_stats = corpus_stats(test);
  write_json(layout_.stats_json(), stats_to_json(train_stats, test_stats));
  const auto table = render_stats_table(train_stats, test_stats);
  write_file(layout_.stats_txt(), table);
  note("ingest: vocabulary " + std::to_string(vocab.size()) + " words\n" + table);

  StageResult r;
  r.outputs = {layout_.pairs(), layout_.split(), layout_.vocabulary(), layout_.stats_json(),
               layout_.stats_txt()};
  return r;
}

StageResult Pipeline::train_lda() {
  const auto corpus = load_corpus(layout_);
  const auto hash = expected_hash(Stage::kTrainLda);
  std::vector<std::vector<Document>> docs(config_.views.size());
  for (size_t v = 0; v < config_.views.size(); ++v) {
    docs[v] = build_documents(corpus.train_tokens, config_.views[v]);
  }
  struct Job {
    uint32_t m;
    size_t view;
  };
  std::vector<Job> jobs;
  for (uint32_t m : config_.topic_counts()) {
    for (size_t v = 0; v < config_.views.size(); ++v) jobs.push_back({m, v});
  }
  std::vector<fs::path> outputs(jobs.size());
  parallel_for(jobs.size(), [&](size_t i) {
    const auto& job = jobs[i];
    const View view = config_.views[job.view];
    LdaOptions o = config_.lda;
    o.num_topics = job.m;
    o.seed = mix_seed(config_.seed, fnv1a("lda/" + std::string(view_tag(view)) + "/" +
                                          std::to_string(job.m)));
    TopicModel model = topicreply::train_lda(docs[job.view], corpus.vocabulary.words(), view, o);
    model.set_config_hash(hash);
    outputs[i] = layout_.topic_model(job.m, view);
    write_file(outputs[i], save_topic_model(model));
    note("train-lda: M=" + std::to_string(job.m) + " view " + std::string(view_tag(view)) +
         " done");
  });
  StageResult r;
  r.outputs = std::move(outputs);
  return r;
}

namespace {

TopicModel load_model_file(const fs::path& path) { return load_topic_model(read_file(path)); }

void require_view(const std::vector<View>& views, View v, const char* stage) {
  if (std::find(views.begin(), views.end(), v) == views.end()) {
    throw std::invalid_argument(std::string(stage) + " needs the " + std::string(view_tag(v)) +
                                " view in the config");
  }
}

}  // namespace

StageResult Pipeline::annotate() {
  require_view(config_.views, View::kConcat, "annotate");
  require_view(config_.views, View::kSentence, "annotate");
  const auto corpus = load_corpus(layout_);
  const auto hash = expected_hash(Stage::kAnnotate);
  StageResult r;
  for (uint32_t m : config_.topic_counts()) {
    const auto ca = load_model_file(layout_.topic_model(m, View::kConcat));
    const auto s = load_model_file(layout_.topic_model(m, View::kSentence));
    json meta = {{"config_hash", hash}, {"M", m}};
    for (const char* part : {"train", "test"}) {
      const auto& tokens = std::string(part) == "train" ? corpus.train_tokens : corpus.test_tokens;
      const auto silver = topicreply::annotate(tokens, ca, s, config_.infer);
      std::ostringstream out;
      write_silver_jsonl(out, silver);
      write_file(layout_.silver(m, part), out.str());
      r.outputs.push_back(layout_.silver(m, part));
      size_t sentences = 0, peaked = 0;
      for (const auto& a : silver) {
        for (const auto& l : a.sentences) {
          ++sentences;
          peaked += l.peaked;
        }
      }
      meta[part] = {{"pairs", silver.size()},
                    {"sentences", sentences},
                    {"peaked_rate",
                     sentences == 0 ? 0.0 : static_cast<double>(peaked) / sentences}};
    }
    write_json(layout_.silver_meta(m), meta);
    r.outputs.push_back(layout_.silver_meta(m));
    note("annotate: M=" + std::to_string(m) + " done, peaked rate (train) " +
         std::to_string(meta["train"]["peaked_rate"].get<double>()));
  }
  return r;
}

namespace {

void check_silver_hash(const ArtifactLayout& layout, uint32_t m, const std::string& expected) {
  const auto meta = read_json(layout.silver_meta(m));
  if (meta.value("config_hash", "") != expected) {
    throw MissingArtifactError(layout.silver_meta(m), "stale silver labels (config hash mismatch)");
  }
}

PredictorConfig seeded(PredictorConfig c, uint64_t seed, uint32_t m) {
  c.t1_sgd.seed = mix_seed(mix_seed(seed, c.t1_sgd.seed), 0x7100 + m);
  c.t2_sgd.seed = mix_seed(mix_seed(seed, c.t2_sgd.seed), 0x7200 + m);
  return c;
}

}  // namespace

StageResult Pipeline::train_predictors() {
  const auto corpus = load_corpus(layout_);
  const auto hash = expected_hash(Stage::kTrainPredictors);
  const auto silver_hash = expected_hash(Stage::kAnnotate);
  StageResult r;
  for (uint32_t m : config_.topic_counts()) {
    check_silver_hash(layout_, m, silver_hash);
    const auto silver = load_silver(layout_.silver(m, "train"));
    const auto cfg = seeded(config_.predictor, config_.seed, m);
    PredictorSuite suite = train_suite(corpus.train_tokens, silver, cfg, corpus.vocabulary.size());
    suite.config_hash = hash;
    write_file(layout_.suite(m), save_suite(suite));
    r.outputs.push_back(layout_.suite(m));
    note("train-predictors: M=" + std::to_string(m) + " suite with " +
         std::to_string(suite.t2.family.size()) + " family members");
    if (!config_.ablation || m != config_.t2_m) continue;
    const auto transitions = transition_pairs(silver);
    for (const auto& subset : t2_ablation_subsets()) {
      PredictorConfig sub = cfg;
      sub.t2_features = subset.features;
      PredictorSuite s;
      s.num_topics = m;
      s.config = sub;
      s.t2 = train_t2(corpus.train_tokens, silver, transitions, sub, corpus.vocabulary.size());
      s.config_hash = hash;
      write_file(layout_.ablation_suite(m, subset.name), save_suite(s));
      r.outputs.push_back(layout_.ablation_suite(m, subset.name));
    }
    note("train-predictors: M=" + std::to_string(m) + " ablation suites done");
  }
  return r;
}

StageResult Pipeline::evaluate() {
  const auto corpus = load_corpus(layout_);
  const auto silver_hash = expected_hash(Stage::kAnnotate);
  const auto suite_hash = expected_hash(Stage::kTrainPredictors);
  auto load_checked_suite = [&](const fs::path& path) {
    auto s = load_suite(read_file(path));
    if (s.config_hash != suite_hash) {
      throw MissingArtifactError(path, "stale predictor suite (config hash mismatch)");
    }
    return s;
  };
  StageResult r;
  std::vector<EvalReport> t1_reports;
  std::string table;
  for (uint32_t m : config_.topic_counts()) {
    check_silver_hash(layout_, m, silver_hash);
    const auto train = load_silver(layout_.silver(m, "train"));
    const auto test = load_silver(layout_.silver(m, "test"));
    const auto suite = load_checked_suite(layout_.suite(m));
    auto report = evaluate_t1(suite.t1, corpus.test_tokens, test, train, config_.t1_eval);
    const auto path = layout_.eval_dir() / ("t1_m" + std::to_string(m) + ".json");
    write_json(path, report.to_json());
    r.outputs.push_back(path);
    table += report.to_table() + "\n";
    t1_reports.push_back(std::move(report));
  }
  write_file(layout_.eval_dir() / "t1.csv", reports_csv(t1_reports));
  r.outputs.push_back(layout_.eval_dir() / "t1.csv");

  const uint32_t m = config_.t2_m;
  const auto test = load_silver(layout_.silver(m, "test"));
  const auto sentence_model = load_model_file(layout_.topic_model(m, View::kSentence));
  std::vector<PredictorSuite> suites;
  std::vector<std::string> names;
  if (config_.ablation) {
    for (const auto& subset : t2_ablation_subsets()) {
      suites.push_back(load_checked_suite(layout_.ablation_suite(m, subset.name)));
      names.push_back(subset.name);
    }
  } else {
    suites.push_back(load_checked_suite(layout_.suite(m)));
    names.push_back(subset_name(suites.back().config.t2_features));
  }
  std::vector<NamedT2Models> proposed;
  for (size_t i = 0; i < suites.size(); ++i) proposed.push_back({names[i], &suites[i].t2});
  const auto t2 = evaluate_t2(proposed, baseline_average(sentence_model), corpus.test_tokens, test,
                              config_.t2_eval);
  write_json(layout_.eval_dir() / "t2.json", t2.to_json());
  const std::vector<EvalReport> t2_list = {t2};
  write_file(layout_.eval_dir() / "t2.csv", reports_csv(t2_list));
  table += t2.to_table();
  write_file(layout_.eval_dir() / "report.txt", table);
  r.outputs.push_back(layout_.eval_dir() / "t2.json");
  r.outputs.push_back(layout_.eval_dir() / "t2.csv");
  r.outputs.push_back(layout_.eval_dir() / "report.txt");
  note("evaluate:\n" + table);
  return r;
}

StageResult Pipeline::perplexity() {
  require_view(config_.views, View::kAgent, "perplexity");
  require_view(config_.views, View::kConcat, "perplexity");
  const auto corpus = load_corpus(layout_);
  StageResult r;
  std::vector<PerplexityReport> reports;
  for (uint32_t m : config_.topic_counts()) {
    const auto a = load_model_file(layout_.topic_model(m, View::kAgent));
    const auto ca = load_model_file(layout_.topic_model(m, View::kConcat));
    auto rep = perplexity_report(a, ca, corpus.test_tokens, config_.perplexity_infer);
    const auto path = layout_.perplexity_dir() / ("m" + std::to_string(m) + ".json");
    write_json(path, rep.to_json());
    r.outputs.push_back(path);
    note("perplexity: M=" + std::to_string(m) + " unconditional " +
         std::to_string(rep.pp_unconditional) + " conditional " +
         std::to_string(rep.pp_conditional));
    reports.push_back(std::move(rep));
  }
  write_file(layout_.perplexity_dir() / "perplexity.csv", perplexity_csv(reports));
  r.outputs.push_back(layout_.perplexity_dir() / "perplexity.csv");
  return r;
}

StageResult Pipeline::describe_topics() {
  const auto corpus = load_corpus(layout_);
  StageResult r;
  for (View view : config_.views) {
    const auto docs = build_documents(corpus.train_tokens, view);
    for (uint32_t m : config_.topic_counts()) {
      const auto model = load_model_file(layout_.topic_model(m, view));
      const auto desc = topicreply::describe_topics(model, docs, config_.describe);
      write_json(layout_.topics(m, view), descriptors_to_json(desc));
      r.outputs.push_back(layout_.topics(m, view));
    }
  }
  return r;
}

}  // namespace topicreply
