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
// Email-pair corpus: ingestion, filtering, tokenization, sentence
// segmentation, vocabulary and train/test splitting.

#ifndef TOPICREPLY_CORPUS_H_
#define TOPICREPLY_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace topicreply {

// One customer query and the agent reply to it.
struct EmailPair {
  std::string id;
  std::string customer_text;
  std::string agent_text;

  bool operator==(const EmailPair&) const = default;
};

enum class CorpusFormat { kJsonl };

// Reads {"id","customer","agent"} records, one per line. Blank lines are
// skipped. Throws Error naming the line for malformed records and naming the
// id for duplicates.
std::vector<EmailPair> ingest(const std::filesystem::path& path,
                              CorpusFormat format = CorpusFormat::kJsonl);
std::vector<EmailPair> read_pairs_jsonl(std::istream& in);
void write_pairs_jsonl(std::ostream& out, std::span<const EmailPair> pairs);

bool is_stopword(std::string_view word);

// Lowercases, splits on non-alphanumeric bytes, drops stopwords and tokens
// shorter than two characters.
std::vector<std::string> tokenize_words(std::string_view text);

// Rule-based splitter: a break follows '.', '?' or '!' when the next
// non-space character is an uppercase letter or digit, unless the word
// ending in '.' is a known abbreviation. Sentences are whitespace-trimmed;
// empty ones are dropped.
std::vector<std::string> segment_sentences(std::string_view text);

class Vocabulary {
 public:
  static constexpr uint32_t kUnknown = 0xffffffffu;

  struct BuildOptions {
    uint32_t min_doc_freq = 5;
    size_t max_size = 20000;
  };

  Vocabulary() = default;

  // Ids are assigned by descending corpus frequency (ties by word), so the
  // first n ids are always the n most frequent words.
  static Vocabulary build(std::span<const std::vector<std::string>> docs,
                          const BuildOptions& options);
  static Vocabulary from_entries(std::vector<std::string> words,
                                 std::vector<uint32_t> doc_freq,
                                 std::vector<uint32_t> corpus_freq);

  uint32_t id(std::string_view word) const;
  const std::string& word(uint32_t id) const { return words_.at(id); }
  uint32_t doc_freq(uint32_t id) const { return doc_freq_.at(id); }
  uint32_t corpus_freq(uint32_t id) const { return corpus_freq_.at(id); }
  size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  // Lookup-mode tokenization: out-of-vocabulary tokens are dropped.
  std::vector<uint32_t> encode(std::string_view text) const;

  std::string fingerprint() const;
  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> words_;
  std::vector<uint32_t> doc_freq_;
  std::vector<uint32_t> corpus_freq_;
  std::unordered_map<std::string, uint32_t> index_;
};

// Half-open token range of one sentence.
struct SentenceSpan {
  uint32_t begin = 0;
  uint32_t end = 0;
  uint32_t size() const { return end - begin; }
  bool operator==(const SentenceSpan&) const = default;
};

struct TokenizedDoc {
  std::vector<uint32_t> tokens;
  std::vector<SentenceSpan> sentences;

  std::span<const uint32_t> sentence(size_t j) const {
    const auto& s = sentences.at(j);
    return std::span<const uint32_t>(tokens).subspan(s.begin, s.size());
  }
};

TokenizedDoc tokenize_document(std::string_view text, const Vocabulary& vocab);

struct TokenizedPair {
  std::string id;
  TokenizedDoc customer;
  TokenizedDoc agent;
};

TokenizedPair tokenize_pair(const EmailPair& pair, const Vocabulary& vocab);
std::vector<TokenizedPair> tokenize_pairs(std::span<const EmailPair> pairs,
                                          const Vocabulary& vocab);

struct FilterOptions {
  size_t min_customer = 10;
  size_t min_agent = 20;
};

// Keeps pairs whose customer and agent token counts reach the thresholds.
std::vector<EmailPair> filter_pairs(std::span<const EmailPair> pairs,
                                    const FilterOptions& options = {});

struct CorpusSplit {
  std::vector<std::string> train;
  std::vector<std::string> test;
  uint64_t seed = 0;

  bool operator==(const CorpusSplit&) const = default;
  nlohmann::json to_json() const;
  static CorpusSplit from_json(const nlohmann::json& j);
};

CorpusSplit split_corpus(std::span<const EmailPair> pairs, double ratio,
                         uint64_t seed);

// Returns the pairs named by ids, in the order of ids.
std::vector<EmailPair> select_pairs(std::span<const EmailPair> pairs,
                                    std::span<const std::string> ids);

struct RoleStats {
  size_t doc_count = 0;
  double avg_tokens = 0;
  double avg_sentences = 0;
};

struct CorpusStats {
  RoleStats customer;
  RoleStats agent;
};

CorpusStats corpus_stats(std::span<const EmailPair> pairs);
nlohmann::json stats_to_json(const CorpusStats& train, const CorpusStats& test);
std::string render_stats_table(const CorpusStats& train, const CorpusStats& test);

}  // namespace topicreply

#endif  // TOPICREPLY_CORPUS_H_
