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

#include "topicreply/corpus.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "topicreply/common.h"

namespace topicreply {
namespace {

using nlohmann::json;

const std::unordered_set<std::string_view>& stopwords() {
  static const std::unordered_set<std::string_view> kWords = {
      "a",          "about",   "above",   "after",   "again",   "against",
      "all",        "am",      "an",      "and",     "any",     "are",
      "as",         "at",      "be",      "because", "been",    "before",
      "being",      "below",   "between", "both",    "but",     "by",
      "can",        "could",   "did",     "do",      "does",    "doing",
      "don",        "down",    "during",  "each",    "few",     "for",
      "from",       "further", "had",     "has",     "have",    "having",
      "he",         "her",     "here",    "hers",    "herself", "him",
      "himself",    "his",     "how",     "if",      "in",      "into",
      "is",         "it",      "its",     "itself",  "just",    "ll",
      "me",         "more",    "most",    "my",      "myself",  "no",
      "nor",        "not",     "now",     "of",      "off",     "on",
      "once",       "only",    "or",      "other",   "our",     "ours",
      "ourselves",  "out",     "over",    "own",     "re",      "same",
      "she",        "should",  "so",      "some",    "such",    "than",
      "that",       "the",     "their",   "theirs",  "them",    "themselves",
      "then",       "there",   "these",   "they",    "this",    "those",
      "through",    "to",      "too",     "under",   "until",   "up",
      "ve",         "very",    "was",     "we",      "were",    "what",
      "when",       "where",   "which",   "while",   "who",     "whom",
      "why",        "will",    "with",    "would",   "you",     "your",
      "yours",      "yourself", "yourselves", "also",  "am",    "im",
  };
  return kWords;
}

const std::unordered_set<std::string_view>& abbreviations() {
  static const std::unordered_set<std::string_view> kAbbrev = {
      "mr",  "mrs", "ms",   "dr",    "prof", "sr",  "jr",  "st",  "vs",
      "etc", "e.g", "i.e",  "inc",   "ltd",  "co",  "no",  "approx",
      "dept", "fig", "ref", "tel",   "min",  "max", "jan", "feb", "mar",
      "apr", "jun", "jul",  "aug",   "sep",  "sept", "oct", "nov", "dec",
  };
  return kAbbrev;
}

bool is_terminator(char c) { return c == '.' || c == '?' || c == '!'; }

bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Word immediately before text[dot], e.g. "Mr" in "Contact Mr. Smith".
bool guarded_abbreviation(std::string_view text, size_t dot) {
  size_t b = dot;
  while (b > 0 && !std::isspace(static_cast<unsigned char>(text[b - 1]))) --b;
  std::string_view word = text.substr(b, dot - b);
  while (!word.empty() && (word.front() == '(' || word.front() == '"')) word.remove_prefix(1);
  if (word.empty()) return false;
  if (word.size() == 1 && std::isalpha(static_cast<unsigned char>(word[0]))) return true;  // initials
  return abbreviations().count(lower(word)) > 0;
}

}  // namespace

std::vector<EmailPair> read_pairs_jsonl(std::istream& in) {
  std::vector<EmailPair> pairs;
  std::unordered_set<std::string> seen;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(where + ": malformed JSON (" + e.what() + ")");
    }
    if (!record.is_object()) throw Error(where + ": record is not an object");
    for (const char* field : {"id", "customer", "agent"}) {
      if (!record.contains(field) || !record[field].is_string()) {
        throw Error(where + ": missing string field \"" + field + "\"");
      }
    }
    EmailPair pair{record["id"].get<std::string>(), record["customer"].get<std::string>(),
                   record["agent"].get<std::string>()};
    if (pair.id.empty()) throw Error(where + ": empty id");
    if (trim(pair.customer_text).empty() || trim(pair.agent_text).empty()) {
      throw Error(where + ": empty customer or agent text");
    }
    if (!seen.insert(pair.id).second) throw Error("duplicate id \"" + pair.id + "\" at " + where);
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<EmailPair> ingest(const std::filesystem::path& path, CorpusFormat format) {
  if (format != CorpusFormat::kJsonl) throw Error("unsupported corpus format");
  std::ifstream in(path);
  if (!in) throw MissingArtifactError(path, "corpus file not found");
  return read_pairs_jsonl(in);
}

void write_pairs_jsonl(std::ostream& out, std::span<const EmailPair> pairs) {
  for (const auto& p : pairs) {
    json record = {{"id", p.id}, {"customer", p.customer_text}, {"agent", p.agent_text}};
    out << record.dump() << '\n';
  }
}

bool is_stopword(std::string_view word) { return stopwords().count(word) > 0; }

std::vector<std::string> tokenize_words(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (current.size() >= 2 && !is_stopword(current)) out.push_back(current);
    current.clear();
  };
  for (char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      current.push_back(static_cast<char>(std::tolower(uc)));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::vector<std::string> segment_sentences(std::string_view text) {
  std::vector<std::string> sentences;
  auto emit = [&](size_t b, size_t e) {
    std::string s = trim(text.substr(b, e - b));
    if (!s.empty()) sentences.push_back(std::move(s));
  };
  size_t start = 0;
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    if (!is_terminator(text[i])) {
      ++i;
      continue;
    }
    size_t k = i;
    while (k < n && is_terminator(text[k])) ++k;
    const bool single_dot = (k - i == 1 && text[i] == '.');
    while (k < n && is_closer(text[k])) ++k;
    if (k >= n || !std::isspace(static_cast<unsigned char>(text[k]))) {
      i = k;
      continue;
    }
    size_t m = k;
    while (m < n && std::isspace(static_cast<unsigned char>(text[m]))) ++m;
    const bool next_starts =
        m < n && (std::isupper(static_cast<unsigned char>(text[m])) ||
                  std::isdigit(static_cast<unsigned char>(text[m])));
    if (next_starts && !(single_dot && guarded_abbreviation(text, i))) {
      emit(start, k);
      start = k;
    }
    i = k;
  }
  emit(start, n);
  return sentences;
}

Vocabulary Vocabulary::build(std::span<const std::vector<std::string>> docs,
                             const BuildOptions& options) {
  std::map<std::string, std::pair<uint32_t, uint32_t>> counts;  // word -> (df, cf)
  for (const auto& doc : docs) {
    std::unordered_set<std::string_view> in_doc;
    for (const auto& w : doc) {
      auto& c = counts[w];
      ++c.second;
      if (in_doc.insert(w).second) ++c.first;
    }
  }
  struct Entry {
    std::string word;
    uint32_t df;
    uint32_t cf;
  };
  std::vector<Entry> kept;
  for (auto& [w, c] : counts) {
    if (c.first >= options.min_doc_freq) kept.push_back({w, c.first, c.second});
  }
  std::sort(kept.begin(), kept.end(), [](const Entry& a, const Entry& b) {
    if (a.cf != b.cf) return a.cf > b.cf;
    return a.word < b.word;
  });
  if (kept.size() > options.max_size) kept.resize(options.max_size);
  std::vector<std::string> words;
  std::vector<uint32_t> df, cf;
  for (auto& e : kept) {
    words.push_back(std::move(e.word));
    df.push_back(e.df);
    cf.push_back(e.cf);
  }
  return from_entries(std::move(words), std::move(df), std::move(cf));
}

Vocabulary Vocabulary::from_entries(std::vector<std::string> words,
                                    std::vector<uint32_t> doc_freq,
                                    std::vector<uint32_t> corpus_freq) {
  if (doc_freq.size() != words.size() || corpus_freq.size() != words.size()) {
    throw std::invalid_argument("Vocabulary: frequency arrays do not match word count");
  }
  Vocabulary v;
  v.words_ = std::move(words);
  v.doc_freq_ = std::move(doc_freq);
  v.corpus_freq_ = std::move(corpus_freq);
  for (uint32_t i = 0; i < v.words_.size(); ++i) {
    if (v.doc_freq_[i] < 1 || v.corpus_freq_[i] < 1) {
      throw std::invalid_argument("Vocabulary: frequencies must be >= 1");
    }
    if (!v.index_.emplace(v.words_[i], i).second) {
      throw std::invalid_argument("Vocabulary: duplicate word " + v.words_[i]);
    }
  }
  return v;
}

uint32_t Vocabulary::id(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? kUnknown : it->second;
}

std::vector<uint32_t> Vocabulary::encode(std::string_view text) const {
  std::vector<uint32_t> ids;
  for (const auto& w : tokenize_words(text)) {
    const uint32_t i = id(w);
    if (i != kUnknown) ids.push_back(i);
  }
  return ids;
}

std::string Vocabulary::fingerprint() const {
  Fnv1a h;
  for (const auto& w : words_) {
    h.update_u64(w.size());
    h.update(w);
  }
  return h.hex();
}

nlohmann::json Vocabulary::to_json() const {
  return {{"words", words_}, {"doc_freq", doc_freq_}, {"corpus_freq", corpus_freq_}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  return from_entries(j.at("words").get<std::vector<std::string>>(),
                      j.at("doc_freq").get<std::vector<uint32_t>>(),
                      j.at("corpus_freq").get<std::vector<uint32_t>>());
}

TokenizedDoc tokenize_document(std::string_view text, const Vocabulary& vocab) {
  TokenizedDoc doc;
  for (const auto& sentence : segment_sentences(text)) {
    const auto ids = vocab.encode(sentence);
    SentenceSpan span;
    span.begin = static_cast<uint32_t>(doc.tokens.size());
    doc.tokens.insert(doc.tokens.end(), ids.begin(), ids.end());
    span.end = static_cast<uint32_t>(doc.tokens.size());
    doc.sentences.push_back(span);
  }
  return doc;
}

TokenizedPair tokenize_pair(const EmailPair& pair, const Vocabulary& vocab) {
  return {pair.id, tokenize_document(pair.customer_text, vocab),
          tokenize_document(pair.agent_text, vocab)};
}

std::vector<TokenizedPair> tokenize_pairs(std::span<const EmailPair> pairs,
                                          const Vocabulary& vocab) {
  std::vector<TokenizedPair> out(pairs.size());
  parallel_for(pairs.size(), [&](size_t i) { out[i] = tokenize_pair(pairs[i], vocab); });
  return out;
}

std::vector<EmailPair> filter_pairs(std::span<const EmailPair> pairs,
                                    const FilterOptions& options) {
  if (options.min_customer < 1 || options.min_agent < 1) {
    throw std::invalid_argument("filter_pairs: thresholds must be >= 1");
  }
  std::vector<EmailPair> kept;
  for (const auto& p : pairs) {
    if (tokenize_words(p.customer_text).size() >= options.min_customer &&
        tokenize_words(p.agent_text).size() >= options.min_agent) {
      kept.push_back(p);
    }
  }
  return kept;
}

nlohmann::json CorpusSplit::to_json() const {
  return {{"train", train}, {"test", test}, {"seed", seed}};
}

CorpusSplit CorpusSplit::from_json(const nlohmann::json& j) {
  return {j.at("train").get<std::vector<std::string>>(),
          j.at("test").get<std::vector<std::string>>(), j.at("seed").get<uint64_t>()};
}

CorpusSplit split_corpus(std::span<const EmailPair> pairs, double ratio, uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("split ratio must be in (0, 1)");
  if (pairs.size() < 2) throw Error("split_corpus needs at least 2 pairs");
  std::vector<std::string> ids;
  ids.reserve(pairs.size());
  for (const auto& p : pairs) ids.push_back(p.id);
  Rng rng(seed);
  shuffle(ids, rng);
  const auto n = static_cast<long long>(ids.size());
  const long long n_train = std::clamp(std::llround(ratio * static_cast<double>(n)), 1LL, n - 1);
  CorpusSplit split;
  split.seed = seed;
  split.train.assign(ids.begin(), ids.begin() + n_train);
  split.test.assign(ids.begin() + n_train, ids.end());
  return split;
}

std::vector<EmailPair> select_pairs(std::span<const EmailPair> pairs,
                                    std::span<const std::string> ids) {
  std::unordered_map<std::string_view, size_t> by_id;
  for (size_t i = 0; i < pairs.size(); ++i) by_id.emplace(pairs[i].id, i);
  std::vector<EmailPair> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error("unknown pair id in split: " + id);
    out.push_back(pairs[it->second]);
  }
  return out;
}

CorpusStats corpus_stats(std::span<const EmailPair> pairs) {
  if (pairs.empty()) throw Error("corpus_stats: empty corpus");
  CorpusStats stats;
  double ct = 0, cs = 0, at = 0, as = 0;
  for (const auto& p : pairs) {
    ct += static_cast<double>(tokenize_words(p.customer_text).size());
    cs += static_cast<double>(segment_sentences(p.customer_text).size());
    at += static_cast<double>(tokenize_words(p.agent_text).size());
    as += static_cast<double>(segment_sentences(p.agent_text).size());
  }
  const double n = static_cast<double>(pairs.size());
  stats.customer = {pairs.size(), ct / n, cs / n};
  stats.agent = {pairs.size(), at / n, as / n};
  return stats;
}

nlohmann::json stats_to_json(const CorpusStats& train, const CorpusStats& test) {
  auto role = [](const RoleStats& r) {
    return json{{"D", r.doc_count}, {"avg_T", r.avg_tokens}, {"avg_S", r.avg_sentences}};
  };
  return {{"train", {{"customer", role(train.customer)}, {"agent", role(train.agent)}}},
          {"test", {{"customer", role(test.customer)}, {"agent", role(test.agent)}}}};
}

std::string render_stats_table(const CorpusStats& train, const CorpusStats& test) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-10s | %-24s | %-24s\n", "Type", "Train", "Test");
  out << buf;
  std::snprintf(buf, sizeof(buf), "%-10s | %8s %7s %7s | %8s %7s %7s\n", "", "D", "avg T",
                "avg S", "D", "avg T", "avg S");
  out << buf;
  auto row = [&](const char* name, const RoleStats& a, const RoleStats& b) {
    std::snprintf(buf, sizeof(buf), "%-10s | %8zu %7.1f %7.1f | %8zu %7.1f %7.1f\n", name,
                  a.doc_count, a.avg_tokens, a.avg_sentences, b.doc_count, b.avg_tokens,
                  b.avg_sentences);
    out << buf;
  };
  row("Customer", train.customer, test.customer);
  row("Agent", train.agent, test.agent);
  return out.str();
}

}  // namespace topicreply
