/*
 * Copyright 2026 The pw2v Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pw2v/error.hpp"
#include "pw2v/token_reader.hpp"

namespace pw2v {

using WordId = std::uint32_t;

struct VocabEntry {
  std::string token;
  std::uint64_t count = 0;

  friend bool operator==(const VocabEntry&, const VocabEntry&) = default;
};

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

/// Token <-> id mapping ordered by descending count.
///
/// Vocabularies learned from a corpus file reserve id 0 for the sentence
/// marker "</s>", whose count is the number of line breaks. The marker is
/// exempt from min_count and from the ordering, and is never trained on.
class Vocabulary {
 public:
  static constexpr std::string_view kSentenceMarker = "</s>";

  Vocabulary() = default;

  Vocabulary(std::vector<VocabEntry> entries, bool has_sentence_marker)
      : entries_(std::move(entries)), has_marker_(has_sentence_marker) {
    if (has_marker_ && (entries_.empty() || entries_.front().token != kSentenceMarker))
      throw Error(ErrorKind::kParse, "sentence marker must be entry 0");
    index_.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      const bool marker = has_marker_ && i == 0;
      if (e.token.empty()) throw Error(ErrorKind::kParse, "empty token in vocabulary");
      if (!marker && e.count == 0)
        throw Error(ErrorKind::kParse, "zero count for '" + e.token + "'");
      if (!marker && i > first_word() && entries_[i - 1].count < e.count)
        throw Error(ErrorKind::kParse, "vocabulary not sorted by count at '" + e.token + "'");
      if (!index_.emplace(e.token, static_cast<WordId>(i)).second)
        throw Error(ErrorKind::kParse, "duplicate token '" + e.token + "'");
      total_ += e.count;
    }
  }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<VocabEntry>& entries() const noexcept { return entries_; }
  const std::string& token(WordId id) const { return entries_[id].token; }
  std::uint64_t count(WordId id) const { return entries_[id].count; }
  std::uint64_t total_tokens() const noexcept { return total_; }
  bool has_sentence_marker() const noexcept { return has_marker_; }
  // First id that is a real word.
  WordId first_word() const noexcept { return has_marker_ ? 1 : 0; }
  bool is_marker(WordId id) const noexcept { return has_marker_ && id == 0; }

  std::optional<WordId> find(std::string_view token) const {
    const auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.has_marker_ == b.has_marker_ && a.entries_ == b.entries_;
  }

 private:
  std::vector<VocabEntry> entries_;
  std::unordered_map<std::string, WordId, StringHash, std::equal_to<>> index_;
  std::uint64_t total_ = 0;
  bool has_marker_ = false;
};

/// Accumulates raw counts and remembers first-occurrence order for ties.
class VocabCounter {
 public:
  void add(std::string_view token) {
    auto it = counts_.find(token);
    if (it == counts_.end()) {
      counts_.emplace(std::string(token), Slot{1, order_++});
    } else {
      ++it->second.count;
    }
  }

  std::size_t distinct() const noexcept { return counts_.size(); }

  // marker_count < 0 means no sentence marker entry.
  Vocabulary finish(std::uint64_t min_count, std::int64_t marker_count = -1) const {
    struct Row {
      const std::string* token;
      Slot slot;
    };
    std::vector<Row> rows;
    rows.reserve(counts_.size());
    std::uint64_t folded_marker = 0;
    for (const auto& [token, slot] : counts_) {
      if (marker_count >= 0 && token == Vocabulary::kSentenceMarker) {
        folded_marker += slot.count;
        continue;
      }
      if (slot.count >= min_count) rows.push_back({&token, slot});
    }
    if (rows.empty())
      throw Error(ErrorKind::kEmptyVocabulary,
                  "no token occurs at least " + std::to_string(min_count) + " times");
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      if (a.slot.count != b.slot.count) return a.slot.count > b.slot.count;
      return a.slot.first_seen < b.slot.first_seen;
    });
    std::vector<VocabEntry> entries;
    entries.reserve(rows.size() + 1);
    if (marker_count >= 0)
      entries.push_back({std::string(Vocabulary::kSentenceMarker),
                         static_cast<std::uint64_t>(marker_count) + folded_marker});
    for (const auto& r : rows) entries.push_back({*r.token, r.slot.count});
    return Vocabulary(std::move(entries), marker_count >= 0);
  }

 private:
  struct Slot {
    std::uint64_t count;
    std::uint64_t first_seen;
  };
  std::unordered_map<std::string, Slot, StringHash, std::equal_to<>> counts_;
  std::uint64_t order_ = 0;
};

/// Builds a vocabulary from an in-memory token stream (no sentence marker).
template <typename Range>
Vocabulary build_vocab(const Range& tokens, std::uint64_t min_count) {
  VocabCounter counter;
  for (const auto& t : tokens) counter.add(std::string_view(t));
  return counter.finish(min_count);
}

/// Learns the vocabulary of a corpus file in one pass. Adds the sentence
/// marker at id 0, as the reference word2vec tool does.
inline Vocabulary learn_vocab(const std::filesystem::path& corpus, std::uint64_t min_count) {
  TokenReader reader(corpus);
  VocabCounter counter;
  TokenReader::Token tok;
  while (reader.next(tok)) counter.add(tok.text);
  return counter.finish(min_count, static_cast<std::int64_t>(reader.newlines()));
}

/// One "token<TAB>count" line per entry, in id order.
inline void save_vocab(const Vocabulary& vocab, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  for (const auto& e : vocab.entries()) out << e.token << '\t' << e.count << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed on " + path.string());
}

inline Vocabulary load_vocab(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<VocabEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
      throw Error(ErrorKind::kParse, path.string() + ":" + std::to_string(lineno) +
                                         ": expected token<TAB>count");
    VocabEntry e;
    e.token = line.substr(0, tab);
    try {
      std::size_t used = 0;
      e.count = std::stoull(line.substr(tab + 1), &used);
      if (used != line.size() - tab - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorKind::kParse,
                  path.string() + ":" + std::to_string(lineno) + ": bad count");
    }
    entries.push_back(std::move(e));
  }
  const bool marker = !entries.empty() && entries.front().token == Vocabulary::kSentenceMarker;
  if (entries.size() == (marker ? 1u : 0u))
    throw Error(ErrorKind::kEmptyVocabulary, path.string() + " holds no words");
  return Vocabulary(std::move(entries), marker);
}

}  // namespace pw2v
