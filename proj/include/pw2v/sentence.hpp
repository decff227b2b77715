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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "pw2v/token_reader.hpp"
#include "pw2v/vocab.hpp"

namespace pw2v {

/// Longest sentence, in whitespace tokens; longer lines are split.
inline constexpr std::size_t kMaxSentenceTokens = 1000;

/// Yields sentences of a byte range as word ids. A sentence is one line, or a
/// kMaxSentenceTokens-token slice of a longer line; out-of-vocabulary tokens
/// and the sentence marker count toward that length but are dropped.
class SentenceReader {
 public:
  SentenceReader(const std::filesystem::path& path, std::uint64_t begin, std::uint64_t end,
                 const Vocabulary& vocab)
      : reader_(path, begin, end), vocab_(&vocab) {}

  /// Returns false once the range is exhausted. `ids` may come back empty
  /// when every token of the sentence is unknown.
  bool next(std::vector<WordId>& ids) {
    ids.clear();
    std::size_t raw = 0;
    if (pending_) {
      raw = 1;
      if (*pending_ != kNone) ids.push_back(*pending_);
      pending_.reset();
    }
    TokenReader::Token tok;
    while (raw < kMaxSentenceTokens && reader_.next(tok)) {
      const WordId id = resolve(tok.text);
      if (raw > 0 && tok.line_start) {
        pending_ = id;
        break;
      }
      ++raw;
      if (id != kNone) ids.push_back(id);
    }
    return raw > 0;
  }

  void rewind() {
    reader_.rewind();
    pending_.reset();
  }

 private:
  static constexpr WordId kNone = ~WordId{0};

  WordId resolve(std::string_view text) const {
    const auto id = vocab_->find(text);
    if (!id || vocab_->is_marker(*id)) return kNone;
    return *id;
  }

  TokenReader reader_;
  const Vocabulary* vocab_;
  std::optional<WordId> pending_;
};

}  // namespace pw2v
