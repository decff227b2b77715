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
#include <vector>

#include "pw2v/error.hpp"
#include "pw2v/sentence.hpp"
#include "pw2v/token_reader.hpp"

namespace pw2v {

struct ByteRange {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;

  std::uint64_t size() const noexcept { return end - begin; }
  friend bool operator==(const ByteRange&, const ByteRange&) = default;
};

/// Splits [begin, end) into `parts` contiguous ranges that start on sentence
/// boundaries (a line start, or every kMaxSentenceTokens tokens inside a long
/// line), each beginning at the first boundary at or past its even share.
///
/// `begin` must itself be a sentence boundary. With `allow_fewer` the result
/// may hold fewer ranges when there are not enough sentences; otherwise that
/// is a kTooManyShards error.
inline std::vector<ByteRange> partition_range(const std::filesystem::path& path,
                                              std::uint64_t begin, std::uint64_t end,
                                              std::size_t parts, bool allow_fewer = false) {
  if (parts == 0) throw Error(ErrorKind::kInvalidConfig, "cannot split into 0 shards");
  std::vector<std::uint64_t> cuts{begin};
  if (parts > 1) {
    const std::uint64_t span = end - begin;
    auto target = [&](std::size_t k) {
      return begin + static_cast<std::uint64_t>(
                         static_cast<unsigned __int128>(span) * k / parts);
    };
    TokenReader reader(path, begin, end);
    TokenReader::Token tok;
    std::size_t raw = 0;
    std::size_t k = 1;
    while (k < parts && reader.next(tok)) {
      const bool starts = raw == 0 || tok.line_start || raw == kMaxSentenceTokens;
      if (starts) {
        raw = 0;
        if (tok.offset >= target(k) && tok.offset > cuts.back()) {
          cuts.push_back(tok.offset);
          ++k;
        }
      }
      ++raw;
    }
    if (k < parts && !allow_fewer)
      throw Error(ErrorKind::kTooManyShards,
                  "cannot split " + path.string() + " into " + std::to_string(parts) +
                      " shards: only " + std::to_string(k) + " sentence-aligned cut(s) exist");
  }
  cuts.push_back(end);
  std::vector<ByteRange> out;
  out.reserve(cuts.size() - 1);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) out.push_back({cuts[i], cuts[i + 1]});
  return out;
}

/// N equal-byte shards of a whole corpus file.
inline std::vector<ByteRange> partition_corpus(const std::filesystem::path& corpus,
                                               std::size_t shards) {
  return partition_range(corpus, 0, file_size_of(corpus), shards);
}

}  // namespace pw2v
