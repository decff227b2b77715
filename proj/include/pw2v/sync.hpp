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
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pw2v/error.hpp"
#include "pw2v/vocab.hpp"

namespace pw2v {

/// Which rows replicas average, and how often.
struct SyncPolicy {
  std::uint64_t period_words = 1000000;  // local target words between syncs
  std::size_t hot_rows = 0;              // ids 0..F-1, every period
  std::size_t rotation_chunk = 0;        // R of the remaining rows, round-robin

  /// F = min(V, 1e4), R sized for full coverage every 20 periods.
  static SyncPolicy defaults(std::size_t vocab_size) {
    SyncPolicy p;
    p.hot_rows = std::min<std::size_t>(vocab_size, 10000);
    p.rotation_chunk = (vocab_size - p.hot_rows + 19) / 20;
    return p;
  }

  static SyncPolicy full(std::size_t vocab_size, std::uint64_t period_words) {
    return {period_words, vocab_size, 0};
  }

  void validate(std::size_t vocab_size) const {
    if (period_words < 1) throw Error(ErrorKind::kInvalidConfig, "sync period must be >= 1");
    if (hot_rows > vocab_size)
      throw Error(ErrorKind::kInvalidConfig, "hot rows exceed vocabulary size");
    if (rotation_chunk > vocab_size - hot_rows)
      throw Error(ErrorKind::kInvalidConfig, "rotation chunk exceeds remaining rows");
  }

  /// Periods needed for the rotation to visit every cold row.
  std::uint64_t coverage_periods(std::size_t vocab_size) const {
    const std::size_t cold = vocab_size - hot_rows;
    if (cold == 0) return 1;
    if (rotation_chunk == 0) return 0;
    return (cold + rotation_chunk - 1) / rotation_chunk;
  }
};

/// Sorted ids {0..F-1} plus the period-th R-row chunk of {F..V-1}, wrapping
/// around the end.
inline std::vector<WordId> select_sync_rows(std::size_t vocab_size, const SyncPolicy& policy,
                                            std::uint64_t period_index) {
  policy.validate(vocab_size);
  std::vector<WordId> rows;
  rows.reserve(policy.hot_rows + policy.rotation_chunk);
  for (std::size_t i = 0; i < policy.hot_rows; ++i) rows.push_back(static_cast<WordId>(i));
  const std::size_t cold = vocab_size - policy.hot_rows;
  if (cold > 0 && policy.rotation_chunk > 0) {
    const std::size_t start = static_cast<std::size_t>(
        (static_cast<unsigned __int128>(period_index) * policy.rotation_chunk) % cold);
    for (std::size_t j = 0; j < policy.rotation_chunk; ++j)
      rows.push_back(static_cast<WordId>(policy.hot_rows + (start + j) % cold));
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

inline std::vector<WordId> select_sync_rows(const Vocabulary& vocab, const SyncPolicy& policy,
                                            std::uint64_t period_index) {
  return select_sync_rows(vocab.size(), policy, period_index);
}

inline double scaled_alpha0(double alpha0, std::size_t nodes) {
  if (nodes < 1) throw Error(ErrorKind::kInvalidConfig, "node count must be >= 1");
  return alpha0 * std::sqrt(static_cast<double>(nodes));
}

}  // namespace pw2v
