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
#include <span>
#include <vector>

#include "pw2v/error.hpp"
#include "pw2v/random.hpp"
#include "pw2v/vocab.hpp"

namespace pw2v {

/// Unigram table encoding P_n(w) ∝ count(w)^power: a word owns a run of
/// slots proportional to its weight, so a draw is one uniform slot pick.
///
/// Slot runs come from rounding the cumulative weight, which keeps every
/// word's share within 1/L of its exact probability. The sentence marker has
/// weight zero.
class NegativeTable {
 public:
  static constexpr double kDefaultPower = 0.75;
  static constexpr std::uint64_t kDefaultLength = 100'000'000;

  // 1e8 slots, scaled down proportionally below 1e4 words.
  static std::uint64_t default_length(std::size_t vocab_size) {
    if (vocab_size >= 10'000) return kDefaultLength;
    return std::max<std::uint64_t>(vocab_size, vocab_size * (kDefaultLength / 10'000));
  }

  NegativeTable() = default;

  NegativeTable(const Vocabulary& vocab, double power, std::uint64_t length)
      : power_(power), vocab_size_(vocab.size()) {
    if (length < vocab.size())
      throw Error(ErrorKind::kTableTooSmall, "table length " + std::to_string(length) +
                                                 " < vocabulary size " +
                                                 std::to_string(vocab.size()));
    if (!(power > 0.0)) throw Error(ErrorKind::kInvalidConfig, "table power must be > 0");
    std::vector<long double> weight(vocab.size(), 0.0L);
    long double total = 0.0L;
    for (WordId w = vocab.first_word(); w < vocab.size(); ++w) {
      weight[w] = std::pow(static_cast<long double>(vocab.count(w)), power);
      total += weight[w];
    }
    if (!(total > 0.0L)) throw Error(ErrorKind::kEmptyVocabulary, "no sampleable words");
    try {
      slots_.resize(length);
    } catch (const std::bad_alloc&) {
      throw Error(ErrorKind::kResource, "cannot allocate negative table");
    }
    long double cumulative = 0.0L;
    std::uint64_t filled = 0;
    for (WordId w = 0; w < vocab.size(); ++w) {
      if (weight[w] == 0.0L) continue;
      cumulative += weight[w];
      auto boundary = static_cast<std::uint64_t>(std::llround(cumulative / total * length));
      boundary = std::min(boundary, length);
      if (boundary > filled) {
        std::fill(slots_.begin() + static_cast<std::ptrdiff_t>(filled),
                  slots_.begin() + static_cast<std::ptrdiff_t>(boundary), w);
        filled = boundary;
        ++distinct_;
      }
      last_ = w;
    }
    // Rounding can leave the final slot unassigned by at most one.
    if (filled < length) {
      std::fill(slots_.begin() + static_cast<std::ptrdiff_t>(filled), slots_.end(), last_);
      if (filled == 0) ++distinct_;
    }
  }

  WordId sample(Rng& rng) const { return slots_[uniform_below(rng, slots_.size())]; }

  std::span<const WordId> slots() const noexcept { return slots_; }
  std::uint64_t length() const noexcept { return slots_.size(); }
  double power() const noexcept { return power_; }
  std::size_t source_vocab_size() const noexcept { return vocab_size_; }
  // Number of words owning at least one slot.
  std::size_t distinct_words() const noexcept { return distinct_; }
  bool empty() const noexcept { return slots_.empty(); }

 private:
  std::vector<WordId> slots_;
  double power_ = kDefaultPower;
  std::size_t vocab_size_ = 0;
  std::size_t distinct_ = 0;
  WordId last_ = 0;
};

/// Training-time negative source: K table draws per call, never the target.
/// With `distinct` set, also never a repeat within one draw.
class TableNegatives {
 public:
  TableNegatives(const NegativeTable& table, Rng& rng, bool distinct = false)
      : table_(&table), rng_(&rng), distinct_(distinct) {}

  void draw(WordId target, std::span<WordId> out) {
    for (std::size_t k = 0; k < out.size(); ++k) {
      WordId w;
      do {
        w = table_->sample(*rng_);
      } while (w == target ||
               (distinct_ && std::find(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(k),
                                       w) != out.begin() + static_cast<std::ptrdiff_t>(k)));
      out[k] = w;
    }
  }

  // Throws unless `negatives` draws can always terminate.
  static void check_feasible(const NegativeTable& table, int negatives, bool distinct) {
    const std::size_t need = distinct ? static_cast<std::size_t>(negatives) + 1 : 2;
    if (table.distinct_words() < need)
      throw Error(ErrorKind::kInvalidConfig,
                  "negative table holds " + std::to_string(table.distinct_words()) +
                      " distinct words; need at least " + std::to_string(need));
  }

 private:
  const NegativeTable* table_;
  Rng* rng_;
  bool distinct_;
};

}  // namespace pw2v
