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

#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>

#include "pw2v/vocab.hpp"

namespace pw2v {

/// Anything that fills `out` with negatives for `target`.
template <typename T>
concept NegativeSource = requires(T& t, WordId target, std::span<WordId> out) {
  { t.draw(target, out) };
};

/// Running mean of -log sigma(+/- score) over sampled (input, output) pairs.
struct LossTally {
  double sum = 0.0;
  std::uint64_t pairs = 0;

  void add(double score, bool positive) {
    const double x = positive ? score : -score;
    // -log sigma(x) = log(1 + e^-x), stable on both tails.
    sum += x > 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
    ++pairs;
  }

  void merge(const LossTally& other) {
    sum += other.sum;
    pairs += other.pairs;
  }

  double mean() const { return pairs ? sum / static_cast<double>(pairs) : 0.0; }
};

}  // namespace pw2v
