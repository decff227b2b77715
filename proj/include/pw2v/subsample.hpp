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
#include <vector>

#include "pw2v/random.hpp"
#include "pw2v/vocab.hpp"

namespace pw2v {

/// Probability of keeping one occurrence of a word whose corpus frequency
/// fraction is f, under threshold t: (sqrt(f/t) + 1) * t/f, clamped to 1.
inline double keep_probability(double frequency_fraction, double threshold) {
  if (!(threshold > 0) || !(frequency_fraction > 0)) return 1.0;
  const double ratio = threshold / frequency_fraction;
  return std::clamp((std::sqrt(frequency_fraction / threshold) + 1.0) * ratio, 0.0, 1.0);
}

/// Per-word keep probabilities; a threshold <= 0 disables subsampling.
class Subsampler {
 public:
  Subsampler() = default;
  Subsampler(const Vocabulary& vocab, double threshold) : keep_(vocab.size(), 1.0) {
    if (threshold <= 0.0 || vocab.total_tokens() == 0) return;
    const double total = static_cast<double>(vocab.total_tokens());
    for (WordId w = 0; w < vocab.size(); ++w) {
      const auto c = vocab.count(w);
      if (c > 0) keep_[w] = keep_probability(static_cast<double>(c) / total, threshold);
    }
  }

  double keep(WordId w) const { return keep_[w]; }

  bool admit(WordId w, Rng& rng) const {
    const double p = keep_[w];
    return p >= 1.0 || uniform_unit(rng) < p;
  }

 private:
  std::vector<double> keep_;
};

}  // namespace pw2v
