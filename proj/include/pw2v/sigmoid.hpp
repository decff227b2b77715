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

#include <array>
#include <cmath>

namespace pw2v {

template <typename Real>
Real sigmoid(Real x) {
  return Real(1) / (Real(1) + std::exp(-x));
}

/// Lookup sigmoid over [-6, 6] in 1000 bins; each bin holds the exact value
/// at its left edge and inputs outside the range clamp to the end bins.
class SigmoidTable {
 public:
  static constexpr double kMaxExp = 6.0;
  static constexpr int kBins = 1000;

  SigmoidTable() {
    for (int i = 0; i < kBins; ++i) {
      const double x = (static_cast<double>(i) / kBins * 2.0 - 1.0) * kMaxExp;
      table_[i] = 1.0 / (1.0 + std::exp(-x));
    }
  }

  template <typename Real>
  Real operator()(Real x) const {
    if (!(x > Real(-kMaxExp))) return static_cast<Real>(table_.front());
    if (x >= Real(kMaxExp)) return static_cast<Real>(table_.back());
    int bin = static_cast<int>((static_cast<double>(x) + kMaxExp) * (kBins / (2.0 * kMaxExp)));
    if (bin >= kBins) bin = kBins - 1;
    return static_cast<Real>(table_[bin]);
  }

 private:
  std::array<double, kBins> table_{};
};

/// Either the exact logistic (oracle path) or the table (training fast path).
class Sigmoid {
 public:
  explicit Sigmoid(bool exact = false) : exact_(exact) {}

  template <typename Real>
  Real operator()(Real x) const {
    return exact_ ? sigmoid(x) : table_(x);
  }

  bool exact() const noexcept { return exact_; }

 private:
  bool exact_;
  SigmoidTable table_;
};

}  // namespace pw2v
