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
#include <bit>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pw2v/error.hpp"
#include "pw2v/gemm.hpp"

namespace pw2v {

enum class KernelKind { kScalar, kBatched };

inline std::string_view to_string(KernelKind k) {
  return k == KernelKind::kScalar ? "scalar" : "batched";
}

inline KernelKind parse_kernel_kind(std::string_view s) {
  if (s == "scalar") return KernelKind::kScalar;
  if (s == "batched") return KernelKind::kBatched;
  throw Error(ErrorKind::kUsage, "unknown kernel '" + std::string(s) + "'");
}

/// Every training hyperparameter. Defaults follow the 1B-word benchmark
/// setting (dim 300, 5 negatives, window 5, sample 1e-4).
struct TrainingConfig {
  int dim = 300;
  int window = 5;
  int negative = 5;
  double sample = 1e-4;  // <= 0 disables subsampling
  std::uint64_t min_count = 5;
  double alpha0 = 0.025;
  double alpha_floor_fraction = 1e-4;
  int epochs = 5;
  int threads = 1;
  int batch_cap = 16;
  KernelKind kernel = KernelKind::kBatched;
  std::uint64_t seed = 1;

  bool shrink_window = true;        // half-width ~ Uniform{1..window}
  bool exact_sigmoid = false;       // exact logistic instead of the table
  bool distinct_negatives = false;  // no repeated negative within one draw
  GemmBackend gemm = GemmBackend::kBlocked;
  std::uint64_t table_length = 0;   // 0: NegativeTable::default_length(V)
  double table_power = 0.75;
  bool progress = false;            // progress line on stderr

  void validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::kInvalidConfig, what); };
    if (dim < 1) fail("dim must be >= 1");
    if (window < 1) fail("window must be >= 1");
    if (negative < 1) fail("negative must be >= 1");
    if (min_count < 1) fail("min-count must be >= 1");
    if (!(alpha0 > 0)) fail("alpha must be > 0");
    if (!(alpha_floor_fraction > 0 && alpha_floor_fraction < 1))
      fail("alpha floor fraction must lie in (0, 1)");
    if (epochs < 1) fail("iter must be >= 1");
    if (threads < 1) fail("threads must be >= 1");
    if (batch_cap < 1) fail("batch-size must be >= 1");
    if (!(table_power > 0)) fail("table power must be > 0");
    if (gemm == GemmBackend::kBlas && !blas_available()) fail("blas backend not built");
  }

  /// Stable FNV-1a digest of every setting that changes the trained model,
  /// used by distributed ranks to agree before training.
  std::uint64_t fingerprint() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
      for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xFF;
        h *= 1099511628211ull;
      }
    };
    auto mixd = [&mix](double d) { mix(std::bit_cast<std::uint64_t>(d)); };
    mix(static_cast<std::uint64_t>(dim));
    mix(static_cast<std::uint64_t>(window));
    mix(static_cast<std::uint64_t>(negative));
    mixd(sample);
    mix(min_count);
    mixd(alpha0);
    mixd(alpha_floor_fraction);
    mix(static_cast<std::uint64_t>(epochs));
    mix(static_cast<std::uint64_t>(batch_cap));
    mix(static_cast<std::uint64_t>(kernel));
    mix(seed);
    mix(shrink_window);
    mix(exact_sigmoid);
    mix(distinct_negatives);
    mix(table_length);
    mixd(table_power);
    return h;
  }
};

/// Linear decay with a floor: alpha0 * max(1 - done/(total+1), floor).
inline double update_alpha(std::uint64_t words_done, std::uint64_t total_words, double alpha0,
                           double floor_fraction) {
  const double progress =
      static_cast<double>(words_done) / (static_cast<double>(total_words) + 1.0);
  return alpha0 * std::max(1.0 - progress, floor_fraction);
}

struct TrainingStats {
  std::uint64_t words_read = 0;       // in-vocabulary tokens read, all epochs
  std::uint64_t words_processed = 0;  // target words trained on (after subsampling)
  double wall_seconds = 0.0;
  double throughput_words_per_sec = 0.0;
  double final_alpha = 0.0;
  int threads = 1;
  std::vector<double> epoch_loss;     // sampled mean -log sigma per epoch

  void finalize_throughput() {
    throughput_words_per_sec =
        wall_seconds > 0 ? static_cast<double>(words_processed) / wall_seconds : 0.0;
  }
};

}  // namespace pw2v
