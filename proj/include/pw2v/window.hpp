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
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "pw2v/random.hpp"
#include "pw2v/vocab.hpp"

namespace pw2v {

/// One target word and the neighbours that act as its input words.
struct WindowContext {
  WordId target = 0;
  std::vector<WordId> inputs;
};

/// Fills `ctx` for sentence position `t` with half-width `half`: inputs are
/// the words at offsets -half..-1, 1..half clipped to the sentence, in
/// sentence order. Returns false when there is no neighbour.
inline bool make_window(std::span<const WordId> sentence, std::size_t t, int half,
                        WindowContext& ctx) {
  ctx.target = sentence[t];
  ctx.inputs.clear();
  const std::size_t h = static_cast<std::size_t>(half);
  const std::size_t lo = t >= h ? t - h : 0;
  const std::size_t hi = std::min(sentence.size(), t + h + 1);
  for (std::size_t j = lo; j < hi; ++j)
    if (j != t) ctx.inputs.push_back(sentence[j]);
  return !ctx.inputs.empty();
}

/// Half-width per position: uniform in {1..window} when shrinking, else window.
inline int draw_half_width(int window, bool shrink, Rng& rng) {
  if (!shrink) return window;
  return 1 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(window)));
}

template <typename Fn>
void for_each_window(std::span<const WordId> sentence, int window, bool shrink, Rng& rng,
                     Fn&& fn) {
  WindowContext ctx;
  ctx.inputs.reserve(2 * static_cast<std::size_t>(window));
  for (std::size_t t = 0; t < sentence.size(); ++t) {
    const int half = draw_half_width(window, shrink, rng);
    if (make_window(sentence, t, half, ctx)) fn(std::as_const(ctx));
  }
}

inline std::vector<WindowContext> iterate_windows(std::span<const WordId> sentence, int window,
                                                  bool shrink, Rng& rng) {
  std::vector<WindowContext> out;
  for_each_window(sentence, window, shrink, rng,
                  [&](const WindowContext& ctx) { out.push_back(ctx); });
  return out;
}

}  // namespace pw2v
