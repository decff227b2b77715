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
#include <cstdint>

#include "pw2v/error.hpp"
#include "pw2v/matrix.hpp"
#include "pw2v/random.hpp"

namespace pw2v {

/// The two V x D parameter matrices. Row w of m_in is the input vector of
/// word w, row w of m_out its output vector.
///
/// During training the model is shared by worker threads without locks
/// (Hogwild): rows may be read while another thread writes them. Saving and
/// evaluation need a quiescent model.
template <typename Real>
struct EmbeddingModel {
  RowMatrix<Real> m_in;
  RowMatrix<Real> m_out;

  std::size_t dim() const noexcept { return m_in.cols(); }
  std::size_t vocab_size() const noexcept { return m_in.rows(); }

  bool all_finite() const {
    for (const Real v : m_in.data())
      if (!std::isfinite(v)) return false;
    for (const Real v : m_out.data())
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const EmbeddingModel&, const EmbeddingModel&) = default;
};

/// m_in uniform in (-0.5/D, 0.5/D), m_out zero.
template <typename Real>
EmbeddingModel<Real> init_model(std::size_t vocab_size, std::size_t dim, std::uint64_t seed) {
  if (vocab_size == 0 || dim == 0)
    throw Error(ErrorKind::kInvalidConfig, "model needs V >= 1 and D >= 1");
  EmbeddingModel<Real> model{RowMatrix<Real>(vocab_size, dim), RowMatrix<Real>(vocab_size, dim)};
  Rng rng = make_rng(seed, 0, 0, /*purpose=*/0x1417);
  const double scale = 1.0 / static_cast<double>(dim);
  const Real bound = static_cast<Real>(0.5 * scale);
  for (Real& v : model.m_in.data()) {
    // Redraw the (rare) values that round onto the closed bound.
    do {
      v = static_cast<Real>((uniform_unit(rng) - 0.5) * scale);
    } while (!(std::abs(v) < bound));
  }
  return model;
}

}  // namespace pw2v
