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
#include <span>
#include <vector>

#include "pw2v/kernel_common.hpp"
#include "pw2v/model.hpp"
#include "pw2v/sigmoid.hpp"
#include "pw2v/window.hpp"

namespace pw2v {

/// The one-thread Hogwild SGD step for one context: every input word is
/// scored against the target and K negatives drawn for that input word, with
/// dot products and row updates done one pair at a time.
///
/// g = alpha * (label - sigma(<in, out>)) folds the learning rate into the
/// error once, so m_in receives the accumulated scratch directly.
template <typename Real>
class ScalarKernel {
 public:
  ScalarKernel(std::size_t dim, int negatives)
      : temp_(dim), outputs_(static_cast<std::size_t>(negatives) + 1) {}

  template <NegativeSource Negatives>
  void process(EmbeddingModel<Real>& model, const WindowContext& ctx, Negatives& negatives,
               Real alpha, const Sigmoid& sigmoid, LossTally* loss = nullptr) {
    const std::size_t dim = model.dim();
    Real* const temp = temp_.data();
    for (const WordId input : ctx.inputs) {
      outputs_[0] = ctx.target;
      negatives.draw(ctx.target, std::span<WordId>(outputs_).subspan(1));
      Real* const l1 = model.m_in.row_ptr(input);
      std::fill(temp_.begin(), temp_.end(), Real(0));
      for (std::size_t k = 0; k < outputs_.size(); ++k) {
        Real* const l2 = model.m_out.row_ptr(outputs_[k]);
        const Real label = k == 0 ? Real(1) : Real(0);
        Real inn = 0;
        for (std::size_t j = 0; j < dim; ++j) inn += l1[j] * l2[j];
        const Real g = (label - sigmoid(inn)) * alpha;
        if (loss) loss->add(static_cast<double>(inn), k == 0);
        for (std::size_t j = 0; j < dim; ++j) temp[j] += g * l2[j];
        for (std::size_t j = 0; j < dim; ++j) l2[j] += g * l1[j];
      }
      for (std::size_t j = 0; j < dim; ++j) l1[j] += temp[j];
    }
  }

 private:
  std::vector<Real> temp_;
  std::vector<WordId> outputs_;
};

template <typename Real, NegativeSource Negatives>
void process_context_scalar(EmbeddingModel<Real>& model, const WindowContext& ctx,
                            Negatives& negatives, int negative_count, Real alpha,
                            const Sigmoid& sigmoid) {
  ScalarKernel<Real> kernel(model.dim(), negative_count);
  kernel.process(model, ctx, negatives, alpha, sigmoid);
}

}  // namespace pw2v
