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
#include <cstring>
#include <span>
#include <vector>

#include "pw2v/error.hpp"
#include "pw2v/gemm.hpp"
#include "pw2v/kernel_common.hpp"
#include "pw2v/model.hpp"
#include "pw2v/sigmoid.hpp"
#include "pw2v/window.hpp"

namespace pw2v {

/// B input words that share one target and one set of K negatives.
/// outputs[0] is the target (label 1), outputs[1..K] the negatives (label 0).
struct Minibatch {
  std::span<const WordId> inputs;
  std::span<const WordId> outputs;
};

/// Owning copy of a Minibatch, for callers that collect batches.
struct MinibatchData {
  std::vector<WordId> inputs;
  std::vector<WordId> outputs;

  Minibatch view() const { return {inputs, outputs}; }
};

/// Chunks the context's inputs into groups of at most `batch_cap` and pairs
/// each group with the target plus a freshly drawn negative set.
template <NegativeSource Negatives, typename Fn>
void assemble_batches(const WindowContext& ctx, std::size_t batch_cap, int negatives_per_batch,
                      Negatives& negatives, std::vector<WordId>& outputs, Fn&& fn) {
  outputs.resize(static_cast<std::size_t>(negatives_per_batch) + 1);
  const std::span<const WordId> inputs(ctx.inputs);
  for (std::size_t start = 0; start < inputs.size(); start += batch_cap) {
    const std::size_t len = std::min(batch_cap, inputs.size() - start);
    outputs[0] = ctx.target;
    negatives.draw(ctx.target, std::span<WordId>(outputs).subspan(1));
    fn(Minibatch{inputs.subspan(start, len), outputs});
  }
}

template <NegativeSource Negatives>
std::vector<MinibatchData> assemble_batches(const WindowContext& ctx, std::size_t batch_cap,
                                            int negatives_per_batch, Negatives& negatives) {
  std::vector<MinibatchData> out;
  std::vector<WordId> outputs;
  assemble_batches(ctx, batch_cap, negatives_per_batch, negatives, outputs,
                   [&](const Minibatch& mb) {
                     out.push_back({{mb.inputs.begin(), mb.inputs.end()},
                                    {mb.outputs.begin(), mb.outputs.end()}});
                   });
  return out;
}

/// Negative-sample-sharing update expressed as three dense products.
///
/// With A the B x D input rows and C the (K+1) x D output rows, both taken
/// before any write:
///   S  = A C^T                      scores, B x (K+1)
///   E  = alpha (label - sigma(S))   label 1 in column 0
///   dA = E C,  dC = E^T A
/// and dA, dC are then added to the model rows in index order, so repeated
/// ids accumulate.
template <typename Real>
class BatchKernel {
 public:
  BatchKernel(std::size_t dim, std::size_t batch_cap, int negatives,
              GemmBackend backend = GemmBackend::kBlocked)
      : dim_(dim), cap_(batch_cap), outputs_(static_cast<std::size_t>(negatives) + 1),
        backend_(backend) {
    if (batch_cap == 0) throw Error(ErrorKind::kInvalidConfig, "batch cap must be >= 1");
    a_.resize(cap_ * dim_);
    c_.resize(outputs_ * dim_);
    s_.resize(cap_ * outputs_);
    e_.resize(cap_ * outputs_);
    da_.resize(cap_ * dim_);
    dc_.resize(outputs_ * dim_);
  }

  void process(EmbeddingModel<Real>& model, const Minibatch& batch, Real alpha,
               const Sigmoid& sigmoid, LossTally* loss = nullptr) {
    const std::size_t b = batch.inputs.size();
    const std::size_t o = batch.outputs.size();
    const std::size_t d = dim_;
    if (b == 0) return;
    if (b > cap_ || o != outputs_)
      throw Error(ErrorKind::kInvalidConfig, "minibatch shape exceeds kernel scratch");

    for (std::size_t i = 0; i < b; ++i)
      std::memcpy(a_.data() + i * d, model.m_in.row_ptr(batch.inputs[i]), d * sizeof(Real));
    for (std::size_t k = 0; k < o; ++k)
      std::memcpy(c_.data() + k * d, model.m_out.row_ptr(batch.outputs[k]), d * sizeof(Real));

    gemm_abt(backend_, b, o, d, a_.data(), c_.data(), s_.data());
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t k = 0; k < o; ++k) {
        const Real score = s_[i * o + k];
        const Real label = k == 0 ? Real(1) : Real(0);
        e_[i * o + k] = (label - sigmoid(score)) * alpha;
        if (loss) loss->add(static_cast<double>(score), k == 0);
      }
    gemm_ab(backend_, b, d, o, e_.data(), c_.data(), da_.data());
    gemm_atb(backend_, o, d, b, e_.data(), a_.data(), dc_.data());

    for (std::size_t i = 0; i < b; ++i) {
      Real* __restrict dst = model.m_in.row_ptr(batch.inputs[i]);
      const Real* __restrict src = da_.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
    }
    for (std::size_t k = 0; k < o; ++k) {
      Real* __restrict dst = model.m_out.row_ptr(batch.outputs[k]);
      const Real* __restrict src = dc_.data() + k * d;
      for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
    }
    last_b_ = b;
  }

  // Score and error matrices (row-major, B x (K+1)) of the last batch.
  std::span<const Real> scores() const { return {s_.data(), last_b_ * outputs_}; }
  std::span<const Real> errors() const { return {e_.data(), last_b_ * outputs_}; }
  std::size_t output_count() const noexcept { return outputs_; }
  GemmBackend backend() const noexcept { return backend_; }

 private:
  std::size_t dim_;
  std::size_t cap_;
  std::size_t outputs_;
  GemmBackend backend_;
  std::size_t last_b_ = 0;
  std::vector<Real> a_, c_, s_, e_, da_, dc_;
};

template <typename Real>
void process_batch(EmbeddingModel<Real>& model, const Minibatch& batch, Real alpha,
                   const Sigmoid& sigmoid, GemmBackend backend = GemmBackend::kBlocked) {
  BatchKernel<Real> kernel(model.dim(), std::max<std::size_t>(batch.inputs.size(), 1),
                           static_cast<int>(batch.outputs.size()) - 1, backend);
  kernel.process(model, batch, alpha, sigmoid);
}

}  // namespace pw2v
