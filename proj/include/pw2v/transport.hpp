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
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "pw2v/error.hpp"
#include "pw2v/model.hpp"
#include "pw2v/vocab.hpp"

namespace pw2v {

enum class MatrixSelector : std::uint8_t { kInput = 0, kOutput = 1 };

inline constexpr std::uint32_t kProtocolVersion = 1;

struct HandshakeInfo {
  std::uint32_t version = kProtocolVersion;
  std::uint32_t rank = 0;
  std::uint32_t nodes = 1;
  std::uint32_t vocab_size = 0;
  std::uint32_t dim = 0;
  std::uint64_t config_hash = 0;

  friend bool operator==(const HandshakeInfo&, const HandshakeInfo&) = default;
};

/// Returns an empty string when `other` is compatible with `mine`.
inline std::string handshake_mismatch(const HandshakeInfo& mine, const HandshakeInfo& other) {
  if (other.version != mine.version) return "protocol version differs";
  if (other.nodes != mine.nodes) return "node count differs";
  if (other.vocab_size != mine.vocab_size) return "vocabulary size differs";
  if (other.dim != mine.dim) return "dimension differs";
  if (other.config_hash != mine.config_hash) return "training configuration differs";
  return {};
}

template <typename Real>
RowMatrix<Real>& select_matrix(EmbeddingModel<Real>& model, MatrixSelector which) {
  return which == MatrixSelector::kInput ? model.m_in : model.m_out;
}

/// Collective operations among N model replicas. Every rank must issue the
/// same sequence of calls.
template <typename Real>
class Transport {
 public:
  virtual ~Transport() = default;

  virtual std::size_t rank() const = 0;
  virtual std::size_t size() const = 0;

  /// Fails with kHandshake on every rank if any two ranks disagree.
  virtual void handshake(const HandshakeInfo& info) = 0;
  virtual void barrier() = 0;

  /// Replaces the named rows of `model` on every rank with their elementwise
  /// mean over all ranks. Rows not named are untouched.
  virtual void allreduce_average(EmbeddingModel<Real>& model, MatrixSelector which,
                                 std::span<const WordId> rows) = 0;

  /// Elementwise sum of a small vector across ranks, result on every rank.
  virtual void reduce_sum(std::span<double> values) = 0;
};

/// Shared state of N in-process replicas. Collectives are exact: the mean is
/// the rank-order sum divided by N, computed once and copied to all ranks.
template <typename Real>
class InProcessGroup {
 public:
  explicit InProcessGroup(std::size_t nodes) : nodes_(nodes), slots_(nodes) {
    if (nodes < 1) throw Error(ErrorKind::kInvalidConfig, "node count must be >= 1");
    for (std::size_t r = 0; r < nodes; ++r) members_.push_back(std::make_unique<Member>(*this, r));
  }

  std::size_t size() const noexcept { return nodes_; }
  Transport<Real>& transport(std::size_t rank) { return *members_.at(rank); }

  /// Wakes every waiting rank with a kTransport error, now and on later calls.
  void abort() {
    std::lock_guard lock(mu_);
    aborted_ = true;
    cv_.notify_all();
  }

 private:
  struct Slot {
    HandshakeInfo info;
    EmbeddingModel<Real>* model = nullptr;
    std::span<const WordId> rows;
    std::span<double> values;
  };

  class Member final : public Transport<Real> {
   public:
    Member(InProcessGroup& g, std::size_t rank) : g_(g), rank_(rank) {}

    std::size_t rank() const override { return rank_; }
    std::size_t size() const override { return g_.nodes_; }

    void handshake(const HandshakeInfo& info) override {
      g_.slots_[rank_].info = info;
      g_.wait();
      std::string why;
      for (std::size_t r = 0; r < g_.nodes_ && why.empty(); ++r) {
        why = handshake_mismatch(g_.slots_[0].info, g_.slots_[r].info);
        if (why.empty() && g_.slots_[r].info.rank != r) why = "rank numbering differs";
      }
      g_.wait();
      if (!why.empty()) throw Error(ErrorKind::kHandshake, "handshake failed: " + why);
    }

    void barrier() override { g_.wait(); }

    void allreduce_average(EmbeddingModel<Real>& model, MatrixSelector which,
                           std::span<const WordId> rows) override {
      auto& slot = g_.slots_[rank_];
      slot.model = &model;
      slot.rows = rows;
      g_.wait();
      bool same = true;
      for (std::size_t r = 1; r < g_.nodes_; ++r)
        same = same && std::equal(rows.begin(), rows.end(), g_.slots_[r].rows.begin(),
                                  g_.slots_[r].rows.end());
      if (same && rank_ == 0) g_.average(which, rows);
      g_.wait();
      if (!same) throw Error(ErrorKind::kTransport, "ranks requested different sync rows");
    }

    void reduce_sum(std::span<double> values) override {
      g_.slots_[rank_].values = values;
      g_.wait();
      std::vector<double> sum(values.size(), 0.0);
      bool same = true;
      for (std::size_t r = 0; r < g_.nodes_; ++r) {
        const auto v = g_.slots_[r].values;
        if (v.size() != sum.size()) {
          same = false;
          break;
        }
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += v[i];
      }
      g_.wait();
      if (!same) throw Error(ErrorKind::kTransport, "ranks reduced vectors of different length");
      std::copy(sum.begin(), sum.end(), values.begin());
    }

   private:
    InProcessGroup& g_;
    std::size_t rank_;
  };

  void average(MatrixSelector which, std::span<const WordId> rows) {
    const std::size_t d = slots_[0].model->dim();
    const Real n = static_cast<Real>(nodes_);
    std::vector<Real> acc(d);
    for (const WordId id : rows) {
      const Real* first = select_matrix(*slots_[0].model, which).row_ptr(id);
      std::copy(first, first + d, acc.begin());
      for (std::size_t r = 1; r < nodes_; ++r) {
        const Real* src = select_matrix(*slots_[r].model, which).row_ptr(id);
        for (std::size_t j = 0; j < d; ++j) acc[j] += src[j];
      }
      for (std::size_t j = 0; j < d; ++j) acc[j] /= n;
      for (std::size_t r = 0; r < nodes_; ++r)
        std::copy(acc.begin(), acc.end(), select_matrix(*slots_[r].model, which).row_ptr(id));
    }
  }

  void wait() {
    std::unique_lock lock(mu_);
    if (aborted_) throw Error(ErrorKind::kTransport, "in-process group aborted");
    const std::uint64_t gen = generation_;
    if (++arrived_ == nodes_) {
      arrived_ = 0;
      ++generation_;
      cv_.notify_all();
      return;
    }
    cv_.wait(lock, [&] { return generation_ != gen || aborted_; });
    if (generation_ == gen) throw Error(ErrorKind::kTransport, "in-process group aborted");
  }

  std::size_t nodes_;
  std::vector<Slot> slots_;
  std::vector<std::unique_ptr<Member>> members_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t arrived_ = 0;
  std::uint64_t generation_ = 0;
  bool aborted_ = false;
};

}  // namespace pw2v
