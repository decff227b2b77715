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

#include <chrono>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <cstdio>
#include <string_view>
#include <thread>
#include <vector>

#include "pw2v/config.hpp"
#include "pw2v/error.hpp"
#include "pw2v/partition.hpp"
#include "pw2v/sync.hpp"
#include "pw2v/trainer.hpp"
#include "pw2v/transport.hpp"

namespace pw2v {

/// Thrown when a collective fails mid-run; carries what this rank had done.
class DistributedAbort : public Error {
 public:
  DistributedAbort(const Error& cause, TrainingStats partial)
      : Error(cause.kind(), cause.what()), partial_(std::move(partial)) {}
  const TrainingStats& partial_stats() const noexcept { return partial_; }

 private:
  TrainingStats partial_;
};

template <typename Real>
struct DistributedResult {
  EmbeddingModel<Real> model;
  TrainingStats stats;  // words summed over ranks; wall time of this rank
  std::uint64_t periods = 0;
  std::size_t rank = 0;
  std::size_t nodes = 1;
};

/// Called on each rank after every periodic sync.
template <typename Real>
using SyncHook = std::function<void(std::size_t rank, std::uint64_t period,
                                    const EmbeddingModel<Real>& model)>;

inline std::uint64_t policy_fingerprint(const TrainingConfig& config, const SyncPolicy& policy) {
  std::uint64_t h = config.fingerprint();
  for (const std::uint64_t v : {policy.period_words, static_cast<std::uint64_t>(policy.hot_rows),
                                static_cast<std::uint64_t>(policy.rotation_chunk)}) {
    h ^= v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
  }
  return h;
}

/// Runs every cursor for `budget` target words, one thread per cursor, and
/// returns once all writers have stopped.
template <typename Real>
void run_round(std::vector<std::unique_ptr<ThreadCursor<Real>>>& cursors,
               EmbeddingModel<Real>& model, std::uint64_t budget) {
  if (cursors.size() == 1) {
    cursors[0]->run(model, budget);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(cursors.size());
  for (auto& c : cursors)
    if (!c->finished()) pool.emplace_back([&model, cur = c.get(), budget] { cur->run(model, budget); });
}

/// Data-parallel training of one rank. Every rank starts from the same
/// initial model, trains its shard with the node-scaled learning rate, and
/// averages the policy's rows with all other ranks every period_words local
/// target words. A full-model average closes the run.
template <typename Real>
DistributedResult<Real> distributed_train(const std::shared_ptr<const Corpus>& corpus,
                                          TrainingConfig config, const SyncPolicy& policy,
                                          Transport<Real>& transport,
                                          const SyncHook<Real>& on_sync = {}) {
  config.validate();
  const std::size_t vocab_size = corpus->vocab.size();
  policy.validate(vocab_size);
  const std::size_t rank = transport.rank();
  const std::size_t nodes = transport.size();
  if (rank != 0) config.progress = false;

  HandshakeInfo info;
  info.rank = static_cast<std::uint32_t>(rank);
  info.nodes = static_cast<std::uint32_t>(nodes);
  info.vocab_size = static_cast<std::uint32_t>(vocab_size);
  info.dim = static_cast<std::uint32_t>(config.dim);
  info.config_hash = policy_fingerprint(config, policy);
  transport.handshake(info);

  const auto shards = partition_corpus(corpus->path, nodes);
  EmbeddingModel<Real> model =
      init_model<Real>(vocab_size, static_cast<std::size_t>(config.dim), config.seed);
  SharedProgress progress;
  const AlphaSchedule schedule{
      scaled_alpha0(config.alpha0, nodes),
      trainable_words(corpus->vocab) / nodes * static_cast<std::uint64_t>(config.epochs),
      config.alpha_floor_fraction};
  auto cursors = make_cursors<Real>(corpus, config, shards[rank], rank, progress, schedule);

  const std::uint64_t budget =
      (policy.period_words + cursors.size() - 1) / cursors.size();
  std::uint64_t period = 0;
  const auto t0 = std::chrono::steady_clock::now();
  auto partial = [&] {
    TrainingStats s = collect_stats(cursors, config.epochs);
    s.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    s.finalize_throughput();
    return s;
  };

  try {
    for (;;) {
      run_round(cursors, model, budget);
      double active = 0;
      for (const auto& c : cursors) active += c->finished() ? 0.0 : 1.0;
      transport.reduce_sum(std::span<double>(&active, 1));
      if (active == 0) break;
      const auto rows = select_sync_rows(vocab_size, policy, period);
      if (!rows.empty()) {
        transport.allreduce_average(model, MatrixSelector::kInput, rows);
        transport.allreduce_average(model, MatrixSelector::kOutput, rows);
      }
      if (on_sync) on_sync(rank, period, model);
      ++period;
    }
    std::vector<WordId> all(vocab_size);
    for (std::size_t i = 0; i < vocab_size; ++i) all[i] = static_cast<WordId>(i);
    transport.allreduce_average(model, MatrixSelector::kInput, all);
    transport.allreduce_average(model, MatrixSelector::kOutput, all);
  } catch (const Error& e) {
    throw DistributedAbort(e, partial());
  }
  if (config.progress) std::fputc('\n', stderr);

  TrainingStats stats = partial();
  std::vector<double> totals{static_cast<double>(stats.words_read),
                             static_cast<double>(stats.words_processed)};
  std::vector<LossTally> loss(static_cast<std::size_t>(config.epochs));
  for (const auto& c : cursors)
    for (std::size_t e = 0; e < loss.size(); ++e) loss[e].merge(c->epoch_loss()[e]);
  for (const auto& l : loss) {
    totals.push_back(l.sum);
    totals.push_back(static_cast<double>(l.pairs));
  }
  try {
    transport.reduce_sum(totals);
  } catch (const Error& e) {
    throw DistributedAbort(e, stats);
  }
  stats.words_read = static_cast<std::uint64_t>(totals[0]);
  stats.words_processed = static_cast<std::uint64_t>(totals[1]);
  stats.epoch_loss.clear();
  for (std::size_t e = 0; e < loss.size(); ++e) {
    const double pairs = totals[3 + 2 * e];
    stats.epoch_loss.push_back(pairs > 0 ? totals[2 + 2 * e] / pairs : 0.0);
  }
  stats.finalize_throughput();
  return {std::move(model), std::move(stats), period, rank, nodes};
}

/// N replicas in one process over an InProcessGroup. Returns rank 0's result.
template <typename Real>
DistributedResult<Real> train_in_process(const std::shared_ptr<const Corpus>& corpus,
                                         const TrainingConfig& config, const SyncPolicy& policy,
                                         std::size_t nodes, const SyncHook<Real>& on_sync = {}) {
  InProcessGroup<Real> group(nodes);
  std::vector<std::optional<DistributedResult<Real>>> results(nodes);
  std::vector<std::exception_ptr> errors(nodes);
  auto work = [&](std::size_t r) {
    try {
      results[r] = distributed_train<Real>(corpus, config, policy, group.transport(r), on_sync);
    } catch (...) {
      errors[r] = std::current_exception();
      group.abort();
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t r = 1; r < nodes; ++r) pool.emplace_back(work, r);
    work(0);
  }
  // Prefer the root cause over the aborts it triggered on other ranks.
  for (const auto& e : errors) {
    if (!e) continue;
    try {
      std::rethrow_exception(e);
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::kTransport && std::string_view(err.what()).find("aborted") !=
                                                     std::string_view::npos)
        continue;
      throw;
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return std::move(*results[0]);
}

}  // namespace pw2v
