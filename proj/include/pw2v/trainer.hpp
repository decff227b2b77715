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
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "pw2v/config.hpp"
#include "pw2v/kernel_batched.hpp"
#include "pw2v/kernel_scalar.hpp"
#include "pw2v/model.hpp"
#include "pw2v/negative_table.hpp"
#include "pw2v/partition.hpp"
#include "pw2v/random.hpp"
#include "pw2v/sentence.hpp"
#include "pw2v/sigmoid.hpp"
#include "pw2v/subsample.hpp"
#include "pw2v/token_reader.hpp"
#include "pw2v/vocab.hpp"
#include "pw2v/window.hpp"

namespace pw2v {

inline constexpr std::uint64_t kRngCorpus = 0xC0;
inline constexpr std::uint64_t kRngNegatives = 0x4E;
inline constexpr std::uint64_t kAlphaRefreshWords = 10000;
inline constexpr std::uint64_t kLossSampleEvery = 100;

/// In-vocabulary tokens per pass, excluding sentence markers.
inline std::uint64_t trainable_words(const Vocabulary& vocab) {
  std::uint64_t total = vocab.total_tokens();
  if (vocab.has_sentence_marker()) total -= vocab.count(0);
  return total;
}

/// Read-only state shared by every worker thread.
struct Corpus {
  std::filesystem::path path;
  Vocabulary vocab;
  NegativeTable table;
  Subsampler subsampler;

  Corpus(std::filesystem::path p, Vocabulary v, const TrainingConfig& config)
      : path(std::move(p)), vocab(std::move(v)) {
    if (vocab.size() <= vocab.first_word())
      throw Error(ErrorKind::kEmptyVocabulary, "vocabulary has no trainable words");
    const std::uint64_t length = config.table_length
                                     ? config.table_length
                                     : NegativeTable::default_length(vocab.size());
    table = NegativeTable(vocab, config.table_power, length);
    TableNegatives::check_feasible(table, config.negative, config.distinct_negatives);
    subsampler = Subsampler(vocab, config.sample);
  }
};

inline std::shared_ptr<const Corpus> prepare_corpus(const std::filesystem::path& path,
                                                    const TrainingConfig& config) {
  config.validate();
  return std::make_shared<const Corpus>(path, learn_vocab(path, config.min_count), config);
}

/// Counters shared by the threads of one process.
struct SharedProgress {
  std::atomic<std::uint64_t> words_read{0};
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::atomic<std::int64_t> last_print_ms{-1000};
};

struct AlphaSchedule {
  double alpha0 = 0.025;
  std::uint64_t total_words = 0;  // words this process reads over all epochs
  double floor_fraction = 1e-4;

  double at(std::uint64_t done) const {
    return update_alpha(done, total_words, alpha0, floor_fraction);
  }
};

/// One thread's pass over a byte range: reads sentences, subsamples, forms
/// windows and runs the configured kernel. Work can be handed out in budgets
/// of target words so that callers may pause between rounds.
template <typename Real>
class ThreadCursor {
 public:
  ThreadCursor(std::shared_ptr<const Corpus> corpus, const TrainingConfig& config,
               ByteRange range, std::uint64_t rank, std::uint64_t thread_index,
               SharedProgress& progress, AlphaSchedule schedule)
      : corpus_(std::move(corpus)),
        config_(config),
        reader_(corpus_->path, range.begin, range.end, corpus_->vocab),
        progress_(&progress),
        schedule_(schedule),
        thread_index_(thread_index),
        corpus_rng_(make_rng(config.seed, rank, thread_index, kRngCorpus)),
        negative_rng_(make_rng(config.seed, rank, thread_index, kRngNegatives)),
        negatives_(corpus_->table, negative_rng_, config.distinct_negatives),
        sigmoid_(config.exact_sigmoid),
        loss_(static_cast<std::size_t>(config.epochs)) {
    alpha_ = schedule_.at(0);
    ctx_.inputs.reserve(2 * static_cast<std::size_t>(config.window));
    if (config.kernel == KernelKind::kScalar)
      scalar_.emplace(static_cast<std::size_t>(config.dim), config.negative);
    else
      batched_.emplace(static_cast<std::size_t>(config.dim),
                       static_cast<std::size_t>(config.batch_cap), config.negative, config.gemm);
  }

  ThreadCursor(const ThreadCursor&) = delete;
  ThreadCursor& operator=(const ThreadCursor&) = delete;

  /// Trains on up to `budget` target words. Returns false once every epoch
  /// of the range is done.
  bool run(EmbeddingModel<Real>& model, std::uint64_t budget) {
    std::uint64_t done = 0;
    while (!finished_ && done < budget) {
      if (pos_ >= kept_.size()) {
        if (!load_sentence()) end_epoch();
        continue;
      }
      const int half = draw_half_width(config_.window, config_.shrink_window, corpus_rng_);
      if (make_window(kept_, pos_, half, ctx_)) train_context(model);
      ++pos_;
      ++done;
      ++words_processed_;
    }
    return !finished_;
  }

  bool finished() const noexcept { return finished_; }
  std::uint64_t words_read() const noexcept { return words_read_; }
  std::uint64_t words_processed() const noexcept { return words_processed_; }
  double alpha() const noexcept { return alpha_; }
  const std::vector<LossTally>& epoch_loss() const noexcept { return loss_; }

 private:
  bool load_sentence() {
    if (!reader_.next(raw_)) return false;
    words_read_ += raw_.size();
    unreported_ += raw_.size();
    if (unreported_ >= kAlphaRefreshWords) refresh_alpha();
    kept_.clear();
    for (const WordId w : raw_)
      if (corpus_->subsampler.admit(w, corpus_rng_)) kept_.push_back(w);
    pos_ = 0;
    return true;
  }

  void end_epoch() {
    refresh_alpha();
    if (++epoch_ >= config_.epochs) {
      finished_ = true;
      return;
    }
    reader_.rewind();
  }

  void refresh_alpha() {
    const std::uint64_t total =
        progress_->words_read.fetch_add(unreported_, std::memory_order_relaxed) + unreported_;
    unreported_ = 0;
    alpha_ = schedule_.at(total);
    if (config_.progress && thread_index_ == 0) print_progress(total);
  }

  void print_progress(std::uint64_t total) {
    using namespace std::chrono;
    const auto ms =
        duration_cast<milliseconds>(steady_clock::now() - progress_->start).count();
    if (ms - progress_->last_print_ms.load(std::memory_order_relaxed) < 1000) return;
    progress_->last_print_ms.store(ms, std::memory_order_relaxed);
    const double pct = schedule_.total_words
                           ? 100.0 * static_cast<double>(total) /
                                 static_cast<double>(schedule_.total_words)
                           : 0.0;
    const double kwps = ms > 0 ? static_cast<double>(total) / static_cast<double>(ms) : 0.0;
    std::fprintf(stderr, "\ralpha: %f  progress: %.2f%%  words/thread/sec: %.2fk  ", alpha_,
                 std::min(pct, 100.0), kwps);
    std::fflush(stderr);
  }

  void train_context(EmbeddingModel<Real>& model) {
    LossTally* tally = (contexts_++ % kLossSampleEvery) == 0 ? &loss_[epoch_] : nullptr;
    const Real alpha = static_cast<Real>(alpha_);
    if (scalar_) {
      scalar_->process(model, ctx_, negatives_, alpha, sigmoid_, tally);
      return;
    }
    assemble_batches(ctx_, static_cast<std::size_t>(config_.batch_cap), config_.negative,
                     negatives_, outputs_, [&](const Minibatch& mb) {
                       batched_->process(model, mb, alpha, sigmoid_, tally);
                     });
  }

  std::shared_ptr<const Corpus> corpus_;
  TrainingConfig config_;
  SentenceReader reader_;
  SharedProgress* progress_;
  AlphaSchedule schedule_;
  std::uint64_t thread_index_;
  Rng corpus_rng_;
  Rng negative_rng_;
  TableNegatives negatives_;
  Sigmoid sigmoid_;
  std::optional<ScalarKernel<Real>> scalar_;
  std::optional<BatchKernel<Real>> batched_;

  std::vector<WordId> raw_, kept_, outputs_;
  WindowContext ctx_;
  std::size_t pos_ = 0;
  int epoch_ = 0;
  bool finished_ = false;
  double alpha_ = 0.0;
  std::uint64_t words_read_ = 0;
  std::uint64_t unreported_ = 0;
  std::uint64_t words_processed_ = 0;
  std::uint64_t contexts_ = 0;
  std::vector<LossTally> loss_;
};

template <typename Real>
TrainingStats collect_stats(const std::vector<std::unique_ptr<ThreadCursor<Real>>>& cursors,
                            int epochs) {
  TrainingStats stats;
  stats.threads = static_cast<int>(cursors.size());
  std::vector<LossTally> loss(static_cast<std::size_t>(epochs));
  stats.final_alpha = std::numeric_limits<double>::infinity();
  for (const auto& c : cursors) {
    stats.words_read += c->words_read();
    stats.words_processed += c->words_processed();
    stats.final_alpha = std::min(stats.final_alpha, c->alpha());
    for (std::size_t e = 0; e < loss.size(); ++e) loss[e].merge(c->epoch_loss()[e]);
  }
  if (cursors.empty()) stats.final_alpha = 0.0;
  for (const auto& l : loss) stats.epoch_loss.push_back(l.mean());
  return stats;
}

/// Builds one cursor per thread over `range`, clamping the thread count to
/// the number of sentences available.
template <typename Real>
std::vector<std::unique_ptr<ThreadCursor<Real>>> make_cursors(
    const std::shared_ptr<const Corpus>& corpus, const TrainingConfig& config, ByteRange range,
    std::uint64_t rank, SharedProgress& progress, const AlphaSchedule& schedule) {
  const auto ranges = partition_range(corpus->path, range.begin, range.end,
                                      static_cast<std::size_t>(config.threads), true);
  std::vector<std::unique_ptr<ThreadCursor<Real>>> cursors;
  for (std::size_t i = 0; i < ranges.size(); ++i)
    cursors.push_back(
        std::make_unique<ThreadCursor<Real>>(corpus, config, ranges[i], rank, i, progress, schedule));
  return cursors;
}

template <typename Real>
void run_to_completion(std::vector<std::unique_ptr<ThreadCursor<Real>>>& cursors,
                       EmbeddingModel<Real>& model) {
  constexpr auto kAll = std::numeric_limits<std::uint64_t>::max();
  if (cursors.size() == 1) {
    cursors[0]->run(model, kAll);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(cursors.size());
  for (auto& c : cursors) pool.emplace_back([&model, cur = c.get()] { cur->run(model, kAll); });
}

template <typename Real>
struct TrainResult {
  Vocabulary vocab;
  EmbeddingModel<Real> model;
  TrainingStats stats;
};

/// Trains on an already prepared corpus with lock-free shared updates.
template <typename Real>
TrainResult<Real> train(const std::shared_ptr<const Corpus>& corpus, const TrainingConfig& config) {
  config.validate();
  EmbeddingModel<Real> model = init_model<Real>(corpus->vocab.size(),
                                                static_cast<std::size_t>(config.dim), config.seed);
  SharedProgress progress;
  const AlphaSchedule schedule{config.alpha0,
                               trainable_words(corpus->vocab) *
                                   static_cast<std::uint64_t>(config.epochs),
                               config.alpha_floor_fraction};
  auto cursors = make_cursors<Real>(corpus, config, {0, file_size_of(corpus->path)}, 0, progress,
                                    schedule);
  const auto t0 = std::chrono::steady_clock::now();
  run_to_completion(cursors, model);
  const auto t1 = std::chrono::steady_clock::now();
  if (config.progress) std::fputc('\n', stderr);

  TrainingStats stats = collect_stats(cursors, config.epochs);
  stats.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  stats.finalize_throughput();
  return {corpus->vocab, std::move(model), std::move(stats)};
}

template <typename Real>
TrainResult<Real> train(const std::filesystem::path& corpus_path, const TrainingConfig& config) {
  return train<Real>(prepare_corpus(corpus_path, config), config);
}

}  // namespace pw2v
