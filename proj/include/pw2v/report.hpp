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

#include <unistd.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "pw2v/config.hpp"
#include "pw2v/error.hpp"

namespace pw2v {

/// Ordered "key: value" lines.
class RunReport {
 public:
  void set(std::string key, std::string value) {
    for (auto& [k, v] : lines_)
      if (k == key) {
        v = std::move(value);
        return;
      }
    lines_.emplace_back(std::move(key), std::move(value));
  }
  void set(std::string key, const char* value) { set(std::move(key), std::string(value)); }
  void set(std::string key, std::string_view value) { set(std::move(key), std::string(value)); }
  void set(std::string key, bool value) { set(std::move(key), std::string(value ? "1" : "0")); }
  void set(std::string key, double value) { set(std::move(key), format_double(value)); }
  template <typename Int>
    requires std::is_integral_v<Int>
  void set(std::string key, Int value) {
    set(std::move(key), std::to_string(value));
  }

  const std::vector<std::pair<std::string, std::string>>& lines() const noexcept { return lines_; }

  const std::string* find(std::string_view key) const {
    for (const auto& [k, v] : lines_)
      if (k == key) return &v;
    return nullptr;
  }

  void write(std::ostream& out) const {
    for (const auto& [k, v] : lines_) out << k << ": " << v << '\n';
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::kIo, "cannot write report " + path.string());
    write(out);
    if (!out) throw Error(ErrorKind::kIo, "failed writing report " + path.string());
  }

  static std::string format_double(double v) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 10);
    return ec == std::errc() ? std::string(buf, p) : std::string("nan");
  }

 private:
  std::vector<std::pair<std::string, std::string>> lines_;
};

inline void report_config(RunReport& r, const TrainingConfig& c) {
  r.set("size", c.dim);
  r.set("window", c.window);
  r.set("negative", c.negative);
  r.set("sample", c.sample);
  r.set("min_count", c.min_count);
  r.set("alpha", c.alpha0);
  r.set("iter", c.epochs);
  r.set("threads", c.threads);
  r.set("batch_size", c.batch_cap);
  r.set("kernel", to_string(c.kernel));
  r.set("seed", c.seed);
  r.set("shrink_window", c.shrink_window);
  r.set("exact_sigmoid", c.exact_sigmoid);
  r.set("distinct_negatives", c.distinct_negatives);
  r.set("gemm", to_string(c.gemm));
}

inline void report_stats(RunReport& r, const TrainingStats& s) {
  r.set("threads_used", s.threads);
  r.set("words_read", s.words_read);
  r.set("words_processed", s.words_processed);
  r.set("wall_seconds", s.wall_seconds);
  r.set("throughput_words_per_sec", s.throughput_words_per_sec);
  r.set("final_alpha", s.final_alpha);
  for (std::size_t e = 0; e < s.epoch_loss.size(); ++e)
    r.set("epoch_" + std::to_string(e + 1) + "_loss", s.epoch_loss[e]);
}

inline void report_host(RunReport& r) {
  char name[256] = {0};
  if (::gethostname(name, sizeof name - 1) != 0) name[0] = '\0';
  r.set("host", name[0] ? std::string(name) : std::string("unknown"));
  r.set("hardware_threads", std::thread::hardware_concurrency());
}

}  // namespace pw2v
