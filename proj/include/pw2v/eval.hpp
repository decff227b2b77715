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
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pw2v/error.hpp"
#include "pw2v/gemm.hpp"
#include "pw2v/model_io.hpp"

namespace pw2v {

template <typename Real>
double cosine(std::span<const Real> u, std::span<const Real> v) {
  if (u.size() != v.size()) throw Error(ErrorKind::kDimensionMismatch, "cosine of unequal lengths");
  double uv = 0, uu = 0, vv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += static_cast<double>(u[i]) * static_cast<double>(v[i]);
    uu += static_cast<double>(u[i]) * static_cast<double>(u[i]);
    vv += static_cast<double>(v[i]) * static_cast<double>(v[i]);
  }
  if (uu == 0 || vv == 0) throw Error(ErrorKind::kZeroVector, "cosine of a zero vector");
  return std::clamp(uv / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

/// 1-based ranks; tied values share the mean of the ranks they span.
inline std::vector<double> fractional_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0)
    throw Error(ErrorKind::kUndefinedCorrelation, "correlation undefined for constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Spearman's rho: Pearson correlation of fractional ranks.
inline double spearman(std::span<const double> pred, std::span<const double> gold) {
  if (pred.size() != gold.size())
    throw Error(ErrorKind::kLengthMismatch, "spearman inputs differ in length");
  if (pred.size() < 2) throw Error(ErrorKind::kLengthMismatch, "spearman needs at least 2 items");
  const auto rp = fractional_ranks(pred);
  const auto rg = fractional_ranks(gold);
  return pearson(rp, rg);
}

struct SimilarityPair {
  std::string word_a;
  std::string word_b;
  double human_score = 0.0;
};

struct AnalogyQuestion {
  std::string a, b, c, d;
  std::string section;
};

namespace detail {

inline std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_token_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_token_space(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::ifstream open_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return in;
}

}  // namespace detail

/// "word1 word2 score" per line, whitespace or tab separated. Blank lines and
/// '#' comments are skipped; a leading line that does not parse is taken as
/// a header.
inline std::vector<SimilarityPair> read_similarity_pairs(std::istream& in) {
  std::vector<SimilarityPair> out;
  std::string line;
  std::size_t lineno = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto f = detail::fields(line);
    if (f.empty() || f[0].front() == '#') continue;
    const auto score = f.size() == 3 ? detail::parse_double(f[2]) : std::nullopt;
    if (!score) {
      if (!seen_data) {
        seen_data = true;
        continue;
      }
      throw Error(ErrorKind::kParse, "similarity line " + std::to_string(lineno) +
                                         ": expected 'word word score'");
    }
    seen_data = true;
    out.push_back({std::string(f[0]), std::string(f[1]), *score});
  }
  return out;
}

inline std::vector<SimilarityPair> read_similarity_pairs(const std::filesystem::path& path) {
  auto in = detail::open_text(path);
  return read_similarity_pairs(in);
}

/// ": section" headers followed by "a b c d" lines.
inline std::vector<AnalogyQuestion> read_analogy_questions(std::istream& in) {
  std::vector<AnalogyQuestion> out;
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto f = detail::fields(line);
    if (f.empty()) continue;
    if (f[0] == ":" || f[0].front() == ':') {
      const auto pos = line.find(':');
      const auto rest = detail::fields(std::string_view(line).substr(pos + 1));
      section = rest.empty() ? std::string() : std::string(rest[0]);
      continue;
    }
    if (f.size() != 4)
      throw Error(ErrorKind::kParse,
                  "analogy line " + std::to_string(lineno) + ": expected 4 words");
    out.push_back({std::string(f[0]), std::string(f[1]), std::string(f[2]), std::string(f[3]),
                   section});
  }
  return out;
}

inline std::vector<AnalogyQuestion> read_analogy_questions(const std::filesystem::path& path) {
  auto in = detail::open_text(path);
  return read_analogy_questions(in);
}

struct SimilarityResult {
  double score = 0.0;  // rho x 100
  std::size_t used = 0;
  std::size_t skipped = 0;
};

inline SimilarityResult eval_similarity(const WordVectors& wv,
                                        std::span<const SimilarityPair> pairs) {
  std::vector<double> pred, gold;
  SimilarityResult r;
  for (const auto& p : pairs) {
    const auto a = wv.find(p.word_a);
    const auto b = wv.find(p.word_b);
    if (!a || !b) {
      ++r.skipped;
      continue;
    }
    pred.push_back(cosine<float>(wv.vectors.row(*a), wv.vectors.row(*b)));
    gold.push_back(p.human_score);
  }
  r.used = pred.size();
  if (r.used == 0) throw Error(ErrorKind::kAllSkipped, "every similarity pair was skipped");
  r.score = 100.0 * spearman(pred, gold);
  return r;
}

inline SimilarityResult eval_similarity(const WordVectors& wv,
                                        const std::filesystem::path& pairs_file) {
  const auto pairs = read_similarity_pairs(pairs_file);
  return eval_similarity(wv, pairs);
}

struct AnalogySection {
  std::string name;
  std::size_t correct = 0;
  std::size_t answered = 0;
  std::size_t skipped = 0;

  double accuracy() const {
    return answered ? 100.0 * static_cast<double>(correct) / static_cast<double>(answered) : 0.0;
  }
};

struct AnalogyResult {
  double accuracy = 0.0;  // percent of answered questions
  std::size_t correct = 0;
  std::size_t answered = 0;
  std::size_t skipped = 0;
  std::vector<AnalogySection> sections;  // file order
  std::vector<WordId> predictions;       // per answered question, in file order
};

/// Unit-normalizes each row in double precision; zero rows stay zero.
inline RowMatrix<float> normalized_rows(const RowMatrix<float>& m, std::size_t rows) {
  RowMatrix<float> out(rows, m.cols());
  for (std::size_t i = 0; i < rows; ++i) {
    const auto src = m.row(i);
    double ss = 0;
    for (const float v : src) ss += static_cast<double>(v) * static_cast<double>(v);
    if (ss == 0) continue;
    const double inv = 1.0 / std::sqrt(ss);
    auto dst = out.row(i);
    for (std::size_t j = 0; j < src.size(); ++j)
      dst[j] = static_cast<float>(static_cast<double>(src[j]) * inv);
  }
  return out;
}

/// 3CosAdd over unit rows: argmax_x cos(x, b - a + c) among the first
/// `max_vocab` words (0: all), excluding a, b and c. Ties go to the lower id.
/// Questions with any word outside that range are skipped.
inline AnalogyResult eval_analogy(const WordVectors& wv,
                                  std::span<const AnalogyQuestion> questions,
                                  std::size_t max_vocab = 0) {
  const std::size_t cap =
      max_vocab == 0 ? wv.size() : std::min<std::size_t>(max_vocab, wv.size());
  const std::size_t d = wv.dim();
  const RowMatrix<float> unit = normalized_rows(wv.vectors, cap);

  AnalogyResult r;
  auto lookup = [&](const std::string& w) -> std::optional<WordId> {
    const auto id = wv.find(w);
    if (!id || *id >= cap) return std::nullopt;
    return id;
  };

  struct Pending {
    WordId a, b, c, d;
    std::size_t section;
  };
  std::vector<Pending> pending;
  for (const auto& q : questions) {
    if (r.sections.empty() || r.sections.back().name != q.section)
      r.sections.push_back({q.section});
    const auto a = lookup(q.a), b = lookup(q.b), c = lookup(q.c), dd = lookup(q.d);
    if (!a || !b || !c || !dd) {
      ++r.skipped;
      ++r.sections.back().skipped;
      continue;
    }
    pending.push_back({*a, *b, *c, *dd, r.sections.size() - 1});
  }

  constexpr std::size_t kChunk = 64;
  std::vector<float> query(kChunk * d), scores(kChunk * cap);
  for (std::size_t start = 0; start < pending.size(); start += kChunk) {
    const std::size_t n = std::min(kChunk, pending.size() - start);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = pending[start + i];
      const auto ra = unit.row(p.a), rb = unit.row(p.b), rc = unit.row(p.c);
      for (std::size_t j = 0; j < d; ++j) query[i * d + j] = rb[j] - ra[j] + rc[j];
    }
    if (cap > 0) gemm_abt(GemmBackend::kBlocked, n, cap, d, query.data(), unit.data().data(),
                          scores.data());
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = pending[start + i];
      const float* s = scores.data() + i * cap;
      std::size_t best = cap;
      for (std::size_t x = 0; x < cap; ++x) {
        if (x == p.a || x == p.b || x == p.c) continue;
        if (best == cap || s[x] > s[best]) best = x;
      }
      auto& sec = r.sections[p.section];
      ++sec.answered;
      ++r.answered;
      r.predictions.push_back(static_cast<WordId>(best));
      if (best == p.d) {
        ++sec.correct;
        ++r.correct;
      }
    }
  }
  r.accuracy = r.answered ? 100.0 * static_cast<double>(r.correct) / static_cast<double>(r.answered)
                          : 0.0;
  return r;
}

inline AnalogyResult eval_analogy(const WordVectors& wv,
                                  const std::filesystem::path& questions_file,
                                  std::size_t max_vocab = 0) {
  const auto questions = read_analogy_questions(questions_file);
  return eval_analogy(wv, questions, max_vocab);
}

}  // namespace pw2v
