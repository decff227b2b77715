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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include "pw2v/eval.hpp"
#include "test_util.hpp"

namespace pw2v {
namespace {

using testing::TempDir;

WordVectors make_vectors(const std::vector<std::string>& tokens,
                         const std::vector<std::vector<float>>& rows) {
  WordVectors wv;
  wv.tokens = tokens;
  wv.vectors = RowMatrix<float>(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy(rows[i].begin(), rows[i].end(), wv.vectors.row(i).begin());
  wv.reindex();
  return wv;
}

WordVectors random_vectors(std::size_t V, std::size_t D, std::uint64_t seed) {
  Rng rng(seed);
  WordVectors wv;
  for (std::size_t i = 0; i < V; ++i) wv.tokens.push_back("t" + std::to_string(i));
  wv.vectors = RowMatrix<float>(V, D);
  for (float& v : wv.vectors.data()) v = static_cast<float>(uniform_unit(rng) - 0.5);
  wv.reindex();
  return wv;
}

TEST(Cosine, Examples) {
  const std::vector<double> u{1, 0}, v{1, 1}, w{0, 3}, z{0, 0};
  EXPECT_DOUBLE_EQ(cosine<double>(u, u), 1.0);
  EXPECT_DOUBLE_EQ(cosine<double>(u, w), 0.0);
  EXPECT_NEAR(cosine<double>(u, v), 0.70710678118654752, 1e-15);
  try {
    cosine<double>(u, z);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kZeroVector);
  }
}

TEST(Spearman, Examples) {
  const std::vector<double> a{1, 2, 3, 4}, rev{4, 3, 2, 1}, swap{1, 3, 2, 4};
  EXPECT_DOUBLE_EQ(spearman(a, a), 1.0);
  EXPECT_DOUBLE_EQ(spearman(a, rev), -1.0);
  EXPECT_NEAR(spearman(a, swap), 0.8, 1e-15);
  auto kind_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kUsage;
  };
  const std::vector<double> three{1, 2, 3}, one{1}, flat{2, 2, 2, 2};
  EXPECT_EQ(kind_of([&] { spearman(a, three); }), ErrorKind::kLengthMismatch);
  EXPECT_EQ(kind_of([&] { spearman(one, one); }), ErrorKind::kLengthMismatch);
  EXPECT_EQ(kind_of([&] { spearman(a, flat); }), ErrorKind::kUndefinedCorrelation);
}

double closed_form_rho(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = fractional_ranks(x), ry = fractional_ranks(y);
  double d2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  const double n = static_cast<double>(x.size());
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

// Rank of each value by counting; ties average.
std::vector<double> brute_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (const double w : v) {
      less += w < v[i];
      equal += w == v[i];
    }
    r[i] = less + (equal + 1) / 2;
  }
  return r;
}

TEST(Spearman, TieFreeMatchesClosedForm) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + uniform_below(rng, 60);
    std::vector<double> x(n), y(n);
    std::iota(x.begin(), x.end(), 0.0);
    std::iota(y.begin(), y.end(), 0.0);
    for (std::size_t i = n; i > 1; --i) std::swap(y[i - 1], y[uniform_below(rng, i)]);
    for (auto& v : x) v = v * 1.5 + 0.25;
    EXPECT_NEAR(spearman(x, y), closed_form_rho(x, y), 1e-12);
    EXPECT_EQ(spearman(x, y), spearman(y, x));
  }
}

TEST(Spearman, TiesUseFractionalRanks) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + uniform_below(rng, 40);
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = static_cast<double>(uniform_below(rng, 5));
    for (auto& v : y) v = static_cast<double>(uniform_below(rng, 7));
    EXPECT_EQ(fractional_ranks(x), brute_ranks(x));
    const auto rx = brute_ranks(x), ry = brute_ranks(y);
    bool flat = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; }) ||
                std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
    if (flat) {
      EXPECT_THROW(spearman(x, y), Error);
      continue;
    }
    EXPECT_NEAR(spearman(x, y), pearson(rx, ry), 1e-15);
    EXPECT_NEAR(spearman(x, y), spearman(y, x), 1e-15);
  }
}

TEST(EvalSimilarity, HandBuiltOrdering) {
  // Angles increase along the pairs, so cosines fall as gold scores fall.
  std::vector<std::string> tokens;
  std::vector<std::vector<float>> rows;
  std::string file = "# comment\nWord 1\tWord 2\tHuman (mean)\n";
  for (int i = 0; i < 5; ++i) {
    const double ang = 0.2 * (i + 1);
    tokens.push_back("base" + std::to_string(i));
    rows.push_back({1, 0});
    tokens.push_back("far" + std::to_string(i));
    rows.push_back({static_cast<float>(std::cos(ang)), static_cast<float>(std::sin(ang))});
    file += "base" + std::to_string(i) + "\tfar" + std::to_string(i) + "\t" +
            std::to_string(10 - i) + "\n";
  }
  file += "base0 missing 3.0\n";
  const auto wv = make_vectors(tokens, rows);
  std::istringstream in(file);
  const auto pairs = read_similarity_pairs(in);
  ASSERT_EQ(pairs.size(), 6u);
  const auto r = eval_similarity(wv, pairs);
  EXPECT_DOUBLE_EQ(r.score, 100.0);
  EXPECT_EQ(r.used, 5u);
  EXPECT_EQ(r.skipped, 1u);

  std::istringstream none("a b 1\nc d 2\n");
  const auto unknown = read_similarity_pairs(none);
  try {
    eval_similarity(wv, unknown);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kAllSkipped);
  }
  std::istringstream bad("a b 1\nc d\n");
  EXPECT_THROW(read_similarity_pairs(bad), Error);
}

TEST(EvalAnalogy, ConstructedParallelogram) {
  const auto wv = make_vectors({"a", "b", "c", "d", "e"},
                               {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {-1, 1, 1}, {0.5f, 0.5f, 0}});
  // Unit rows: b - a + c = (-1, 1, 1), parallel to d.
  std::istringstream in(": toy\na b c d\na b c zz\n: more\nA B C D\n");
  const auto qs = read_analogy_questions(in);
  ASSERT_EQ(qs.size(), 3u);
  EXPECT_EQ(qs[0].section, "toy");
  const auto r = eval_analogy(wv, qs);
  EXPECT_DOUBLE_EQ(r.accuracy, 100.0);
  EXPECT_EQ(r.answered, 2u);
  EXPECT_EQ(r.skipped, 1u);
  ASSERT_EQ(r.sections.size(), 2u);
  EXPECT_EQ(r.sections[0].skipped, 1u);
  EXPECT_EQ(r.sections[1].correct, 1u);

  const auto capped = eval_analogy(wv, qs, 3);
  EXPECT_EQ(capped.answered, 0u);
  EXPECT_EQ(capped.skipped, 3u);

  std::istringstream bad(": s\na b c\n");
  EXPECT_THROW(read_analogy_questions(bad), Error);
}

TEST(EvalAnalogy, ExcludesQuestionWords) {
  // Without exclusion, c itself would win.
  const auto wv = make_vectors({"a", "b", "c", "d"}, {{1, 0}, {1, 0.01f}, {0, 1}, {0.3f, 1}});
  const std::vector<AnalogyQuestion> q{{"a", "b", "c", "d", "s"}};
  const auto r = eval_analogy(wv, q);
  EXPECT_EQ(r.predictions.at(0), 3u);
}

TEST(Eval, ScaleInvariance) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto wv = random_vectors(80, 10, seed);
    auto scaled = wv;
    const float s = static_cast<float>(0.1 + 10 * uniform_unit(rng));
    for (float& v : scaled.vectors.data()) v *= s;
    scaled.reindex();

    std::vector<SimilarityPair> pairs;
    std::vector<AnalogyQuestion> qs;
    auto t = [&] { return "t" + std::to_string(uniform_below(rng, 80)); };
    std::set<std::pair<std::string, std::string>> seen;
    while (pairs.size() < 60) {
      auto a = t(), b = t();
      if (a == b) continue;
      if (b < a) std::swap(a, b);
      if (!seen.insert({a, b}).second) continue;
      pairs.push_back({a, b, uniform_unit(rng) * 10});
    }
    for (int i = 0; i < 60; ++i) qs.push_back({t(), t(), t(), t(), "s"});
    EXPECT_NEAR(eval_similarity(wv, pairs).score, eval_similarity(scaled, pairs).score, 1e-9);
    EXPECT_EQ(eval_analogy(wv, qs).predictions, eval_analogy(scaled, qs).predictions);
  }
}

TEST(Eval, Deterministic) {
  const auto wv = random_vectors(300, 16, 4);
  Rng rng(5);
  std::vector<AnalogyQuestion> qs;
  for (int i = 0; i < 200; ++i) {
    auto t = [&] { return "t" + std::to_string(uniform_below(rng, 300)); };
    qs.push_back({t(), t(), t(), t(), "s"});
  }
  EXPECT_EQ(eval_analogy(wv, qs).predictions, eval_analogy(wv, qs).predictions);
}

TEST(Eval, BundledTestSetsParse) {
  const std::filesystem::path data = PW2V_DATA_DIR;
  const auto pairs = read_similarity_pairs(data / "wordsim353.tsv");
  EXPECT_EQ(pairs.size(), 353u);
  const auto qs = read_analogy_questions(data / "questions-words.txt");
  EXPECT_EQ(qs.size(), 19544u);
  std::vector<std::string> sections;
  for (const auto& q : qs)
    if (sections.empty() || sections.back() != q.section) sections.push_back(q.section);
  EXPECT_EQ(sections.size(), 14u);
}

}  // namespace
}  // namespace pw2v
