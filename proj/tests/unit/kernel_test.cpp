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

#include <cmath>
#include <set>
#include <vector>

#include "pw2v/gemm.hpp"
#include "pw2v/kernel_batched.hpp"
#include "pw2v/kernel_scalar.hpp"
#include "pw2v/negative_table.hpp"
#include "pw2v/random.hpp"

namespace pw2v {
namespace {

// Replays a fixed list of negatives.
struct FixedNegatives {
  std::vector<WordId> seq;
  std::size_t pos = 0;
  std::size_t calls = 0;
  void draw(WordId, std::span<WordId> out) {
    ++calls;
    for (auto& w : out) w = seq[pos++ % seq.size()];
  }
};

template <typename Real>
EmbeddingModel<Real> random_model(std::size_t V, std::size_t D, std::uint64_t seed,
                                  double scale = 0.5) {
  EmbeddingModel<Real> m{RowMatrix<Real>(V, D), RowMatrix<Real>(V, D)};
  Rng rng(seed);
  for (Real& v : m.m_in.data()) v = static_cast<Real>((uniform_unit(rng) - 0.5) * 2 * scale);
  for (Real& v : m.m_out.data()) v = static_cast<Real>((uniform_unit(rng) - 0.5) * 2 * scale);
  return m;
}

Vocabulary uniform_vocab(std::size_t V) {
  std::vector<VocabEntry> e;
  for (std::size_t i = 0; i < V; ++i) e.push_back({"w" + std::to_string(i), 100});
  return Vocabulary(e, false);
}

TEST(ScalarKernel, HandExecutedExample) {
  EmbeddingModel<double> m{RowMatrix<double>(3, 2), RowMatrix<double>(3, 2)};
  m.m_in(0, 0) = 1;
  m.m_out(1, 0) = 1;
  m.m_out(2, 1) = 1;
  FixedNegatives neg{{2}};
  ScalarKernel<double> k(2, 1);
  k.process(m, WindowContext{1, {0}}, neg, 0.1, Sigmoid(true));
  // Frozen from the high-precision oracle in tests/oracles.
  EXPECT_NEAR(m.m_in(0, 0), 1.0268941421369995, 1e-15);
  EXPECT_NEAR(m.m_in(0, 1), -0.05, 1e-15);
  EXPECT_NEAR(m.m_out(1, 0), 1.0268941421369995, 1e-15);
  EXPECT_EQ(m.m_out(1, 1), 0.0);
  EXPECT_NEAR(m.m_out(2, 0), -0.05, 1e-15);
  EXPECT_NEAR(m.m_out(2, 1), 1.0, 1e-15);
}

TEST(ScalarKernel, ZeroInputRow) {
  auto m = random_model<double>(4, 3, 1);
  for (double& v : m.m_in.row(0)) v = 0;
  const auto before = m;
  FixedNegatives neg{{2}};
  ScalarKernel<double> k(3, 1);
  const double alpha = 0.05;
  k.process(m, WindowContext{1, {0}}, neg, alpha, Sigmoid(true));
  EXPECT_EQ(m.m_out.row(1)[0], before.m_out.row(1)[0]);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(m.m_out(1, j), before.m_out(1, j));
    const double want =
        alpha * (0.5 * before.m_out(1, j) + (0 - 0.5) * before.m_out(2, j));
    EXPECT_NEAR(m.m_in(0, j), want, 1e-15);
  }
}

TEST(Kernels, ZeroStepLeavesModel) {
  auto m = random_model<double>(10, 4, 2);
  const auto before = m;
  FixedNegatives neg{{3, 4}};
  ScalarKernel<double> s(4, 2);
  const WindowContext ctx{1, {0, 2, 5}};
  s.process(m, ctx, neg, 0.0, Sigmoid(true));
  s.process(m, ctx, neg, 0.0, Sigmoid(true));
  EXPECT_EQ(m, before);
  BatchKernel<double> b(4, 4, 2);
  const std::vector<WordId> out{1, 3, 4};
  b.process(m, Minibatch{ctx.inputs, out}, 0.0, Sigmoid(true));
  EXPECT_EQ(m, before);
}

TEST(Kernels, OnlyTouchedRowsChange) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const std::size_t V = 30, D = 6;
    const int K = 1 + static_cast<int>(uniform_below(rng, 4));
    const auto table = NegativeTable(uniform_vocab(V), 0.75, 3000);
    const WordId target = static_cast<WordId>(uniform_below(rng, V));
    WindowContext ctx{target, {}};
    for (std::size_t i = 0, n = 1 + uniform_below(rng, 10); i < n; ++i)
      ctx.inputs.push_back(static_cast<WordId>(uniform_below(rng, V)));

    for (int kernel = 0; kernel < 2; ++kernel) {
      auto m = random_model<float>(V, D, seed);
      const auto before = m;
      Rng nrng(seed + 100);
      struct Recording {
        TableNegatives inner;
        std::set<WordId> seen;
        void draw(WordId t, std::span<WordId> out) {
          inner.draw(t, out);
          seen.insert(out.begin(), out.end());
        }
      } neg{TableNegatives(table, nrng), {}};
      if (kernel == 0) {
        ScalarKernel<float> k(D, K);
        k.process(m, ctx, neg, 0.025f, Sigmoid());
      } else {
        BatchKernel<float> k(D, 4, K);
        std::vector<WordId> outs;
        assemble_batches(ctx, 4, K, neg, outs,
                         [&](const Minibatch& mb) { k.process(m, mb, 0.025f, Sigmoid()); });
      }
      const std::set<WordId> ins(ctx.inputs.begin(), ctx.inputs.end());
      for (WordId w = 0; w < V; ++w) {
        if (!ins.contains(w))
          for (std::size_t j = 0; j < D; ++j) EXPECT_EQ(m.m_in(w, j), before.m_in(w, j));
        if (w != target && !neg.seen.contains(w))
          for (std::size_t j = 0; j < D; ++j) EXPECT_EQ(m.m_out(w, j), before.m_out(w, j));
      }
      EXPECT_TRUE(m.all_finite());
    }
  }
}

// log sigma(s * <u, v>) for s = +1 (positive pair) or -1 (negative pair).
double pair_objective(std::span<const double> u, std::span<const double> v, bool positive) {
  double dot = 0;
  for (std::size_t j = 0; j < u.size(); ++j) dot += u[j] * v[j];
  return std::log(sigmoid(positive ? dot : -dot));
}

TEST(Kernels, UpdatesMatchFiniteDifferences) {
  const std::size_t V = 20, D = 5;
  const double alpha = 0.01, h = 1e-5;
  Rng rng(77);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto m = random_model<double>(V, D, 1000 + trial, 1.0);
    const WordId in = static_cast<WordId>(uniform_below(rng, V));
    WordId out = static_cast<WordId>(uniform_below(rng, V));
    WordId other = static_cast<WordId>((out + 1 + uniform_below(rng, V - 1)) % V);
    const bool positive = trial % 2 == 0;
    // The checked pair is the target for label 1 and the negative for label 0.
    const WordId target = positive ? out : other;
    const WordId negative = positive ? other : out;
    const auto before = m;
    FixedNegatives neg{{negative}};
    ScalarKernel<double> k(D, 1);
    k.process(m, WindowContext{target, {in}}, neg, alpha, Sigmoid(true));

    std::vector<double> u(before.m_in.row(in).begin(), before.m_in.row(in).end());
    std::vector<double> v(before.m_out.row(out).begin(), before.m_out.row(out).end());
    for (std::size_t j = 0; j < D; ++j) {
      auto vp = v, vm = v;
      vp[j] += h;
      vm[j] -= h;
      const double numeric =
          (pair_objective(u, vp, positive) - pair_objective(u, vm, positive)) / (2 * h);
      const double analytic = (m.m_out(out, j) - before.m_out(out, j)) / alpha;
      const double rel = std::abs(analytic - numeric) / std::max(std::abs(numeric), 1e-3);
      worst = std::max(worst, rel);
    }
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(BatchKernel, ErrorFactorsAreGradients) {
  auto m = random_model<double>(12, 4, 5, 1.0);
  BatchKernel<double> k(4, 3, 2, GemmBackend::kNaive);
  const std::vector<WordId> ins{0, 3, 7}, outs{2, 5, 9};
  const auto before = m;
  k.process(m, Minibatch{ins, outs}, 0.5, Sigmoid(true));
  ASSERT_EQ(k.scores().size(), 9u);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t c = 0; c < 3; ++c) {
      double dot = 0;
      for (std::size_t j = 0; j < 4; ++j) dot += before.m_in(ins[i], j) * before.m_out(outs[c], j);
      EXPECT_NEAR(k.scores()[i * 3 + c], dot, 1e-15);
      const double label = c == 0 ? 1 : 0;
      EXPECT_NEAR(k.errors()[i * 3 + c] / 0.5, label - sigmoid(dot), 1e-15);
    }
}

TEST(AssembleBatches, ChunkingAndFreshNegatives) {
  FixedNegatives neg{{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15}};
  WindowContext four{0, {1, 2, 3, 4}};
  auto b = assemble_batches(four, 10, 5, neg);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b[0].inputs.size(), 4u);
  EXPECT_EQ(b[0].outputs.size(), 6u);
  EXPECT_EQ(b[0].outputs[0], 0u);

  WindowContext many{0, std::vector<WordId>(25, 3)};
  neg.calls = 0;
  b = assemble_batches(many, 10, 3, neg);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0].inputs.size(), 10u);
  EXPECT_EQ(b[1].inputs.size(), 10u);
  EXPECT_EQ(b[2].inputs.size(), 5u);
  EXPECT_EQ(neg.calls, 3u);
  EXPECT_NE(b[0].outputs, b[1].outputs);
  for (const auto& mb : b) EXPECT_EQ(mb.outputs.size(), 4u);
}

TEST(BatchKernel, DuplicateInputsAccumulate) {
  auto m = random_model<double>(6, 3, 8);
  auto single = m;
  const std::vector<WordId> outs{1, 2, 4};
  BatchKernel<double> k(3, 2, 2, GemmBackend::kNaive);
  const std::vector<WordId> dup{0, 0};
  k.process(m, Minibatch{dup, outs}, 0.1, Sigmoid(true));
  BatchKernel<double> k1(3, 1, 2, GemmBackend::kNaive);
  const std::vector<WordId> one{0};
  const auto start = single;
  k1.process(single, Minibatch{one, outs}, 0.1, Sigmoid(true));
  for (std::size_t j = 0; j < 3; ++j) {
    const double delta = single.m_in(0, j) - start.m_in(0, j);
    EXPECT_NEAR(m.m_in(0, j) - start.m_in(0, j), 2 * delta, 1e-15);
    for (WordId o : outs) {
      const double d1 = single.m_out(o, j) - start.m_out(o, j);
      EXPECT_NEAR(m.m_out(o, j) - start.m_out(o, j), 2 * d1, 1e-15);
    }
  }
}

TEST(BatchKernel, RejectsOversizedBatch) {
  auto m = random_model<float>(6, 3, 8);
  BatchKernel<float> k(3, 1, 1);
  const std::vector<WordId> ins{0, 1}, outs{2, 3};
  EXPECT_THROW(k.process(m, Minibatch{ins, outs}, 0.1f, Sigmoid()), Error);
}

// Randomized contexts through both kernels with rigged negatives.
template <typename Real>
double oracle_gap(std::uint64_t seed, int contexts, GemmBackend backend) {
  const std::size_t V = 50, D = 8;
  const int K = 3;
  const auto table = NegativeTable(uniform_vocab(V), 0.75, 5000);
  auto a = random_model<Real>(V, D, seed, 0.5);
  auto b = a;
  Rng ctx_rng(seed), ra(seed + 1), rb(seed + 1);
  TableNegatives na(table, ra, true), nb(table, rb, true);
  ScalarKernel<Real> scalar(D, K);
  BatchKernel<Real> batched(D, 1, K, backend);
  std::vector<WordId> outs;
  const Sigmoid sig(true);
  for (int c = 0; c < contexts; ++c) {
    WindowContext ctx{static_cast<WordId>(uniform_below(ctx_rng, V)), {}};
    for (std::size_t i = 0, n = 1 + uniform_below(ctx_rng, 10); i < n; ++i)
      ctx.inputs.push_back(static_cast<WordId>(uniform_below(ctx_rng, V)));
    const Real alpha = static_cast<Real>(0.01 + 0.05 * uniform_unit(ctx_rng));
    scalar.process(a, ctx, na, alpha, sig);
    assemble_batches(ctx, 1, K, nb, outs,
                     [&](const Minibatch& mb) { batched.process(b, mb, alpha, sig); });
  }
  double worst = 0;
  for (std::size_t i = 0; i < a.m_in.data().size(); ++i) {
    for (auto [x, y] : {std::pair{a.m_in.data()[i], b.m_in.data()[i]},
                        std::pair{a.m_out.data()[i], b.m_out.data()[i]}}) {
      const double den = std::max(std::abs(static_cast<double>(x)), 1e-6);
      worst = std::max(worst, std::abs(static_cast<double>(x) - static_cast<double>(y)) / den);
    }
  }
  return worst;
}

TEST(Kernels, BatchOfOneMatchesScalar) {
  EXPECT_EQ(oracle_gap<double>(1, 1000, GemmBackend::kNaive), 0.0);
  EXPECT_LT(oracle_gap<double>(2, 1000, GemmBackend::kBlocked), 1e-12);
  EXPECT_LE(oracle_gap<float>(3, 1000, GemmBackend::kNaive), 1e-5);
  EXPECT_LE(oracle_gap<float>(4, 1000, GemmBackend::kBlocked), 1e-5);
}

template <typename Real>
void check_gemm_backends(GemmBackend other, double tol) {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t m = 1 + uniform_below(rng, 20), n = 1 + uniform_below(rng, 9),
                      k = 1 + uniform_below(rng, 70);
    std::vector<Real> a(m * k), b(n * k), e(m * n), c1(m * n), c2(m * n), d1(m * k), d2(m * k),
        t1(n * k), t2(n * k);
    for (auto* v : {&a, &b, &e})
      for (Real& x : *v) x = static_cast<Real>(uniform_unit(rng) - 0.5);
    gemm_abt(GemmBackend::kNaive, m, n, k, a.data(), b.data(), c1.data());
    gemm_abt(other, m, n, k, a.data(), b.data(), c2.data());
    gemm_ab(GemmBackend::kNaive, m, k, n, e.data(), b.data(), d1.data());
    gemm_ab(other, m, k, n, e.data(), b.data(), d2.data());
    gemm_atb(GemmBackend::kNaive, n, k, m, e.data(), a.data(), t1.data());
    gemm_atb(other, n, k, m, e.data(), a.data(), t2.data());
    for (std::size_t i = 0; i < c1.size(); ++i) EXPECT_NEAR(c1[i], c2[i], tol);
    for (std::size_t i = 0; i < d1.size(); ++i) EXPECT_NEAR(d1[i], d2[i], tol);
    for (std::size_t i = 0; i < t1.size(); ++i) EXPECT_NEAR(t1[i], t2[i], tol);
  }
}

TEST(Gemm, BackendsAgree) {
  check_gemm_backends<double>(GemmBackend::kBlocked, 1e-12);
  check_gemm_backends<float>(GemmBackend::kBlocked, 1e-5);
  if (blas_available()) {
    check_gemm_backends<double>(GemmBackend::kBlas, 1e-12);
    check_gemm_backends<float>(GemmBackend::kBlas, 1e-5);
  }
  EXPECT_EQ(parse_gemm_backend("naive"), GemmBackend::kNaive);
  EXPECT_THROW(parse_gemm_backend("fast"), Error);
}

}  // namespace
}  // namespace pw2v
