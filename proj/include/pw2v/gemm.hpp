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
#include <cstddef>
#include <string_view>

#include "pw2v/error.hpp"

#if defined(PW2V_HAVE_CBLAS)
#include <cblas.h>
#endif

namespace pw2v {

/// Dense products used by the batched kernel, all row-major:
///   gemm_abt: C(m x n) = A(m x k) * B(n x k)^T
///   gemm_ab : C(m x n) = A(m x k) * B(k x n)
///   gemm_atb: C(m x n) = A(k x m)^T * B(k x n)
///
/// kNaive is the reference triple loop. kBlocked reorders gemm_ab/gemm_atb
/// into row axpys (same per-element summation order as kNaive) and splits
/// the gemm_abt reductions across lanes. kBlas calls cblas when built with
/// PW2V_HAVE_CBLAS.
enum class GemmBackend { kNaive, kBlocked, kBlas };

inline std::string_view to_string(GemmBackend b) {
  switch (b) {
    case GemmBackend::kNaive: return "naive";
    case GemmBackend::kBlocked: return "blocked";
    case GemmBackend::kBlas: return "blas";
  }
  return "?";
}

inline GemmBackend parse_gemm_backend(std::string_view s) {
  if (s == "naive") return GemmBackend::kNaive;
  if (s == "blocked") return GemmBackend::kBlocked;
  if (s == "blas") return GemmBackend::kBlas;
  throw Error(ErrorKind::kUsage, "unknown gemm backend '" + std::string(s) + "'");
}

constexpr bool blas_available() noexcept {
#if defined(PW2V_HAVE_CBLAS)
  return true;
#else
  return false;
#endif
}

namespace detail {

template <typename Real>
void naive_abt(std::size_t m, std::size_t n, std::size_t k, const Real* a, const Real* b,
               Real* c) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Real sum = 0;
      for (std::size_t l = 0; l < k; ++l) sum += a[i * k + l] * b[j * k + l];
      c[i * n + j] = sum;
    }
}

template <typename Real>
void naive_ab(std::size_t m, std::size_t n, std::size_t k, const Real* a, const Real* b,
              Real* c) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Real sum = 0;
      for (std::size_t l = 0; l < k; ++l) sum += a[i * k + l] * b[l * n + j];
      c[i * n + j] = sum;
    }
}

template <typename Real>
void naive_atb(std::size_t m, std::size_t n, std::size_t k, const Real* a, const Real* b,
               Real* c) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Real sum = 0;
      for (std::size_t l = 0; l < k; ++l) sum += a[l * m + i] * b[l * n + j];
      c[i * n + j] = sum;
    }
}

template <typename Real>
Real lane_dot(const Real* __restrict x, const Real* __restrict y, std::size_t k) {
  constexpr std::size_t kLanes = 64 / sizeof(Real);
  Real acc[kLanes] = {};
  std::size_t l = 0;
  for (; l + kLanes <= k; l += kLanes)
    for (std::size_t q = 0; q < kLanes; ++q) acc[q] += x[l + q] * y[l + q];
  Real sum = 0;
  for (std::size_t q = 0; q < kLanes; ++q) sum += acc[q];
  for (; l < k; ++l) sum += x[l] * y[l];
  return sum;
}

template <typename Real>
void blocked_abt(std::size_t m, std::size_t n, std::size_t k, const Real* a, const Real* b,
                 Real* c) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] = lane_dot(a + i * k, b + j * k, k);
}

template <typename Real>
void axpy(std::size_t n, Real s, const Real* __restrict x, Real* __restrict y) {
  for (std::size_t j = 0; j < n; ++j) y[j] += s * x[j];
}

template <typename Real>
void blocked_ab(std::size_t m, std::size_t n, std::size_t k, const Real* a, const Real* b,
                Real* c) {
  std::fill(c, c + m * n, Real(0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t l = 0; l < k; ++l) axpy(n, a[i * k + l], b + l * n, c + i * n);
}

template <typename Real>
void blocked_atb(std::size_t m, std::size_t n, std::size_t k, const Real* a, const Real* b,
                 Real* c) {
  std::fill(c, c + m * n, Real(0));
  for (std::size_t l = 0; l < k; ++l)
    for (std::size_t i = 0; i < m; ++i) axpy(n, a[l * m + i], b + l * n, c + i * n);
}

#if defined(PW2V_HAVE_CBLAS)
inline void blas_gemm(CBLAS_TRANSPOSE ta, CBLAS_TRANSPOSE tb, std::size_t m, std::size_t n,
                      std::size_t k, const float* a, std::size_t lda, const float* b,
                      std::size_t ldb, float* c) {
  cblas_sgemm(CblasRowMajor, ta, tb, static_cast<int>(m), static_cast<int>(n),
              static_cast<int>(k), 1.0f, a, static_cast<int>(lda), b, static_cast<int>(ldb),
              0.0f, c, static_cast<int>(n));
}
inline void blas_gemm(CBLAS_TRANSPOSE ta, CBLAS_TRANSPOSE tb, std::size_t m, std::size_t n,
                      std::size_t k, const double* a, std::size_t lda, const double* b,
                      std::size_t ldb, double* c) {
  cblas_dgemm(CblasRowMajor, ta, tb, static_cast<int>(m), static_cast<int>(n),
              static_cast<int>(k), 1.0, a, static_cast<int>(lda), b, static_cast<int>(ldb), 0.0,
              c, static_cast<int>(n));
}
#endif

[[noreturn]] inline void no_blas() {
  throw Error(ErrorKind::kInvalidConfig, "built without cblas; use the naive or blocked backend");
}

}  // namespace detail

template <typename Real>
void gemm_abt(GemmBackend backend, std::size_t m, std::size_t n, std::size_t k, const Real* a,
              const Real* b, Real* c) {
  switch (backend) {
    case GemmBackend::kNaive: return detail::naive_abt(m, n, k, a, b, c);
    case GemmBackend::kBlocked: return detail::blocked_abt(m, n, k, a, b, c);
    case GemmBackend::kBlas:
#if defined(PW2V_HAVE_CBLAS)
      return detail::blas_gemm(CblasNoTrans, CblasTrans, m, n, k, a, k, b, k, c);
#else
      detail::no_blas();
#endif
  }
}

template <typename Real>
void gemm_ab(GemmBackend backend, std::size_t m, std::size_t n, std::size_t k, const Real* a,
             const Real* b, Real* c) {
  switch (backend) {
    case GemmBackend::kNaive: return detail::naive_ab(m, n, k, a, b, c);
    case GemmBackend::kBlocked: return detail::blocked_ab(m, n, k, a, b, c);
    case GemmBackend::kBlas:
#if defined(PW2V_HAVE_CBLAS)
      return detail::blas_gemm(CblasNoTrans, CblasNoTrans, m, n, k, a, k, b, n, c);
#else
      detail::no_blas();
#endif
  }
}

template <typename Real>
void gemm_atb(GemmBackend backend, std::size_t m, std::size_t n, std::size_t k, const Real* a,
              const Real* b, Real* c) {
  switch (backend) {
    case GemmBackend::kNaive: return detail::naive_atb(m, n, k, a, b, c);
    case GemmBackend::kBlocked: return detail::blocked_atb(m, n, k, a, b, c);
    case GemmBackend::kBlas:
#if defined(PW2V_HAVE_CBLAS)
      return detail::blas_gemm(CblasTrans, CblasNoTrans, m, n, k, a, m, b, n, c);
#else
      detail::no_blas();
#endif
  }
}

}  // namespace pw2v
