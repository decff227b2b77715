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

#include <cstddef>
#include <new>
#include <span>
#include <vector>

#include "pw2v/error.hpp"

namespace pw2v {

/// Dense row-major matrix. Rows are the unit of every model access, so the
/// accessors hand out spans or raw row pointers.
template <typename Real>
class RowMatrix {
 public:
  RowMatrix() = default;
  RowMatrix(std::size_t rows, std::size_t cols, Real fill = Real(0)) : rows_(rows), cols_(cols) {
    try {
      data_.assign(rows * cols, fill);
    } catch (const std::bad_alloc&) {
      throw Error(ErrorKind::kResource, "cannot allocate " + std::to_string(rows) + "x" +
                                            std::to_string(cols) + " matrix");
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  Real* row_ptr(std::size_t r) noexcept { return data_.data() + r * cols_; }
  const Real* row_ptr(std::size_t r) const noexcept { return data_.data() + r * cols_; }
  std::span<Real> row(std::size_t r) noexcept { return {row_ptr(r), cols_}; }
  std::span<const Real> row(std::size_t r) const noexcept { return {row_ptr(r), cols_}; }

  Real& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  Real operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<Real> data() noexcept { return data_; }
  std::span<const Real> data() const noexcept { return data_; }

  friend bool operator==(const RowMatrix&, const RowMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Real> data_;
};

}  // namespace pw2v
