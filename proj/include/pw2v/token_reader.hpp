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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "pw2v/error.hpp"

namespace pw2v {

constexpr bool is_token_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

inline std::uint64_t file_size_of(const std::filesystem::path& path) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot stat " + path.string() + ": " + ec.message());
  return size;
}

/// Whitespace tokenizer over the byte range [begin, end) of a file.
///
/// A token belongs to the range when its first byte does, so a range that
/// starts inside a token skips that token's tail. Reads go through a large buffer so a whole
/// corpus pass costs one sequential scan.
class TokenReader {
 public:
  struct Token {
    std::string_view text;
    std::uint64_t offset = 0;  // byte offset of the first character
    bool line_start = false;   // a newline (or the range start) precedes it
  };

  static constexpr std::size_t kBufferSize = std::size_t{1} << 20;

  TokenReader(const std::filesystem::path& path, std::uint64_t begin, std::uint64_t end)
      : path_(path), begin_(begin), end_(end), buffer_(kBufferSize) {
    in_.open(path, std::ios::binary);
    if (!in_) throw Error(ErrorKind::kIo, "cannot open " + path.string());
    rewind();
  }

  explicit TokenReader(const std::filesystem::path& path)
      : TokenReader(path, 0, file_size_of(path)) {}

  void rewind() {
    in_.clear();
    skip_partial_ = false;
    if (begin_ > 0) {
      in_.seekg(static_cast<std::streamoff>(begin_ - 1));
      char prev = ' ';
      if (in_.get(prev)) skip_partial_ = !is_token_space(prev);
      in_.clear();
    }
    in_.seekg(static_cast<std::streamoff>(begin_));
    if (!in_) throw Error(ErrorKind::kIo, "cannot seek in " + path_.string());
    buffer_offset_ = begin_;
    pos_ = len_ = 0;
    eof_ = false;
    done_ = false;
    pending_line_start_ = true;
    newlines_ = 0;
  }

  bool next(Token& token) {
    if (done_) return false;
    while (skip_partial_) {
      if (pos_ == len_ && !refill()) return finish();
      if (is_token_space(buffer_[pos_])) skip_partial_ = false;
      else ++pos_;
    }
    // Skip separators.
    for (;;) {
      if (pos_ == len_ && !refill()) return finish();
      const char c = buffer_[pos_];
      if (!is_token_space(c)) break;
      if (buffer_offset_ + pos_ >= end_) return finish();
      if (c == '\n') {
        ++newlines_;
        pending_line_start_ = true;
      }
      ++pos_;
    }
    token.offset = buffer_offset_ + pos_;
    if (token.offset >= end_) return finish();
    token.line_start = pending_line_start_;
    pending_line_start_ = false;

    const std::size_t start = pos_;
    while (pos_ < len_ && !is_token_space(buffer_[pos_])) ++pos_;
    if (pos_ < len_ || eof_) {
      token.text = std::string_view(buffer_.data() + start, pos_ - start);
      return true;
    }
    // Token runs past the buffer: spill and keep reading.
    spill_.assign(buffer_.data() + start, pos_ - start);
    for (;;) {
      if (!refill()) break;
      std::size_t i = 0;
      while (i < len_ && !is_token_space(buffer_[i])) ++i;
      spill_.append(buffer_.data(), i);
      pos_ = i;
      if (i < len_) break;
    }
    token.text = spill_;
    return true;
  }

  // Newline bytes seen inside the range so far.
  std::uint64_t newlines() const noexcept { return newlines_; }
  std::uint64_t begin() const noexcept { return begin_; }
  std::uint64_t end() const noexcept { return end_; }

 private:
  bool refill() {
    if (eof_) return false;
    buffer_offset_ += len_;
    pos_ = 0;
    in_.read(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    len_ = static_cast<std::size_t>(in_.gcount());
    if (len_ < buffer_.size()) {
      if (in_.bad()) throw Error(ErrorKind::kIo, "read failed on " + path_.string());
      eof_ = true;
    }
    return len_ > 0;
  }

  bool finish() {
    done_ = true;
    return false;
  }

  std::filesystem::path path_;
  std::uint64_t begin_;
  std::uint64_t end_;
  std::ifstream in_;
  std::vector<char> buffer_;
  std::string spill_;
  std::uint64_t buffer_offset_ = 0;
  std::size_t pos_ = 0;
  std::size_t len_ = 0;
  bool eof_ = false;
  bool done_ = false;
  bool pending_line_start_ = true;
  bool skip_partial_ = false;
  std::uint64_t newlines_ = 0;
};

}  // namespace pw2v
