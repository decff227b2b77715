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

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pw2v/error.hpp"
#include "pw2v/matrix.hpp"
#include "pw2v/model.hpp"
#include "pw2v/token_reader.hpp"
#include "pw2v/vocab.hpp"

namespace pw2v {

enum class VectorFormat { kText, kBinary, kAuto };

/// Word vectors as stored on disk: tokens in file order plus one float row
/// each. This is what evaluation consumes.
struct WordVectors {
  std::vector<std::string> tokens;
  RowMatrix<float> vectors;

  std::size_t size() const noexcept { return tokens.size(); }
  std::size_t dim() const noexcept { return vectors.cols(); }

  void reindex() {
    index_.clear();
    index_.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i)
      index_.emplace(tokens[i], static_cast<WordId>(i));
  }

  // Exact match first, then the ASCII-lowercased token.
  std::optional<WordId> find(std::string_view token) const {
    if (auto it = index_.find(token); it != index_.end()) return it->second;
    std::string lower(token);
    bool changed = false;
    for (char& c : lower)
      if (c >= 'A' && c <= 'Z') {
        c = static_cast<char>(c - 'A' + 'a');
        changed = true;
      }
    if (!changed) return std::nullopt;
    if (auto it = index_.find(lower); it != index_.end()) return it->second;
    return std::nullopt;
  }

  template <typename Real>
  static WordVectors from_model(const Vocabulary& vocab, const EmbeddingModel<Real>& model) {
    WordVectors wv;
    wv.tokens.reserve(vocab.size());
    for (const auto& e : vocab.entries()) wv.tokens.push_back(e.token);
    wv.vectors = RowMatrix<float>(model.vocab_size(), model.dim());
    for (std::size_t i = 0; i < model.m_in.data().size(); ++i)
      wv.vectors.data()[i] = static_cast<float>(model.m_in.data()[i]);
    wv.reindex();
    return wv;
  }

 private:
  std::unordered_map<std::string, WordId, StringHash, std::equal_to<>> index_;
};

namespace detail {

template <typename Real>
using BitsOf = std::conditional_t<sizeof(Real) == 4, std::uint32_t, std::uint64_t>;

template <typename Real>
void append_le(std::string& out, Real value) {
  const auto bits = std::bit_cast<BitsOf<Real>>(value);
  for (std::size_t i = 0; i < sizeof(Real); ++i)
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

template <typename Real>
Real read_le(const char* p) {
  BitsOf<Real> bits = 0;
  for (std::size_t i = 0; i < sizeof(Real); ++i)
    bits |= static_cast<BitsOf<Real>>(static_cast<unsigned char>(p[i])) << (8 * i);
  return std::bit_cast<Real>(bits);
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  return out;
}

inline void check_written(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::kIo, "write failed on " + path.string());
}

// Cursor over a loaded file.
struct Scanner {
  std::string_view data;
  std::size_t pos = 0;

  bool at_end() const { return pos >= data.size(); }

  std::string_view line() {
    const auto nl = data.find('\n', pos);
    const auto stop = nl == std::string_view::npos ? data.size() : nl;
    auto out = data.substr(pos, stop - pos);
    pos = nl == std::string_view::npos ? data.size() : nl + 1;
    return out;
  }
};

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_token_space(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_token_space(s[i])) ++i;
    if (i > start) parts.push_back(s.substr(start, i - start));
  }
  return parts;
}

struct Header {
  std::size_t rows = 0;
  std::size_t dim = 0;
};

inline Header parse_header(Scanner& sc, const std::filesystem::path& path) {
  const auto fields = split_ws(sc.line());
  Header h;
  if (fields.size() != 2 || !parse_int(fields[0], h.rows) || !parse_int(fields[1], h.dim) ||
      h.dim == 0)
    throw Error(ErrorKind::kMalformedHeader, path.string() + ": expected \"<V> <D>\" header");
  return h;
}

inline bool looks_textual(std::string_view rest_of_line, std::size_t dim) {
  for (char c : rest_of_line)
    if (!((c >= '0' && c <= '9') || c == '.' || c == '-' || c == '+' || c == 'e' ||
          c == 'E' || c == ' ' || c == '\t' || c == '\r'))
      return false;
  return split_ws(rest_of_line).size() == dim;
}

}  // namespace detail

/// word2vec-compatible export of m_in: a "V D" header line, then per word the
/// token followed by D decimals (text) or by a space, D little-endian float32
/// values and a newline (binary).
template <typename Real>
void save_model(const EmbeddingModel<Real>& model, const Vocabulary& vocab,
                const std::filesystem::path& path, VectorFormat format) {
  if (vocab.size() != model.vocab_size())
    throw Error(ErrorKind::kDimensionMismatch, "vocabulary has " + std::to_string(vocab.size()) +
                                                   " words, model " +
                                                   std::to_string(model.vocab_size()));
  auto out = detail::open_for_write(path);
  const std::size_t dim = model.dim();
  out << model.vocab_size() << ' ' << dim << '\n';
  std::string row;
  char num[64];
  for (std::size_t w = 0; w < model.vocab_size(); ++w) {
    row.assign(vocab.token(static_cast<WordId>(w)));
    const Real* v = model.m_in.row_ptr(w);
    if (format == VectorFormat::kBinary) {
      row.push_back(' ');
      for (std::size_t j = 0; j < dim; ++j) detail::append_le(row, static_cast<float>(v[j]));
    } else {
      for (std::size_t j = 0; j < dim; ++j) {
        row.push_back(' ');
        auto [end, ec] = std::to_chars(num, num + sizeof num, static_cast<double>(v[j]),
                                       std::chars_format::fixed, 6);
        row.append(num, end);
      }
    }
    row.push_back('\n');
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  detail::check_written(out, path);
}

/// Reads either vector format; kAuto decides from the first record.
inline WordVectors load_model(const std::filesystem::path& path,
                              VectorFormat format = VectorFormat::kAuto) {
  const std::string data = detail::slurp(path);
  detail::Scanner sc{data};
  const auto header = detail::parse_header(sc, path);
  WordVectors wv;
  wv.tokens.reserve(header.rows);
  wv.vectors = RowMatrix<float>(header.rows, header.dim);

  if (format == VectorFormat::kAuto) {
    format = VectorFormat::kBinary;
    const auto nl = data.find('\n', sc.pos);
    const auto line = std::string_view(data).substr(
        sc.pos, (nl == std::string::npos ? data.size() : nl) - sc.pos);
    const auto sp = line.find_first_of(" \t");
    if (sp != std::string_view::npos && detail::looks_textual(line.substr(sp), header.dim))
      format = VectorFormat::kText;
    if (header.rows == 0) format = VectorFormat::kText;
  }

  const auto truncated = [&](std::size_t row) {
    return Error(ErrorKind::kTruncatedFile, path.string() + ": header promises " +
                                                std::to_string(header.rows) +
                                                " rows, file ends at row " + std::to_string(row));
  };

  for (std::size_t r = 0; r < header.rows; ++r) {
    float* dst = wv.vectors.row_ptr(r);
    if (format == VectorFormat::kText) {
      std::string_view line;
      do {
        if (sc.at_end()) throw truncated(r);
        line = sc.line();
      } while (detail::split_ws(line).empty());
      const auto fields = detail::split_ws(line);
      if (fields.size() != header.dim + 1)
        throw Error(ErrorKind::kDimensionMismatch,
                    path.string() + ": row " + std::to_string(r) + " has " +
                        std::to_string(fields.size() - 1) + " values, expected " +
                        std::to_string(header.dim));
      wv.tokens.emplace_back(fields[0]);
      for (std::size_t j = 0; j < header.dim; ++j) {
        const auto f = fields[j + 1];
        auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), dst[j]);
        if (ec != std::errc() || ptr != f.data() + f.size())
          throw Error(ErrorKind::kParse, path.string() + ": bad number '" + std::string(f) +
                                             "' in row " + std::to_string(r));
      }
    } else {
      while (!sc.at_end() && is_token_space(data[sc.pos])) ++sc.pos;
      const auto sp = data.find(' ', sc.pos);
      if (sc.at_end() || sp == std::string::npos) throw truncated(r);
      wv.tokens.emplace_back(data.substr(sc.pos, sp - sc.pos));
      sc.pos = sp + 1;
      if (data.size() - sc.pos < header.dim * 4) throw truncated(r);
      for (std::size_t j = 0; j < header.dim; ++j)
        dst[j] = detail::read_le<float>(data.data() + sc.pos + 4 * j);
      sc.pos += header.dim * 4;
      if (!sc.at_end() && data[sc.pos] == '\n') ++sc.pos;
    }
  }
  wv.reindex();
  return wv;
}

/// Debug dump of both matrices at full precision: header
/// "pw2v-full V D <bytes per value>", then per word the token, a space, the
/// m_in row, the m_out row (little-endian) and a newline.
template <typename Real>
void save_full_model(const EmbeddingModel<Real>& model, const Vocabulary& vocab,
                     const std::filesystem::path& path) {
  if (vocab.size() != model.vocab_size())
    throw Error(ErrorKind::kDimensionMismatch, "vocabulary and model sizes differ");
  auto out = detail::open_for_write(path);
  out << "pw2v-full " << model.vocab_size() << ' ' << model.dim() << ' ' << sizeof(Real) << '\n';
  std::string row;
  for (std::size_t w = 0; w < model.vocab_size(); ++w) {
    row.assign(vocab.token(static_cast<WordId>(w)));
    row.push_back(' ');
    for (const Real v : model.m_in.row(w)) detail::append_le(row, v);
    for (const Real v : model.m_out.row(w)) detail::append_le(row, v);
    row.push_back('\n');
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  detail::check_written(out, path);
}

template <typename Real>
std::pair<EmbeddingModel<Real>, std::vector<std::string>> load_full_model(
    const std::filesystem::path& path) {
  const std::string data = detail::slurp(path);
  detail::Scanner sc{data};
  const auto fields = detail::split_ws(sc.line());
  std::size_t rows = 0, dim = 0, width = 0;
  if (fields.size() != 4 || fields[0] != "pw2v-full" || !detail::parse_int(fields[1], rows) ||
      !detail::parse_int(fields[2], dim) || !detail::parse_int(fields[3], width) || dim == 0)
    throw Error(ErrorKind::kMalformedHeader, path.string() + ": not a pw2v-full file");
  if (width != sizeof(Real))
    throw Error(ErrorKind::kDimensionMismatch,
                path.string() + ": stored " + std::to_string(width) + "-byte values");
  EmbeddingModel<Real> model{RowMatrix<Real>(rows, dim), RowMatrix<Real>(rows, dim)};
  std::vector<std::string> tokens;
  tokens.reserve(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto sp = data.find(' ', sc.pos);
    const std::size_t need = 2 * dim * sizeof(Real);
    if (sp == std::string::npos || data.size() - sp - 1 < need)
      throw Error(ErrorKind::kTruncatedFile, path.string() + ": truncated at row " +
                                                 std::to_string(r));
    tokens.emplace_back(data.substr(sc.pos, sp - sc.pos));
    const char* p = data.data() + sp + 1;
    for (std::size_t j = 0; j < dim; ++j) model.m_in(r, j) = detail::read_le<Real>(p + j * sizeof(Real));
    p += dim * sizeof(Real);
    for (std::size_t j = 0; j < dim; ++j) model.m_out(r, j) = detail::read_le<Real>(p + j * sizeof(Real));
    sc.pos = sp + 1 + need;
    if (!sc.at_end() && data[sc.pos] == '\n') ++sc.pos;
  }
  return {std::move(model), std::move(tokens)};
}

}  // namespace pw2v
