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

#include <stdexcept>
#include <string>
#include <string_view>

namespace pw2v {

enum class ErrorKind {
  kEmptyVocabulary,
  kTableTooSmall,
  kMalformedHeader,
  kDimensionMismatch,
  kTruncatedFile,
  kIo,
  kParse,
  kZeroVector,
  kLengthMismatch,
  kUndefinedCorrelation,
  kAllSkipped,
  kTooManyShards,
  kHandshake,
  kTransport,
  kInvalidConfig,
  kUsage,
  kResource,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kEmptyVocabulary: return "empty-vocabulary";
    case ErrorKind::kTableTooSmall: return "length-too-small";
    case ErrorKind::kMalformedHeader: return "malformed-header";
    case ErrorKind::kDimensionMismatch: return "dimension-mismatch";
    case ErrorKind::kTruncatedFile: return "truncated-file";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kZeroVector: return "zero-vector";
    case ErrorKind::kLengthMismatch: return "length-mismatch";
    case ErrorKind::kUndefinedCorrelation: return "undefined-correlation";
    case ErrorKind::kAllSkipped: return "all-skipped";
    case ErrorKind::kTooManyShards: return "too-many-shards";
    case ErrorKind::kHandshake: return "handshake";
    case ErrorKind::kTransport: return "transport";
    case ErrorKind::kInvalidConfig: return "invalid-config";
    case ErrorKind::kUsage: return "usage";
    case ErrorKind::kResource: return "resource";
  }
  return "unknown";
}

/// Every failure surfaced by the library is a pw2v::Error tagged with a kind,
/// so callers (and tests) can branch on the category without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace pw2v
