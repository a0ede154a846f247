// Copyright 2026 The imblens Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IMBLENS_ERROR_H_
#define IMBLENS_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace imblens {

enum class ErrorKind {
  kMissingManifest,
  kMalformedManifest,
  kShapeMismatch,
  kNegativeFe,
  kLabelOutOfRange,
  kNonFinite,
  kIoFailure,
  kDimensionMismatch,
  kEmptyInput,
  kInvalidArgument,
  kDivergence,
};

std::string_view ErrorKindName(ErrorKind kind);

// True for errors caused by bad input data or arguments, as opposed to a
// numeric failure inside an otherwise valid computation.
bool IsInputError(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMissingManifest: return "MissingManifest";
    case ErrorKind::kMalformedManifest: return "MalformedManifest";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kNegativeFe: return "NegativeFE";
    case ErrorKind::kLabelOutOfRange: return "LabelOutOfRange";
    case ErrorKind::kNonFinite: return "NonFinite";
    case ErrorKind::kIoFailure: return "IoFailure";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kEmptyInput: return "EmptyInput";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kDivergence: return "Divergence";
  }
  return "Unknown";
}

inline bool IsInputError(ErrorKind kind) {
  return kind != ErrorKind::kDivergence;
}

}  // namespace imblens

#endif  // IMBLENS_ERROR_H_
