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

#ifndef IMBLENS_EMBX_H_
#define IMBLENS_EMBX_H_

// EMBX v1: a directory holding manifest.json plus one raw little-endian
// row-major binary file per tensor. Only f32 and i64 payloads exist.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "imblens/matrix.h"

namespace imblens {

inline constexpr std::string_view kEmbxFormatVersion = "embx-1";
inline constexpr std::string_view kEmbxManifestName = "manifest.json";

enum class DType { kF32, kI64 };

std::size_t DTypeSize(DType dtype);
std::string_view DTypeName(DType dtype);

struct TensorDecl {
  std::string name;
  std::string file;  // relative to the EMBX directory
  DType dtype = DType::kF32;
  std::vector<std::int64_t> shape;

  std::size_t element_count() const;
  std::size_t byte_length() const { return element_count() * DTypeSize(dtype); }
};

struct EmbxManifest {
  std::string format_version{kEmbxFormatVersion};
  std::vector<TensorDecl> tensors;
  std::map<std::string, std::string> metadata;

  const TensorDecl* Find(std::string_view name) const;
};

enum class Split { kTrain, kTest, kOther };

std::string_view SplitName(Split split);
Split ParseSplit(std::string_view name);

// Feature embeddings of N instances with H features each, taken after the
// final thresholding nonlinearity, plus their class labels.
struct EmbeddingSet {
  MatrixF fe;                         // N x H, entries >= 0
  std::vector<std::int64_t> labels;   // N, each in [0, num_classes)
  Split split = Split::kOther;
  std::size_t num_classes = 0;
  std::optional<MatrixF> logits;      // N x C when the exporter provided it
  std::string dataset;

  std::size_t num_instances() const { return fe.rows(); }
  std::size_t feature_dim() const { return fe.cols(); }
};

// Final linear layer: logits = weights * fe + bias.
struct ClassifierHead {
  MatrixF weights;                   // C x H
  std::optional<std::vector<float>> bias;  // C

  std::size_t num_classes() const { return weights.rows(); }
  std::size_t feature_dim() const { return weights.cols(); }
  double bias_at(std::size_t c) const { return bias ? (*bias)[c] : 0.0; }
};

struct LoadOptions {
  // Downgrades NegativeFE to a warning, for heads fed by non-ReLU extractors.
  bool allow_signed_fe = false;
};

struct EmbxContents {
  EmbxManifest manifest;
  std::variant<EmbeddingSet, ClassifierHead> object;
  std::vector<std::string> warnings;

  bool is_embedding_set() const {
    return std::holds_alternative<EmbeddingSet>(object);
  }
};

// Parses and validates manifest.json only.
EmbxManifest ReadEmbxManifest(const std::filesystem::path& dir);

// Loads a fully validated EMBX directory. Throws imblens::Error on any defect;
// no partially constructed object is ever returned.
EmbxContents ReadEmbx(const std::filesystem::path& dir,
                      const LoadOptions& options = {});

EmbeddingSet ReadEmbeddingSet(const std::filesystem::path& dir,
                              const LoadOptions& options = {},
                              std::vector<std::string>* warnings = nullptr);
ClassifierHead ReadClassifierHead(const std::filesystem::path& dir);

// Writes the object into dir (created when absent) and returns dir.
std::filesystem::path WriteEmbx(const EmbeddingSet& set,
                                const std::filesystem::path& dir);
std::filesystem::path WriteEmbx(const ClassifierHead& head,
                                const std::filesystem::path& dir);

// Structural checks shared by the reader and in-memory constructors.
void ValidateEmbeddingSet(const EmbeddingSet& set, bool allow_signed_fe,
                          std::vector<std::string>* warnings = nullptr);
void ValidateClassifierHead(const ClassifierHead& head);

}  // namespace imblens

#endif  // IMBLENS_EMBX_H_
