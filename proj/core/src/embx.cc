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

#include "imblens/embx.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include "imblens/error.h"
#include "json.hpp"

namespace imblens {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kLayout = "row-major";
constexpr std::string_view kByteOrder = "little-endian";

[[noreturn]] void Fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

template <typename T>
void SwapToLittleEndian(std::span<T> values) {
  if constexpr (std::endian::native == std::endian::little) {
    return;
  } else {
    for (T& v : values) {
      auto* bytes = reinterpret_cast<unsigned char*>(&v);
      std::reverse(bytes, bytes + sizeof(T));
    }
  }
}

std::optional<std::int64_t> ParsePositiveInt(std::string_view text) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(),
                                   value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value <= 0) {
    return std::nullopt;
  }
  return value;
}

TensorDecl ParseTensorDecl(const json& j) {
  if (!j.is_object()) Fail(ErrorKind::kMalformedManifest, "tensor entry is not an object");
  auto string_field = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
      Fail(ErrorKind::kMalformedManifest,
           std::string("tensor entry missing string field '") + key + "'");
    }
    return it->get<std::string>();
  };

  TensorDecl decl;
  decl.name = string_field("name");
  decl.file = string_field("file");
  const std::string dtype = string_field("dtype");
  if (dtype == "f32") {
    decl.dtype = DType::kF32;
  } else if (dtype == "i64") {
    decl.dtype = DType::kI64;
  } else {
    Fail(ErrorKind::kMalformedManifest,
         "tensor '" + decl.name + "' has unsupported dtype '" + dtype + "'");
  }
  if (string_field("layout") != kLayout) {
    Fail(ErrorKind::kMalformedManifest,
         "tensor '" + decl.name + "' layout must be row-major");
  }
  if (string_field("byte_order") != kByteOrder) {
    Fail(ErrorKind::kMalformedManifest,
         "tensor '" + decl.name + "' byte_order must be little-endian");
  }

  auto shape = j.find("shape");
  if (shape == j.end() || !shape->is_array() || shape->empty()) {
    Fail(ErrorKind::kMalformedManifest,
         "tensor '" + decl.name + "' needs a non-empty shape array");
  }
  for (const auto& dim : *shape) {
    if (!dim.is_number_integer() || dim.get<std::int64_t>() <= 0) {
      Fail(ErrorKind::kMalformedManifest,
           "tensor '" + decl.name + "' shape entries must be positive integers");
    }
    decl.shape.push_back(dim.get<std::int64_t>());
  }

  fs::path rel(decl.file);
  if (decl.file.empty() || rel.is_absolute() ||
      std::any_of(rel.begin(), rel.end(),
                  [](const fs::path& part) { return part == ".."; })) {
    Fail(ErrorKind::kMalformedManifest,
         "tensor '" + decl.name + "' file must be a relative path inside the directory");
  }
  return decl;
}

std::vector<unsigned char> ReadPayload(const fs::path& dir,
                                       const TensorDecl& decl) {
  const fs::path path = dir / decl.file;
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    Fail(ErrorKind::kIoFailure,
         "declared file '" + decl.file + "' for tensor '" + decl.name +
             "' does not exist");
  }
  const auto size = fs::file_size(path, ec);
  if (ec) Fail(ErrorKind::kIoFailure, "cannot stat " + path.string());
  if (size != decl.byte_length()) {
    std::ostringstream msg;
    msg << "tensor '" << decl.name << "' declares " << decl.byte_length()
        << " bytes but " << decl.file << " holds " << size;
    Fail(ErrorKind::kShapeMismatch, msg.str());
  }
  std::vector<unsigned char> bytes(size);
  std::ifstream in(path, std::ios::binary);
  if (!in.read(reinterpret_cast<char*>(bytes.data()),
               static_cast<std::streamsize>(size))) {
    Fail(ErrorKind::kIoFailure, "failed reading " + path.string());
  }
  return bytes;
}

template <typename T>
std::vector<T> DecodePayload(const std::vector<unsigned char>& bytes) {
  std::vector<T> values(bytes.size() / sizeof(T));
  std::memcpy(values.data(), bytes.data(), values.size() * sizeof(T));
  SwapToLittleEndian(std::span<T>(values));
  return values;
}

const TensorDecl& Require(const EmbxManifest& manifest, std::string_view name,
                          DType dtype, std::size_t rank) {
  const TensorDecl* decl = manifest.Find(name);
  if (decl == nullptr) {
    Fail(ErrorKind::kMalformedManifest,
         "required tensor '" + std::string(name) + "' is not declared");
  }
  if (decl->dtype != dtype || decl->shape.size() != rank) {
    std::ostringstream msg;
    msg << "tensor '" << name << "' must be " << DTypeName(dtype) << " of rank "
        << rank;
    Fail(ErrorKind::kMalformedManifest, msg.str());
  }
  return *decl;
}

MatrixF LoadMatrix(const fs::path& dir, const TensorDecl& decl) {
  auto rows = static_cast<std::size_t>(decl.shape[0]);
  auto cols = static_cast<std::size_t>(decl.shape[1]);
  return MatrixF(rows, cols, DecodePayload<float>(ReadPayload(dir, decl)));
}

void CheckFinite(std::span<const float> values, std::string_view name) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      Fail(ErrorKind::kNonFinite, "tensor '" + std::string(name) +
                                      "' has a non-finite value at flat index " +
                                      std::to_string(i));
    }
  }
}

std::optional<std::size_t> MetadataClasses(const EmbxManifest& manifest) {
  auto it = manifest.metadata.find("num_classes");
  if (it == manifest.metadata.end()) return std::nullopt;
  return static_cast<std::size_t>(*ParsePositiveInt(it->second));
}

EmbeddingSet LoadEmbeddingSet(const fs::path& dir, const EmbxManifest& manifest,
                              const LoadOptions& options,
                              std::vector<std::string>* warnings) {
  const TensorDecl& fe_decl = Require(manifest, "fe", DType::kF32, 2);
  const TensorDecl& labels_decl = Require(manifest, "labels", DType::kI64, 1);
  if (labels_decl.shape[0] != fe_decl.shape[0]) {
    Fail(ErrorKind::kShapeMismatch, "labels length " +
                                        std::to_string(labels_decl.shape[0]) +
                                        " differs from fe rows " +
                                        std::to_string(fe_decl.shape[0]));
  }

  EmbeddingSet set;
  set.fe = LoadMatrix(dir, fe_decl);
  set.labels = DecodePayload<std::int64_t>(ReadPayload(dir, labels_decl));

  if (auto classes = MetadataClasses(manifest)) {
    set.num_classes = *classes;
  } else {
    std::int64_t max_label = *std::max_element(set.labels.begin(), set.labels.end());
    set.num_classes = static_cast<std::size_t>(std::max<std::int64_t>(max_label, 0) + 1);
  }
  if (auto it = manifest.metadata.find("split"); it != manifest.metadata.end()) {
    set.split = ParseSplit(it->second);
  }
  if (auto it = manifest.metadata.find("dataset"); it != manifest.metadata.end()) {
    set.dataset = it->second;
  }

  if (const TensorDecl* logits = manifest.Find("logits")) {
    if (logits->dtype != DType::kF32 || logits->shape.size() != 2) {
      Fail(ErrorKind::kMalformedManifest, "tensor 'logits' must be f32 of rank 2");
    }
    if (logits->shape[0] != fe_decl.shape[0] ||
        static_cast<std::size_t>(logits->shape[1]) != set.num_classes) {
      Fail(ErrorKind::kShapeMismatch, "logits shape must be [N, num_classes]");
    }
    set.logits = LoadMatrix(dir, *logits);
  }

  ValidateEmbeddingSet(set, options.allow_signed_fe, warnings);
  return set;
}

ClassifierHead LoadClassifierHead(const fs::path& dir,
                                  const EmbxManifest& manifest) {
  const TensorDecl& weights_decl = Require(manifest, "weights", DType::kF32, 2);
  ClassifierHead head;
  head.weights = LoadMatrix(dir, weights_decl);
  if (const TensorDecl* bias = manifest.Find("bias")) {
    if (bias->dtype != DType::kF32 || bias->shape.size() != 1) {
      Fail(ErrorKind::kMalformedManifest, "tensor 'bias' must be f32 of rank 1");
    }
    if (static_cast<std::size_t>(bias->shape[0]) != head.num_classes()) {
      Fail(ErrorKind::kShapeMismatch, "bias length must equal weights rows");
    }
    head.bias = DecodePayload<float>(ReadPayload(dir, *bias));
  }
  if (auto classes = MetadataClasses(manifest);
      classes && *classes != head.num_classes()) {
    Fail(ErrorKind::kShapeMismatch,
         "metadata num_classes disagrees with weights rows");
  }
  ValidateClassifierHead(head);
  return head;
}

template <typename T>
void WriteTensor(const fs::path& dir, const std::string& file,
                 std::span<const T> values) {
  std::vector<T> buffer(values.begin(), values.end());
  SwapToLittleEndian(std::span<T>(buffer));
  std::ofstream out(dir / file, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(buffer.data()),
            static_cast<std::streamsize>(buffer.size() * sizeof(T)));
  if (!out) Fail(ErrorKind::kIoFailure, "failed writing " + (dir / file).string());
}

TensorDecl Decl(std::string name, DType dtype, std::vector<std::int64_t> shape) {
  TensorDecl decl;
  decl.file = name + ".bin";
  decl.name = std::move(name);
  decl.dtype = dtype;
  decl.shape = std::move(shape);
  return decl;
}

void WriteManifest(const fs::path& dir, const EmbxManifest& manifest) {
  json tensors = json::array();
  for (const TensorDecl& t : manifest.tensors) {
    tensors.push_back({{"name", t.name},
                       {"file", t.file},
                       {"dtype", DTypeName(t.dtype)},
                       {"shape", t.shape},
                       {"layout", kLayout},
                       {"byte_order", kByteOrder}});
  }
  json doc = {{"format_version", manifest.format_version},
              {"tensors", tensors},
              {"metadata", manifest.metadata}};
  std::ofstream out(dir / kEmbxManifestName, std::ios::trunc);
  out << doc.dump(2) << '\n';
  if (!out) Fail(ErrorKind::kIoFailure, "failed writing manifest in " + dir.string());
}

void PrepareDirectory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    Fail(ErrorKind::kIoFailure, "cannot create directory " + dir.string());
  }
}

std::int64_t Dim(std::size_t n) { return static_cast<std::int64_t>(n); }

}  // namespace

std::size_t DTypeSize(DType dtype) { return dtype == DType::kF32 ? 4 : 8; }

std::string_view DTypeName(DType dtype) {
  return dtype == DType::kF32 ? "f32" : "i64";
}

std::size_t TensorDecl::element_count() const {
  std::size_t count = 1;
  for (std::int64_t dim : shape) count *= static_cast<std::size_t>(dim);
  return count;
}

const TensorDecl* EmbxManifest::Find(std::string_view name) const {
  for (const TensorDecl& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kTest: return "test";
    case Split::kOther: return "other";
  }
  return "other";
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "test") return Split::kTest;
  return Split::kOther;
}

EmbxManifest ReadEmbxManifest(const fs::path& dir) {
  const fs::path path = dir / kEmbxManifestName;
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    Fail(ErrorKind::kMissingManifest, "no manifest.json in " + dir.string());
  }
  std::ifstream in(path);
  json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    Fail(ErrorKind::kMalformedManifest, path.string() + " is not a JSON object");
  }

  EmbxManifest manifest;
  auto version = doc.find("format_version");
  if (version == doc.end() || !version->is_string() ||
      version->get<std::string>() != kEmbxFormatVersion) {
    Fail(ErrorKind::kMalformedManifest, "format_version must be \"embx-1\"");
  }

  auto tensors = doc.find("tensors");
  if (tensors == doc.end() || !tensors->is_array()) {
    Fail(ErrorKind::kMalformedManifest, "manifest needs a 'tensors' array");
  }
  std::set<std::string> names;
  for (const auto& entry : *tensors) {
    TensorDecl decl = ParseTensorDecl(entry);
    if (!names.insert(decl.name).second) {
      Fail(ErrorKind::kMalformedManifest, "duplicate tensor name '" + decl.name + "'");
    }
    manifest.tensors.push_back(std::move(decl));
  }

  if (auto metadata = doc.find("metadata"); metadata != doc.end()) {
    if (!metadata->is_object()) {
      Fail(ErrorKind::kMalformedManifest, "metadata must be an object");
    }
    for (const auto& [key, value] : metadata->items()) {
      if (!value.is_string()) {
        Fail(ErrorKind::kMalformedManifest,
             "metadata value for '" + key + "' must be a string");
      }
      manifest.metadata.emplace(key, value.get<std::string>());
    }
  }
  if (auto it = manifest.metadata.find("num_classes");
      it != manifest.metadata.end() && !ParsePositiveInt(it->second)) {
    Fail(ErrorKind::kMalformedManifest,
         "metadata num_classes must be a positive integer");
  }
  return manifest;
}

EmbxContents ReadEmbx(const fs::path& dir, const LoadOptions& options) {
  EmbxManifest manifest = ReadEmbxManifest(dir);
  const bool has_fe = manifest.Find("fe") != nullptr;
  const bool has_weights = manifest.Find("weights") != nullptr;
  if (has_fe == has_weights) {
    Fail(ErrorKind::kMalformedManifest,
         "directory must declare exactly one of 'fe' or 'weights'");
  }
  std::vector<std::string> warnings;
  if (has_fe) {
    EmbeddingSet set = LoadEmbeddingSet(dir, manifest, options, &warnings);
    return {std::move(manifest), std::move(set), std::move(warnings)};
  }
  ClassifierHead head = LoadClassifierHead(dir, manifest);
  return {std::move(manifest), std::move(head), std::move(warnings)};
}

EmbeddingSet ReadEmbeddingSet(const fs::path& dir, const LoadOptions& options,
                              std::vector<std::string>* warnings) {
  EmbxContents contents = ReadEmbx(dir, options);
  if (!contents.is_embedding_set()) {
    Fail(ErrorKind::kMalformedManifest,
         dir.string() + " holds a classifier head, not an embedding set");
  }
  if (warnings != nullptr) {
    warnings->insert(warnings->end(), contents.warnings.begin(),
                     contents.warnings.end());
  }
  return std::get<EmbeddingSet>(std::move(contents.object));
}

ClassifierHead ReadClassifierHead(const fs::path& dir) {
  EmbxContents contents = ReadEmbx(dir);
  if (contents.is_embedding_set()) {
    Fail(ErrorKind::kMalformedManifest,
         dir.string() + " holds an embedding set, not a classifier head");
  }
  return std::get<ClassifierHead>(std::move(contents.object));
}

fs::path WriteEmbx(const EmbeddingSet& set, const fs::path& dir) {
  ValidateEmbeddingSet(set, /*allow_signed_fe=*/true);
  PrepareDirectory(dir);

  EmbxManifest manifest;
  const std::size_t n = set.num_instances();
  manifest.tensors.push_back(
      Decl("fe", DType::kF32, {Dim(n), Dim(set.feature_dim())}));
  manifest.tensors.push_back(Decl("labels", DType::kI64, {Dim(n)}));
  WriteTensor(dir, "fe.bin", set.fe.values());
  WriteTensor(dir, "labels.bin", std::span<const std::int64_t>(set.labels));
  if (set.logits) {
    manifest.tensors.push_back(
        Decl("logits", DType::kF32, {Dim(n), Dim(set.logits->cols())}));
    WriteTensor(dir, "logits.bin", set.logits->values());
  }
  manifest.metadata["num_classes"] = std::to_string(set.num_classes);
  manifest.metadata["split"] = std::string(SplitName(set.split));
  if (!set.dataset.empty()) manifest.metadata["dataset"] = set.dataset;
  WriteManifest(dir, manifest);
  return dir;
}

fs::path WriteEmbx(const ClassifierHead& head, const fs::path& dir) {
  ValidateClassifierHead(head);
  PrepareDirectory(dir);

  EmbxManifest manifest;
  manifest.tensors.push_back(Decl(
      "weights", DType::kF32, {Dim(head.num_classes()), Dim(head.feature_dim())}));
  WriteTensor(dir, "weights.bin", head.weights.values());
  if (head.bias) {
    manifest.tensors.push_back(Decl("bias", DType::kF32, {Dim(head.num_classes())}));
    WriteTensor(dir, "bias.bin", std::span<const float>(*head.bias));
  }
  manifest.metadata["num_classes"] = std::to_string(head.num_classes());
  WriteManifest(dir, manifest);
  return dir;
}

void ValidateEmbeddingSet(const EmbeddingSet& set, bool allow_signed_fe,
                          std::vector<std::string>* warnings) {
  if (set.fe.rows() == 0 || set.fe.cols() == 0) {
    Fail(ErrorKind::kEmptyInput, "embedding set needs N >= 1 and H >= 1");
  }
  if (set.labels.size() != set.fe.rows()) {
    Fail(ErrorKind::kShapeMismatch, "labels length differs from fe rows");
  }
  if (set.num_classes == 0) {
    Fail(ErrorKind::kMalformedManifest, "num_classes must be positive");
  }
  CheckFinite(set.fe.values(), "fe");
  if (set.logits) {
    if (set.logits->rows() != set.fe.rows() ||
        set.logits->cols() != set.num_classes) {
      Fail(ErrorKind::kShapeMismatch, "logits shape must be [N, num_classes]");
    }
    CheckFinite(set.logits->values(), "logits");
  }

  const auto fe = set.fe.values();
  auto negative = std::find_if(fe.begin(), fe.end(), [](float v) { return v < 0.0f; });
  if (negative != fe.end()) {
    auto flat = static_cast<std::size_t>(negative - fe.begin());
    std::string where = "fe[" + std::to_string(flat / set.fe.cols()) + "][" +
                        std::to_string(flat % set.fe.cols()) + "] is negative";
    if (!allow_signed_fe) Fail(ErrorKind::kNegativeFe, where);
    if (warnings != nullptr) warnings->push_back("NegativeFE: " + where);
  }

  for (std::size_t n = 0; n < set.labels.size(); ++n) {
    std::int64_t label = set.labels[n];
    if (label < 0 || static_cast<std::size_t>(label) >= set.num_classes) {
      Fail(ErrorKind::kLabelOutOfRange,
           "label " + std::to_string(label) + " at instance " + std::to_string(n) +
               " is outside [0, " + std::to_string(set.num_classes) + ")");
    }
  }
}

void ValidateClassifierHead(const ClassifierHead& head) {
  if (head.weights.rows() == 0 || head.weights.cols() == 0) {
    Fail(ErrorKind::kEmptyInput, "classifier head needs C >= 1 and H >= 1");
  }
  CheckFinite(head.weights.values(), "weights");
  if (head.bias) {
    if (head.bias->size() != head.num_classes()) {
      Fail(ErrorKind::kShapeMismatch, "bias length must equal weights rows");
    }
    CheckFinite(*head.bias, "bias");
  }
}

}  // namespace imblens
