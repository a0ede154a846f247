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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "imblens/decomposition.h"
#include "imblens/error.h"
#include "json.hpp"
#include "support/oracles.h"
#include "support/test_support.h"

namespace imblens {
namespace {

using testing::MakeHead;
using testing::MakeSet;
using testing::ReadBytes;
using testing::TempDir;
using nlohmann::json;

json TensorEntry(const std::string& name, const std::string& dtype,
                 std::vector<std::int64_t> shape) {
  return {{"name", name},          {"file", name + ".bin"},
          {"dtype", dtype},        {"shape", shape},
          {"layout", "row-major"}, {"byte_order", "little-endian"}};
}

template <typename T>
void WriteRaw(const std::filesystem::path& path, const std::vector<T>& values) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(T)));
}

void WriteManifest(const std::filesystem::path& dir, const json& doc) {
  std::ofstream(dir / "manifest.json") << doc.dump();
}

// A valid 2x3 embedding set written byte by byte, bypassing WriteEmbx.
void WriteRawSet(const std::filesystem::path& dir, std::vector<float> fe,
                 std::vector<std::int64_t> labels, const std::string& classes) {
  WriteRaw(dir / "fe.bin", fe);
  WriteRaw(dir / "labels.bin", labels);
  WriteManifest(dir, {{"format_version", "embx-1"},
                      {"tensors", {TensorEntry("fe", "f32", {2, 3}),
                                   TensorEntry("labels", "i64", {2})}},
                      {"metadata", {{"num_classes", classes}}}});
}

ErrorKind LoadErrorKind(const std::filesystem::path& dir,
                        const LoadOptions& options = {}) {
  try {
    ReadEmbx(dir, options);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected a load error";
  return ErrorKind::kInvalidArgument;
}

TEST(EmbxTest, ZeroMatrixRoundTrips) {
  TempDir tmp;
  WriteRawSet(tmp.path(), std::vector<float>(6, 0.0f), {0, 1}, "2");
  EmbeddingSet set = ReadEmbeddingSet(tmp.path());
  EXPECT_EQ(set.num_instances(), 2u);
  EXPECT_EQ(set.feature_dim(), 3u);
  EXPECT_EQ(set.num_classes, 2u);
  for (float v : set.fe.values()) EXPECT_EQ(v, 0.0f);
  EXPECT_EQ(set.labels, (std::vector<std::int64_t>{0, 1}));
  EXPECT_FALSE(set.logits.has_value());
}

TEST(EmbxTest, ShortPayloadIsShapeMismatch) {
  TempDir tmp;
  WriteRawSet(tmp.path(), std::vector<float>(6, 0.0f), {0, 1}, "2");
  WriteRaw(tmp / "fe.bin", std::vector<float>(11, 0.0f));  // but [2,3] declared
  EXPECT_EQ(LoadErrorKind(tmp.path()), ErrorKind::kShapeMismatch);
}

TEST(EmbxTest, SiblingSetAndHeadLoadAsPair) {
  TempDir tmp;
  EmbeddingSet set = MakeSet(1, 3, {1.5f, 0.25f, 0.0f}, {0}, 2);
  ClassifierHead head = MakeHead(2, 3, {1, 0, 2, 0, 1, 1});
  WriteEmbx(set, tmp / "fe");
  WriteEmbx(head, tmp / "weights");

  EmbeddingSet loaded_set = ReadEmbeddingSet(tmp / "fe");
  ClassifierHead loaded_head = ReadClassifierHead(tmp / "weights");
  EXPECT_EQ(loaded_set.fe, set.fe);
  EXPECT_EQ(loaded_head.weights, head.weights);
  EXPECT_FALSE(loaded_head.bias.has_value());
  // Byte-level: the payload is exactly the little-endian f32 encoding.
  EXPECT_EQ(ReadBytes(tmp / "fe" / "fe.bin"),
            std::vector<char>(reinterpret_cast<const char*>(set.fe.values().data()),
                              reinterpret_cast<const char*>(set.fe.values().data()) + 12));
  Decomposition d(loaded_set, loaded_head);
  EXPECT_DOUBLE_EQ(d.logit(0, 0), 1.5);
  EXPECT_DOUBLE_EQ(d.logit(0, 1), 0.25);
}

TEST(EmbxTest, SingleElementSetWritesDtypeSizedFiles) {
  TempDir tmp;
  WriteEmbx(MakeSet(1, 1, {3.0f}, {0}, 1), tmp.path());
  EXPECT_TRUE(std::filesystem::exists(tmp / "manifest.json"));
  EXPECT_EQ(std::filesystem::file_size(tmp / "fe.bin"), 4u);
  EXPECT_EQ(std::filesystem::file_size(tmp / "labels.bin"), 8u);
}

TEST(EmbxTest, HeadWithoutBiasListsOnlyWeights) {
  TempDir tmp;
  WriteEmbx(MakeHead(2, 3, {1, 2, 3, 4, 5, 6}), tmp.path());
  EmbxManifest manifest = ReadEmbxManifest(tmp.path());
  ASSERT_EQ(manifest.tensors.size(), 1u);
  EXPECT_EQ(manifest.tensors[0].name, "weights");
  EXPECT_EQ(manifest.format_version, "embx-1");
}

TEST(EmbxTest, LargeRandomMatrixPayloadIsByteIdentical) {
  TempDir tmp;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<float> dist(0.0f, 10.0f);
  EmbeddingSet set = MakeSet(64, 64, std::vector<float>(64 * 64), {}, 4);
  for (float& v : set.fe.values()) v = dist(rng);
  set.labels.resize(64);
  for (std::size_t i = 0; i < 64; ++i) set.labels[i] = static_cast<std::int64_t>(i % 4);

  WriteEmbx(set, tmp / "a");
  EmbeddingSet loaded = ReadEmbeddingSet(tmp / "a");
  WriteEmbx(loaded, tmp / "b");
  const auto in_memory = std::vector<char>(
      reinterpret_cast<const char*>(set.fe.values().data()),
      reinterpret_cast<const char*>(set.fe.values().data()) + 64 * 64 * 4);
  EXPECT_EQ(testing::Fnv1a(ReadBytes(tmp / "a" / "fe.bin")), testing::Fnv1a(in_memory));
  EXPECT_EQ(testing::Fnv1a(ReadBytes(tmp / "a" / "fe.bin")),
            testing::Fnv1a(ReadBytes(tmp / "b" / "fe.bin")));
  EXPECT_EQ(ReadBytes(tmp / "a" / "manifest.json"), ReadBytes(tmp / "b" / "manifest.json"));
}

TEST(EmbxTest, RoundTripPreservesEveryField) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    TempDir tmp;
    testing::RandomShape shape;
    shape.n = testing::RandomIn(rng, 1, 30);
    shape.h = testing::RandomIn(rng, 1, 12);
    shape.c = testing::RandomIn(rng, 1, 5);
    shape.bias = trial % 2 == 0;
    auto p = testing::MakeRandomProblem(rng, shape);
    p.set.split = trial % 3 == 0 ? Split::kTest : Split::kTrain;
    p.set.dataset = "random";
    if (trial % 4 == 0) {
      p.set.logits = MatrixF(shape.n, shape.c, 0.5f);
    }
    WriteEmbx(p.set, tmp / "set");
    WriteEmbx(p.head, tmp / "head");

    EmbeddingSet set = ReadEmbeddingSet(tmp / "set");
    ClassifierHead head = ReadClassifierHead(tmp / "head");
    EXPECT_EQ(set.fe, p.set.fe);
    EXPECT_EQ(set.labels, p.set.labels);
    EXPECT_EQ(set.num_classes, p.set.num_classes);
    EXPECT_EQ(set.split, p.set.split);
    EXPECT_EQ(set.dataset, "random");
    EXPECT_EQ(set.logits, p.set.logits);
    EXPECT_EQ(head.weights, p.head.weights);
    EXPECT_EQ(head.bias, p.head.bias);
  }
}

TEST(EmbxTest, MissingManifest) {
  TempDir tmp;
  EXPECT_EQ(LoadErrorKind(tmp.path()), ErrorKind::kMissingManifest);
  EXPECT_EQ(LoadErrorKind(tmp / "does_not_exist"), ErrorKind::kMissingManifest);
}

TEST(EmbxTest, MalformedManifests) {
  const json good_tensors = {TensorEntry("fe", "f32", {2, 3}),
                             TensorEntry("labels", "i64", {2})};
  const std::vector<json> bad_docs = {
      json::array(),
      {{"format_version", "embx-2"}, {"tensors", good_tensors}},
      {{"tensors", good_tensors}},
      {{"format_version", "embx-1"}},
      {{"format_version", "embx-1"},
       {"tensors", {TensorEntry("fe", "f32", {2, 3}), TensorEntry("fe", "f32", {2, 3})}}},
      {{"format_version", "embx-1"},
       {"tensors", good_tensors},
       {"metadata", {{"num_classes", "0"}}}},
      {{"format_version", "embx-1"},
       {"tensors", good_tensors},
       {"metadata", {{"num_classes", "two"}}}},
      {{"format_version", "embx-1"},
       {"tensors", good_tensors},
       {"metadata", {{"num_classes", 2}}}},
      {{"format_version", "embx-1"},
       {"tensors", {TensorEntry("fe", "f64", {2, 3}), TensorEntry("labels", "i64", {2})}}},
      {{"format_version", "embx-1"},
       {"tensors", {TensorEntry("fe", "f32", {2, 0}), TensorEntry("labels", "i64", {2})}}},
      {{"format_version", "embx-1"},
       {"tensors", {TensorEntry("fe", "f32", {6}), TensorEntry("labels", "i64", {2})}}},
      {{"format_version", "embx-1"}, {"tensors", {TensorEntry("labels", "i64", {2})}}},
  };
  for (std::size_t i = 0; i < bad_docs.size(); ++i) {
    TempDir tmp;
    WriteRawSet(tmp.path(), std::vector<float>(6, 1.0f), {0, 1}, "2");
    WriteManifest(tmp.path(), bad_docs[i]);
    EXPECT_EQ(LoadErrorKind(tmp.path()), ErrorKind::kMalformedManifest) << "doc " << i;
  }

  TempDir tmp;
  WriteRawSet(tmp.path(), std::vector<float>(6, 1.0f), {0, 1}, "2");
  std::ofstream(tmp / "manifest.json") << "{ not json";
  EXPECT_EQ(LoadErrorKind(tmp.path()), ErrorKind::kMalformedManifest);

  json col_major = TensorEntry("fe", "f32", {2, 3});
  col_major["layout"] = "column-major";
  WriteManifest(tmp.path(), {{"format_version", "embx-1"},
                             {"tensors", {col_major, TensorEntry("labels", "i64", {2})}}});
  EXPECT_EQ(LoadErrorKind(tmp.path()), ErrorKind::kMalformedManifest);

  json escaping = TensorEntry("fe", "f32", {2, 3});
  escaping["file"] = "../fe.bin";
  WriteManifest(tmp.path(), {{"format_version", "embx-1"},
                             {"tensors", {escaping, TensorEntry("labels", "i64", {2})}}});
  EXPECT_EQ(LoadErrorKind(tmp.path()), ErrorKind::kMalformedManifest);
}

TEST(EmbxTest, NegativeFeIsAnErrorUnlessAllowed) {
  TempDir tmp;
  WriteRawSet(tmp.path(), {1, 2, 3, 4, -0.5f, 6}, {0, 1}, "2");
  EXPECT_EQ(LoadErrorKind(tmp.path()), ErrorKind::kNegativeFe);

  std::vector<std::string> warnings;
  EmbeddingSet set = ReadEmbeddingSet(tmp.path(), LoadOptions{true}, &warnings);
  EXPECT_EQ(set.fe(1, 1), -0.5f);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("NegativeFE"), std::string::npos);
}

TEST(EmbxTest, LabelOutOfRange) {
  TempDir tmp;
  WriteRawSet(tmp.path(), std::vector<float>(6, 1.0f), {0, 2}, "2");
  EXPECT_EQ(LoadErrorKind(tmp.path()), ErrorKind::kLabelOutOfRange);
  WriteRawSet(tmp.path(), std::vector<float>(6, 1.0f), {-1, 0}, "2");
  EXPECT_EQ(LoadErrorKind(tmp.path()), ErrorKind::kLabelOutOfRange);
}

TEST(EmbxTest, NonFinitePayloadsAreRejected) {
  TempDir tmp;
  WriteRawSet(tmp.path(), {1, 2, std::numeric_limits<float>::quiet_NaN(), 4, 5, 6},
              {0, 1}, "2");
  EXPECT_EQ(LoadErrorKind(tmp.path()), ErrorKind::kNonFinite);
  WriteRawSet(tmp.path(), {1, 2, std::numeric_limits<float>::infinity(), 4, 5, 6},
              {0, 1}, "2");
  EXPECT_EQ(LoadErrorKind(tmp.path()), ErrorKind::kNonFinite);

  TempDir head_dir;
  ClassifierHead head = MakeHead(1, 2, {1, std::nanf("")});
  EXPECT_THROW(WriteEmbx(head, head_dir.path()), Error);
}

TEST(EmbxTest, MissingDeclaredFileIsIoFailure) {
  TempDir tmp;
  WriteRawSet(tmp.path(), std::vector<float>(6, 1.0f), {0, 1}, "2");
  std::filesystem::remove(tmp / "labels.bin");
  EXPECT_EQ(LoadErrorKind(tmp.path()), ErrorKind::kIoFailure);
}

TEST(EmbxTest, LogitsShapeMustMatchClasses) {
  TempDir tmp;
  WriteRawSet(tmp.path(), std::vector<float>(6, 1.0f), {0, 1}, "2");
  WriteRaw(tmp / "logits.bin", std::vector<float>(6, 0.0f));
  WriteManifest(tmp.path(), {{"format_version", "embx-1"},
                             {"tensors", {TensorEntry("fe", "f32", {2, 3}),
                                          TensorEntry("labels", "i64", {2}),
                                          TensorEntry("logits", "f32", {2, 3})}},
                             {"metadata", {{"num_classes", "2"}}}});
  EXPECT_EQ(LoadErrorKind(tmp.path()), ErrorKind::kShapeMismatch);
}

TEST(EmbxTest, NumClassesDefaultsToMaxLabelPlusOne) {
  TempDir tmp;
  WriteRaw(tmp / "fe.bin", std::vector<float>(6, 1.0f));
  WriteRaw(tmp / "labels.bin", std::vector<std::int64_t>{0, 4});
  WriteManifest(tmp.path(), {{"format_version", "embx-1"},
                             {"tensors", {TensorEntry("fe", "f32", {2, 3}),
                                          TensorEntry("labels", "i64", {2})}}});
  EXPECT_EQ(ReadEmbeddingSet(tmp.path()).num_classes, 5u);
}

TEST(EmbxTest, KindMismatchIsReported) {
  TempDir tmp;
  WriteEmbx(MakeHead(1, 1, {1}), tmp.path());
  EXPECT_THROW(ReadEmbeddingSet(tmp.path()), Error);
  EXPECT_NO_THROW(ReadClassifierHead(tmp.path()));
}

}  // namespace
}  // namespace imblens
