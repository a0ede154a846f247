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

// Reads embeddings produced by the reference numpy exporter script in
// tests/fixtures and checks them against the native decomposition.

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "imblens/decomposition.h"
#include "imblens/embx.h"
#include "support/oracles.h"
#include "support/test_support.h"

namespace imblens {
namespace {

const std::filesystem::path kFixture =
    std::filesystem::path(IMBLENS_FIXTURE_DIR) / "exporter_toy";

TEST(ExporterFixtureTest, ManifestsDescribeTheToyNetwork) {
  const EmbxManifest manifest = ReadEmbxManifest(kFixture / "train");
  EXPECT_EQ(manifest.format_version, kEmbxFormatVersion);
  EXPECT_EQ(manifest.metadata.at("split"), "train");
  const EmbeddingSet train = ReadEmbeddingSet(kFixture / "train");
  EXPECT_EQ(train.num_instances(), 40u);
  EXPECT_EQ(train.feature_dim(), 8u);
  EXPECT_EQ(train.num_classes, 3u);
  EXPECT_EQ(train.split, Split::kTrain);
  EXPECT_TRUE(train.logits.has_value());
  const ClassifierHead head = ReadClassifierHead(kFixture / "head");
  EXPECT_EQ(head.num_classes(), 3u);
  EXPECT_TRUE(head.bias.has_value());
}

TEST(ExporterFixtureTest, ExportedLogitsAreReconstructed) {
  const ClassifierHead head = ReadClassifierHead(kFixture / "head");
  for (const char* split : {"train", "test"}) {
    const EmbeddingSet set = ReadEmbeddingSet(kFixture / split);
    const Decomposition d(set, head);
    const ConsistencyReport report = CheckExportedLogits(d, *set.logits, 1e-4);
    EXPECT_LT(report.max_abs_err, 1e-4) << split;
    EXPECT_EQ(report.mismatched_argmax_count, 0u) << split;
    EXPECT_TRUE(report.within_tolerance);
    for (std::size_t n = 0; n < set.num_instances(); ++n) {
      for (std::size_t c = 0; c < 3; ++c) {
        const double exported = (*set.logits)(n, c);
        EXPECT_LE(std::abs(d.logit(n, c) - exported),
                  1e-4 * std::max(1.0, std::abs(exported)));
        EXPECT_NEAR(d.logit(n, c), testing::OracleLogit(set, head, n, c), 1e-12);
      }
    }
  }
}

TEST(ExporterFixtureTest, RewritingReproducesPayloadBytes) {
  testing::TempDir dir;
  const EmbeddingSet set = ReadEmbeddingSet(kFixture / "test");
  WriteEmbx(set, dir.path());
  for (const char* file : {"fe.bin", "labels.bin", "logits.bin"}) {
    EXPECT_EQ(testing::ReadBytes(dir / file),
              testing::ReadBytes(kFixture / "test" / file))
        << file;
  }
}

}  // namespace
}  // namespace imblens
