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

#include "cli/commands.h"

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "cli/run_manifest.h"
#include "imblens/embx.h"
#include "support/test_support.h"

namespace imblens::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const fs::path kFixture = fs::path(IMBLENS_FIXTURE_DIR) / "exporter_toy";

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult Invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = RunCli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

json ReadJson(const fs::path& path) {
  std::ifstream in(path);
  return json::parse(in);
}

std::string ReadText(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string Fixture(const char* part) { return (kFixture / part).string(); }

// Writes the toy decomposition: fe [[2, 1, 0]], weights [[1, 0, 2], [0, 1, 1]].
void WriteToy(const testing::TempDir& dir) {
  WriteEmbx(testing::ToySet(), dir / "fe");
  WriteEmbx(testing::ToyHead(), dir / "head");
}

TEST(CliTest, InspectSummarizesSetsAndHeads) {
  const CliResult set = Invoke({"inspect", Fixture("train")});
  ASSERT_EQ(set.code, kExitOk) << set.err;
  EXPECT_NE(set.out.find("logits: present"), std::string::npos);
  EXPECT_NE(set.out.find("class counts:"), std::string::npos);
  EXPECT_NE(set.out.find("instances: 40"), std::string::npos);

  const CliResult head = Invoke({"inspect", Fixture("head"), "--json"});
  ASSERT_EQ(head.code, kExitOk) << head.err;
  const json doc = json::parse(head.out);
  EXPECT_EQ(doc["kind"], "classifier_head");
  EXPECT_EQ(doc["num_classes"], 3);
}

TEST(CliTest, TopKOnToyDecomposition) {
  testing::TempDir dir;
  WriteToy(dir);
  const CliResult r = Invoke({"topk", (dir / "fe").string(), (dir / "head").string(),
                           "--k", "1", "--out", (dir / "out").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json doc = ReadJson(dir / "out" / "topk.json");
  EXPECT_EQ(doc["overall_coverage"]["1"], 1.0);
  EXPECT_EQ(doc["class_members"]["1"]["0"], json::parse("[[0, 1.0]]"));
  EXPECT_EQ(doc["union_count"]["1"]["0"], 1);
  EXPECT_TRUE(doc["union_count"]["1"]["1"].is_null());
  EXPECT_EQ(doc["run_manifest"]["command"], "topk");
  const std::string csv = ReadText(dir / "out" / "topk_coverage.csv");
  EXPECT_EQ(csv.rfind("class,k,coverage,count\n", 0), 0u);
}

TEST(CliTest, TopKPerInstanceAndFeSpace) {
  const CliResult r = Invoke({"topk", Fixture("test"), Fixture("head"), "--space",
                           "fe", "--fe-mode", "ce-aligned", "--per-instance"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc["space"], "fe");
  EXPECT_EQ(doc["instances"].size(), 20u);
  EXPECT_EQ(doc["instances"][0]["k_indices"].size(), 7u);
}

TEST(CliTest, StatsWritesJsonAndPlotTable) {
  testing::TempDir dir;
  const CliResult r = Invoke({"stats", Fixture("train"), Fixture("head"), "--top",
                           "3", "--out", dir.path().string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json doc = ReadJson(dir / "stats.json");
  EXPECT_EQ(doc["weight_summaries"].size(), 3u);
  EXPECT_TRUE(doc["largest_mean_ce_ratio"].contains("majority_class"));
  const std::string csv = ReadText(dir / "stats_plot.csv");
  EXPECT_EQ(csv.rfind("series,class,rank,identity,value\n", 0), 0u);
}

TEST(CliTest, DivergenceReportsBothMetrics) {
  for (const char* rank : {"topk", "activation"}) {
    const CliResult r = Invoke({"divergence", Fixture("train"), Fixture("test"),
                             Fixture("head"), "--top", "4", "--rank-by", rank});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const json doc = json::parse(r.out);
    EXPECT_GE(doc["fb_train_tp"].get<double>(), 0.0);
    EXPECT_TRUE(doc.contains("overlap_tp"));
    EXPECT_EQ(doc["space"], "fe");
  }
  const CliResult self = Invoke({"divergence", Fixture("train"), Fixture("train"),
                              Fixture("head"), "--top", "4"});
  ASSERT_EQ(self.code, kExitOk) << self.err;
  EXPECT_EQ(json::parse(self.out)["overlap"]["overlap_tp"].is_number(), true);
}

TEST(CliTest, BacChecksExportedLogits) {
  const CliResult r = Invoke({"bac", Fixture("test"), Fixture("head")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_LT(doc["exported_logits"]["max_abs_err"].get<double>(), 1e-4);
  EXPECT_EQ(doc["exported_logits"]["mismatched_argmax_count"], 0);
  EXPECT_EQ(doc["confusion"].size(), 3u);
}

TEST(CliTest, RetrainIsReproducibleForAFixedSeed) {
  testing::TempDir dir;
  const std::vector<std::string> base{
      "retrain", Fixture("train"), "--eval", Fixture("test"), "--epochs", "60",
      "--init", "scaled-uniform", "--seed", "9"};
  auto with_out = [&](const char* name) {
    std::vector<std::string> args = base;
    args.push_back("--out");
    args.push_back((dir / name).string());
    return args;
  };
  ASSERT_EQ(Invoke(with_out("a")).code, kExitOk);
  ASSERT_EQ(Invoke(with_out("b")).code, kExitOk);
  for (const char* file : {"weights.bin", "bias.bin", "manifest.json"}) {
    EXPECT_EQ(testing::ReadBytes(dir / "a" / file), testing::ReadBytes(dir / "b" / file))
        << file;
  }
  const json trace = ReadJson(dir / "a" / "train_trace.json");
  EXPECT_EQ(trace["per_epoch_loss"].size(), 60u);
  EXPECT_EQ(trace["per_epoch_eval_bac"].size(), 60u);
  const ClassifierHead head = ReadClassifierHead(dir / "a");
  EXPECT_EQ(head.num_classes(), 3u);
  EXPECT_EQ(head.feature_dim(), 8u);
}

TEST(CliTest, RetrainWithZeroLearningRateKeepsZeroHead) {
  testing::TempDir dir;
  const CliResult r = Invoke({"retrain", Fixture("train"), "--epochs", "3", "--lr",
                           "0", "--out", dir.path().string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const ClassifierHead head = ReadClassifierHead(dir.path());
  for (float w : head.weights.values()) EXPECT_EQ(w, 0.0f);
}

TEST(CliTest, RetrainDivergenceExitsWithNumericFailure) {
  testing::TempDir dir;
  const CliResult r = Invoke({"retrain", Fixture("train"), "--epochs", "5", "--lr",
                           "1e300", "--schedule", "constant", "--out",
                           dir.path().string()});
  EXPECT_EQ(r.code, kExitNumericFailure);
  EXPECT_NE(r.err.find("Divergence"), std::string::npos);
}

TEST(CliTest, OutputIsDeterministicApartFromTimestamp) {
  testing::TempDir dir;
  auto run = [&](const char* name) {
    const CliResult r = Invoke({"topk", Fixture("train"), Fixture("head"), "--out",
                             (dir / name).string()});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    json doc = ReadJson(dir / name / "topk.json");
    doc["run_manifest"].erase("timestamp");
    return doc;
  };
  const json a = run("a");
  const json b = run("b");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a["run_manifest"]["inputs"][0]["files"].size(), 4u);
  EXPECT_EQ(ReadText(dir / "a" / "topk_coverage.csv"),
            ReadText(dir / "b" / "topk_coverage.csv"));
}

TEST(CliTest, ThreadCountDoesNotChangeResults) {
  const CliResult one = Invoke({"--threads", "1", "stats", Fixture("train"), Fixture("head")});
  const CliResult four = Invoke({"--threads", "4", "stats", Fixture("train"), Fixture("head")});
  json a = json::parse(one.out), b = json::parse(four.out);
  a["run_manifest"].erase("timestamp");
  b["run_manifest"].erase("timestamp");
  EXPECT_EQ(a, b);
}

TEST(CliTest, InputErrorsExitWithTwo) {
  testing::TempDir dir;
  const CliResult missing = Invoke({"inspect", dir.path().string()});
  EXPECT_EQ(missing.code, kExitInputError);
  EXPECT_NE(missing.err.find("MissingManifest"), std::string::npos);

  EXPECT_EQ(Invoke({"topk", Fixture("train"), Fixture("head"), "--k", "0"}).code,
            kExitInputError);
  EXPECT_EQ(Invoke({"frobnicate"}).code, kExitInputError);
  EXPECT_EQ(Invoke({"bac", Fixture("train")}).code, kExitInputError);
  EXPECT_EQ(Invoke({"divergence", Fixture("train"), Fixture("test"), Fixture("head"),
                 "--top", "9"}).code,
            kExitInputError);
}

TEST(CliTest, NegativeFeNeedsExplicitOptIn) {
  testing::TempDir dir;
  WriteEmbx(testing::MakeSet(1, 2, {-1, 2}, {0}, 2), dir / "fe");
  WriteEmbx(testing::MakeHead(2, 2, {1, 0, 0, 1}), dir / "head");
  const CliResult strict = Invoke({"bac", (dir / "fe").string(), (dir / "head").string()});
  EXPECT_EQ(strict.code, kExitInputError);
  EXPECT_NE(strict.err.find("NegativeFE"), std::string::npos);
  const CliResult relaxed = Invoke({"--allow-signed-fe", "bac", (dir / "fe").string(),
                                 (dir / "head").string()});
  EXPECT_EQ(relaxed.code, kExitOk) << relaxed.err;
}

TEST(CliTest, BinaryReportsMissingManifest) {
  testing::TempDir dir;
  const std::string command = std::string(IMBLENS_CLI_BINARY) + " inspect " +
                              dir.path().string() + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), kExitInputError);
}

TEST(RunManifestTest, Sha256OfKnownContent) {
  testing::TempDir dir;
  std::ofstream(dir / "abc") << "abc";
  EXPECT_EQ(Sha256File(dir / "abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // namespace
}  // namespace imblens::cli
