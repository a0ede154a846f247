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

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "cli/report_json.h"
#include "cli/run_manifest.h"
#include "imblens/class_stats.h"
#include "imblens/decomposition.h"
#include "imblens/divergence.h"
#include "imblens/embx.h"
#include "imblens/error.h"
#include "imblens/parallel.h"
#include "imblens/probe_trainer.h"
#include "imblens/topk.h"

namespace imblens::cli {
namespace {
namespace fs = std::filesystem;

struct GlobalOptions {
  std::size_t threads = 0;
  bool allow_signed_fe = false;
};

struct InspectOptions {
  std::string dir;
  bool json = false;
  std::string out;
};

struct TopKCommandOptions {
  std::string fe_dir;
  std::string weights_dir;
  std::vector<std::size_t> k_values{1, 2, 3, 5, 7};
  Space space = Space::kCe;
  FeMode fe_mode = FeMode::kMagnitude;
  GroupBy group_by = GroupBy::kPredicted;
  std::size_t top_m = 10;
  bool per_instance = false;
  std::string out;
};

struct StatsOptions {
  std::string fe_dir;
  std::string weights_dir;
  std::size_t top_m = 10;
  GroupBy group_by = GroupBy::kPredicted;
  double activity_epsilon = 0.0;
  std::optional<std::size_t> majority;
  std::string out;
};

struct DivergenceOptions {
  std::string train_dir;
  std::string test_dir;
  std::string weights_dir;
  Space space = Space::kFe;
  FeMode fe_mode = FeMode::kMagnitude;
  std::size_t top_m = 10;
  std::size_t k = 7;
  RankBy rank_by = RankBy::kTopKMembership;
  std::string out;
};

struct RetrainOptions {
  std::string fe_dir;
  std::string eval_dir;
  std::string out;
  TrainConfig config;
};

struct BacOptions {
  std::string fe_dir;
  std::string weights_dir;
  std::string out;
};

const std::map<std::string, Space> kSpaces{{"ce", Space::kCe}, {"fe", Space::kFe}};
const std::map<std::string, GroupBy> kGroupings{{"predicted", GroupBy::kPredicted},
                                                {"true", GroupBy::kTrue}};
const std::map<std::string, FeMode> kFeModes{{"magnitude", FeMode::kMagnitude},
                                             {"ce-aligned", FeMode::kCeAligned}};
const std::map<std::string, RankBy> kRankings{{"topk", RankBy::kTopKMembership},
                                              {"activation", RankBy::kActivation}};
const std::map<std::string, InitScheme> kInits{
    {"zeros", InitScheme::kZeros}, {"scaled-uniform", InitScheme::kScaledUniform}};
const std::map<std::string, LrSchedule> kSchedules{
    {"cosine", LrSchedule::kCosine}, {"constant", LrSchedule::kConstant}};

template <typename T>
std::string NameOf(const std::map<std::string, T>& table, T value) {
  for (const auto& [name, v] : table) {
    if (v == value) return name;
  }
  return "";
}

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::trunc);
  file << text;
  if (!file) throw Error(ErrorKind::kIoFailure, "failed writing " + path.string());
}

// Writes the JSON document to out_dir/file_name, or to stdout when no
// output directory was given.
void EmitJson(const json& doc, const std::string& out_dir,
              const std::string& file_name, std::ostream& out) {
  if (out_dir.empty()) {
    out << doc.dump(2) << '\n';
    return;
  }
  WriteText(fs::path(out_dir) / file_name, doc.dump(2) + "\n");
}

RunManifest MakeManifest(std::string command, std::vector<fs::path> inputs,
                         json parameters) {
  RunManifest manifest;
  manifest.command = std::move(command);
  manifest.inputs = std::move(inputs);
  manifest.parameters = std::move(parameters);
  manifest.tool_version = std::string(ToolVersion());
  manifest.timestamp = CurrentTimestamp();
  return manifest;
}

EmbeddingSet LoadSet(const std::string& dir, const GlobalOptions& global,
                     std::ostream& err) {
  std::vector<std::string> warnings;
  EmbeddingSet set =
      ReadEmbeddingSet(dir, LoadOptions{global.allow_signed_fe}, &warnings);
  for (const std::string& w : warnings) err << "warning: " << dir << ": " << w << '\n';
  return set;
}

std::string FormatShape(const std::vector<std::int64_t>& shape) {
  std::ostringstream s;
  s << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) s << (i ? ", " : "") << shape[i];
  s << ']';
  return s.str();
}

int RunInspect(const InspectOptions& opts, const GlobalOptions& global,
               std::ostream& out, std::ostream& err) {
  EmbxContents contents = ReadEmbx(opts.dir, LoadOptions{global.allow_signed_fe});
  for (const std::string& w : contents.warnings) err << "warning: " << w << '\n';

  json tensors = json::array();
  for (const TensorDecl& t : contents.manifest.tensors) {
    tensors.push_back({{"name", t.name},
                       {"file", t.file},
                       {"dtype", DTypeName(t.dtype)},
                       {"shape", t.shape}});
  }
  json summary = {{"format_version", contents.manifest.format_version},
                  {"tensors", tensors},
                  {"metadata", contents.manifest.metadata},
                  {"warnings", contents.warnings}};

  std::ostringstream text;
  if (const auto* set = std::get_if<EmbeddingSet>(&contents.object)) {
    std::vector<std::size_t> counts(set->num_classes, 0);
    for (std::int64_t label : set->labels) ++counts[static_cast<std::size_t>(label)];
    summary["kind"] = "embedding_set";
    summary["num_instances"] = set->num_instances();
    summary["feature_dim"] = set->feature_dim();
    summary["num_classes"] = set->num_classes;
    summary["split"] = SplitName(set->split);
    summary["class_counts"] = counts;
    summary["logits"] = set->logits ? "present" : "absent";

    text << "EMBX embedding set (" << contents.manifest.format_version << ")\n";
    for (const TensorDecl& t : contents.manifest.tensors) {
      text << "  " << t.name << ' ' << DTypeName(t.dtype) << ' '
           << FormatShape(t.shape) << "  " << t.file << '\n';
    }
    text << "instances: " << set->num_instances()
         << "  features: " << set->feature_dim()
         << "  classes: " << set->num_classes
         << "  split: " << SplitName(set->split) << '\n';
    text << "logits: " << (set->logits ? "present" : "absent") << '\n';
    text << "class counts:";
    for (std::size_t c = 0; c < counts.size(); ++c) text << ' ' << c << ':' << counts[c];
    text << '\n';
  } else {
    const auto& head = std::get<ClassifierHead>(contents.object);
    summary["kind"] = "classifier_head";
    summary["num_classes"] = head.num_classes();
    summary["feature_dim"] = head.feature_dim();
    summary["bias"] = head.bias ? "present" : "absent";

    text << "EMBX classifier head (" << contents.manifest.format_version << ")\n";
    for (const TensorDecl& t : contents.manifest.tensors) {
      text << "  " << t.name << ' ' << DTypeName(t.dtype) << ' '
           << FormatShape(t.shape) << "  " << t.file << '\n';
    }
    text << "classes: " << head.num_classes()
         << "  features: " << head.feature_dim() << '\n';
    text << "bias: " << (head.bias ? "present" : "absent") << '\n';
  }

  if (opts.json) {
    out << summary.dump(2) << '\n';
  } else {
    out << text.str();
  }
  if (!opts.out.empty()) {
    summary["run_manifest"] =
        ToJson(MakeManifest("inspect", {opts.dir}, json::object()));
    WriteText(opts.out, summary.dump(2) + "\n");
  }
  return kExitOk;
}

int RunTopK(const TopKCommandOptions& opts, const GlobalOptions& global,
            std::ostream& out, std::ostream& err) {
  const EmbeddingSet set = LoadSet(opts.fe_dir, global, err);
  const ClassifierHead head = ReadClassifierHead(opts.weights_dir);
  const Decomposition d(set, head);
  const TopKOptions topk{opts.space, opts.fe_mode};
  const std::size_t max_k = *std::max_element(opts.k_values.begin(), opts.k_values.end());

  const CoverageReport coverage =
      CoverageRatios(d, set.labels, opts.k_values, topk, opts.group_by);

  json members = json::object();
  json unions = json::object();
  for (std::size_t k : opts.k_values) {
    const std::string key = std::to_string(k);
    json class_members = json::object();
    const auto lists = ClassMembers(d, set.labels, k, opts.top_m, topk, opts.group_by);
    for (std::size_t c = 0; c < lists.size(); ++c) {
      if (!lists[c]) {
        class_members[std::to_string(c)] = nullptr;
        continue;
      }
      json entries = json::array();
      for (const ClassMember& m : *lists[c]) {
        entries.push_back(json::array({m.identity, m.ratio}));
      }
      class_members[std::to_string(c)] = entries;
    }
    members[key] = class_members;

    json union_counts = json::object();
    const auto counts = UnionCounts(d, set.labels, k, topk, opts.group_by);
    for (std::size_t c = 0; c < counts.size(); ++c) {
      union_counts[std::to_string(c)] = counts[c] ? json(*counts[c]) : json(nullptr);
    }
    unions[key] = union_counts;
  }

  json parameters = {{"k", opts.k_values},
                     {"space", SpaceName(opts.space)},
                     {"fe_mode", FeModeName(opts.fe_mode)},
                     {"group_by", GroupByName(opts.group_by)},
                     {"top_m", opts.top_m}};
  json doc = ToJson(coverage);
  doc["space"] = SpaceName(opts.space);
  doc["fe_mode"] = FeModeName(opts.fe_mode);
  doc["group_by"] = GroupByName(opts.group_by);
  doc["class_members"] = members;
  doc["union_count"] = unions;
  doc["logit_contributions"] =
      ToJson(LogitContributions(d, set.labels, max_k, opts.group_by));
  if (opts.per_instance) {
    json instances = json::array();
    for (std::size_t n = 0; n < d.num_instances(); ++n) {
      instances.push_back(ToJson(ComputeInstanceTopK(d, n, max_k, topk)));
    }
    doc["instances"] = instances;
  }
  doc["run_manifest"] = ToJson(
      MakeManifest("topk", {opts.fe_dir, opts.weights_dir}, parameters));

  EmitJson(doc, opts.out, "topk.json", out);
  if (!opts.out.empty()) {
    std::ostringstream csv;
    csv << "class,k,coverage,count\n";
    for (std::size_t c = 0; c < coverage.per_class_coverage.size(); ++c) {
      for (std::size_t ki = 0; ki < coverage.k_values.size(); ++ki) {
        csv << c << ',' << coverage.k_values[ki] << ',';
        if (const auto& v = coverage.per_class_coverage[c][ki]) csv << json(*v).dump();
        csv << ',' << coverage.class_counts[c] << '\n';
      }
    }
    WriteText(fs::path(opts.out) / "topk_coverage.csv", csv.str());
  }
  return kExitOk;
}

int RunStats(const StatsOptions& opts, const GlobalOptions& global,
             std::ostream& out, std::ostream& err) {
  const EmbeddingSet set = LoadSet(opts.fe_dir, global, err);
  const ClassifierHead head = ReadClassifierHead(opts.weights_dir);
  const Decomposition d(set, head);

  const auto profiles = ClassProfiles(
      d, set.labels, ProfileOptions{opts.group_by, opts.activity_epsilon});
  const auto summaries = WeightSummaries(head);

  json profile_json = json::array();
  std::vector<std::size_t> empty_classes;
  for (std::size_t c = 0; c < profiles.size(); ++c) {
    if (profiles[c]) {
      profile_json.push_back(ToJson(*profiles[c], opts.top_m));
    } else {
      empty_classes.push_back(c);
    }
  }
  json weight_json = json::array();
  for (const WeightSummary& s : summaries) weight_json.push_back(ToJson(s, opts.top_m));

  const std::size_t majority = opts.majority.value_or(MajorityClass(set));
  json ratio_json = {{"majority_class", majority}};
  try {
    ratio_json.update(ToJson(LargestMeanCeRatio(profiles, majority)));
  } catch (const Error& e) {
    ratio_json["ratio"] = nullptr;
    ratio_json["note"] = e.what();
  }

  json parameters = {{"top_m", opts.top_m},
                     {"group_by", GroupByName(opts.group_by)},
                     {"activity_epsilon", opts.activity_epsilon},
                     {"majority_class", majority}};
  json doc = {{"profiles", profile_json},
              {"empty_classes", empty_classes},
              {"weight_summaries", weight_json},
              {"largest_mean_ce_ratio", ratio_json},
              {"run_manifest", ToJson(MakeManifest(
                                   "stats", {opts.fe_dir, opts.weights_dir},
                                   parameters))}};
  EmitJson(doc, opts.out, "stats.json", out);

  if (!opts.out.empty()) {
    std::ostringstream csv;
    csv << "series,class,rank,identity,value\n";
    auto emit = [&](const char* series, std::size_t c,
                    std::span<const double> values) {
      const auto top = TopIndices(values, opts.top_m);
      for (std::size_t r = 0; r < top.size(); ++r) {
        csv << series << ',' << c << ',' << r << ',' << top[r] << ','
            << json(values[top[r]]).dump() << '\n';
      }
    };
    for (const auto& p : profiles) {
      if (!p) continue;
      emit("mean_fe", p->class_index, p->mean_fe);
      emit("mean_ce", p->class_index, p->mean_ce);
    }
    for (const WeightSummary& s : summaries) {
      std::vector<double> magnitudes(s.top_weights.size());
      for (const auto& [id, value] : s.top_weights) magnitudes[id] = value;
      emit("weight_abs", s.class_index, magnitudes);
    }
    WriteText(fs::path(opts.out) / "stats_plot.csv", csv.str());
  }
  return kExitOk;
}

int RunDivergence(const DivergenceOptions& opts, const GlobalOptions& global,
                  std::ostream& out, std::ostream& err) {
  const EmbeddingSet train = LoadSet(opts.train_dir, global, err);
  const EmbeddingSet test = LoadSet(opts.test_dir, global, err);
  const ClassifierHead head = ReadClassifierHead(opts.weights_dir);
  const Decomposition d_train(train, head);
  const Decomposition d_test(test, head);

  const auto partitions =
      PartitionOutcomes(test.labels, d_test.predictions(), test.num_classes);
  const FrobeniusReport frobenius =
      FrobeniusDivergence(d_train, d_test, partitions, opts.space);
  OverlapOptions overlap_options;
  overlap_options.topk = TopKOptions{opts.space, opts.fe_mode};
  overlap_options.k = opts.k;
  overlap_options.top_m = opts.top_m;
  overlap_options.rank_by = opts.rank_by;
  const OverlapReport overlap =
      IdentityOverlap(d_train, d_test, partitions, overlap_options);

  json parameters = {{"space", SpaceName(opts.space)},
                     {"fe_mode", FeModeName(opts.fe_mode)},
                     {"top_m", opts.top_m},
                     {"k", opts.k},
                     {"rank_by", NameOf(kRankings, opts.rank_by)}};
  json doc = {{"space", SpaceName(opts.space)},
              {"partitions", ToJson(std::span<const OutcomePartition>(partitions))},
              {"frobenius", ToJson(frobenius)},
              {"overlap", ToJson(overlap)},
              {"fb_train_tp", frobenius.fb_train_tp},
              {"fb_train_fp", frobenius.fb_train_fp},
              {"overlap_tp", OptionalJson(overlap.overlap_tp)},
              {"overlap_fp", OptionalJson(overlap.overlap_fp)},
              {"run_manifest",
               ToJson(MakeManifest("divergence",
                                   {opts.train_dir, opts.test_dir, opts.weights_dir},
                                   parameters))}};
  EmitJson(doc, opts.out, "divergence.json", out);
  return kExitOk;
}

int RunRetrain(const RetrainOptions& opts, const GlobalOptions& global,
               std::ostream& out, std::ostream& err) {
  const EmbeddingSet train = LoadSet(opts.fe_dir, global, err);
  std::optional<EmbeddingSet> eval;
  if (!opts.eval_dir.empty()) eval = LoadSet(opts.eval_dir, global, err);
  std::vector<fs::path> inputs{opts.fe_dir};
  if (eval) inputs.emplace_back(opts.eval_dir);

  const TrainConfig& cfg = opts.config;
  json parameters = {{"epochs", cfg.epochs},
                     {"learning_rate", cfg.learning_rate},
                     {"schedule", NameOf(kSchedules, cfg.schedule)},
                     {"final_lr_fraction", cfg.final_lr_fraction},
                     {"weight_decay", cfg.weight_decay},
                     {"seed", cfg.seed},
                     {"init", NameOf(kInits, cfg.init)},
                     {"class_balanced_loss", cfg.class_balanced_loss},
                     {"eval", opts.eval_dir}};
  // Checksum inputs before anything is written, in case out aliases an input.
  const json manifest = ToJson(MakeManifest("retrain", inputs, parameters));

  const TrainTrace trace = RetrainHead(train, cfg, eval ? &*eval : nullptr);
  WriteEmbx(trace.final_head, opts.out);
  json doc = ToJson(trace);
  doc["run_manifest"] = manifest;
  WriteText(fs::path(opts.out) / "train_trace.json", doc.dump(2) + "\n");

  out << "best epoch " << trace.best_epoch << " of " << cfg.epochs << ", "
      << (eval ? "eval" : "train") << " BAC " << trace.best_bac << ", final loss "
      << trace.per_epoch_loss.back() << "\nhead written to " << opts.out << '\n';
  return kExitOk;
}

int RunBac(const BacOptions& opts, const GlobalOptions& global,
           std::ostream& out, std::ostream& err) {
  const EmbeddingSet set = LoadSet(opts.fe_dir, global, err);
  const ClassifierHead head = ReadClassifierHead(opts.weights_dir);
  const Decomposition d(set, head);

  json doc = ToJson(Accuracy(d, set.labels));
  if (set.logits) {
    doc["exported_logits"] = ToJson(CheckExportedLogits(d, *set.logits, 1e-4));
  }
  doc["run_manifest"] =
      ToJson(MakeManifest("bac", {opts.fe_dir, opts.weights_dir}, json::object()));
  EmitJson(doc, opts.out, "bac.json", out);
  return kExitOk;
}

std::size_t ThreadsFromEnvironment() {
  const char* value = std::getenv("IMBLENS_THREADS");
  if (value == nullptr) return 0;
  char* end = nullptr;
  unsigned long parsed = std::strtoul(value, &end, 10);
  return (end != value && *end == '\0') ? parsed : 0;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"imblens: decision-process diagnostics for linear classifier heads"};
  app.name("imblens");
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--threads", global.threads,
                 "Worker thread cap (default: IMBLENS_THREADS, else all cores)");
  app.add_flag("--allow-signed-fe", global.allow_signed_fe,
               "Warn instead of failing on negative feature embeddings");

  InspectOptions inspect;
  auto* inspect_cmd = app.add_subcommand("inspect", "Summarize an EMBX directory");
  inspect_cmd->add_option("dir", inspect.dir, "EMBX directory")->required();
  inspect_cmd->add_flag("--json", inspect.json, "Print the JSON summary");
  inspect_cmd->add_option("--out", inspect.out, "Also write the JSON summary here");

  TopKCommandOptions topk;
  auto* topk_cmd = app.add_subcommand("topk", "Top-K coverage, members, unions");
  topk_cmd->add_option("fe_dir", topk.fe_dir, "Embedding set")->required();
  topk_cmd->add_option("weights_dir", topk.weights_dir, "Classifier head")->required();
  topk_cmd->add_option("--k", topk.k_values, "K values, comma separated")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  topk_cmd->add_option("--space", topk.space)
      ->transform(CLI::CheckedTransformer(kSpaces));
  topk_cmd->add_option("--fe-mode", topk.fe_mode)
      ->transform(CLI::CheckedTransformer(kFeModes));
  topk_cmd->add_option("--group-by", topk.group_by)
      ->transform(CLI::CheckedTransformer(kGroupings));
  topk_cmd->add_option("--top-m", topk.top_m, "Class members listed per class")
      ->check(CLI::PositiveNumber);
  topk_cmd->add_flag("--per-instance", topk.per_instance,
                     "Include each instance's top-K at the largest K");
  topk_cmd->add_option("--out", topk.out, "Output directory (JSON + CSV)");

  StatsOptions stats;
  auto* stats_cmd = app.add_subcommand("stats", "Class profiles and weight summaries");
  stats_cmd->add_option("fe_dir", stats.fe_dir, "Embedding set")->required();
  stats_cmd->add_option("weights_dir", stats.weights_dir, "Classifier head")->required();
  stats_cmd->add_option("--top", stats.top_m, "Ranked entries per class")
      ->check(CLI::PositiveNumber);
  stats_cmd->add_option("--group-by", stats.group_by)
      ->transform(CLI::CheckedTransformer(kGroupings));
  stats_cmd->add_option("--activity-epsilon", stats.activity_epsilon,
                        "fe above this value counts as active");
  stats_cmd->add_option("--majority", stats.majority,
                        "Majority class (default: largest class in fe_dir)");
  stats_cmd->add_option("--out", stats.out, "Output directory (JSON + CSV)");

  DivergenceOptions divergence;
  auto* div_cmd = app.add_subcommand("divergence", "Train vs test TP/FP divergence");
  div_cmd->add_option("train_dir", divergence.train_dir, "Train embedding set")->required();
  div_cmd->add_option("test_dir", divergence.test_dir, "Test embedding set")->required();
  div_cmd->add_option("weights_dir", divergence.weights_dir, "Classifier head")->required();
  div_cmd->add_option("--space", divergence.space)
      ->transform(CLI::CheckedTransformer(kSpaces));
  div_cmd->add_option("--fe-mode", divergence.fe_mode)
      ->transform(CLI::CheckedTransformer(kFeModes));
  div_cmd->add_option("--top", divergence.top_m, "Identities compared per class")
      ->check(CLI::PositiveNumber);
  div_cmd->add_option("--k", divergence.k, "Per-instance top-K size")
      ->check(CLI::PositiveNumber);
  div_cmd->add_option("--rank-by", divergence.rank_by)
      ->transform(CLI::CheckedTransformer(kRankings));
  div_cmd->add_option("--out", divergence.out, "Output directory");

  RetrainOptions retrain;
  auto* retrain_cmd = app.add_subcommand("retrain", "Retrain the linear head on stored FE");
  retrain_cmd->add_option("fe_dir", retrain.fe_dir, "Training embedding set")->required();
  retrain_cmd->add_option("--out", retrain.out, "Output head directory")->required();
  retrain_cmd->add_option("--eval", retrain.eval_dir, "Embedding set for epoch selection");
  retrain_cmd->add_option("--epochs", retrain.config.epochs)->check(CLI::PositiveNumber);
  retrain_cmd->add_option("--lr", retrain.config.learning_rate)
      ->check(CLI::NonNegativeNumber);
  retrain_cmd->add_option("--final-lr-fraction", retrain.config.final_lr_fraction)
      ->check(CLI::Range(0.0, 1.0));
  retrain_cmd->add_option("--schedule", retrain.config.schedule)
      ->transform(CLI::CheckedTransformer(kSchedules));
  retrain_cmd->add_option("--weight-decay", retrain.config.weight_decay)
      ->check(CLI::NonNegativeNumber);
  retrain_cmd->add_option("--seed", retrain.config.seed);
  retrain_cmd->add_option("--init", retrain.config.init)
      ->transform(CLI::CheckedTransformer(kInits));
  retrain_cmd->add_flag("--class-balanced-loss", retrain.config.class_balanced_loss);

  BacOptions bac;
  auto* bac_cmd = app.add_subcommand("bac", "Balanced accuracy and confusion matrix");
  bac_cmd->add_option("fe_dir", bac.fe_dir, "Embedding set")->required();
  bac_cmd->add_option("weights_dir", bac.weights_dir, "Classifier head")->required();
  bac_cmd->add_option("--out", bac.out, "Output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  if (!app.count("--threads")) global.threads = ThreadsFromEnvironment();
  SetMaxThreads(global.threads);

  try {
    if (inspect_cmd->parsed()) return RunInspect(inspect, global, out, err);
    if (topk_cmd->parsed()) return RunTopK(topk, global, out, err);
    if (stats_cmd->parsed()) return RunStats(stats, global, out, err);
    if (div_cmd->parsed()) return RunDivergence(divergence, global, out, err);
    if (retrain_cmd->parsed()) return RunRetrain(retrain, global, out, err);
    if (bac_cmd->parsed()) return RunBac(bac, global, out, err);
  } catch (const TrainingDiverged& e) {
    err << e.what() << '\n';
    return kExitNumericFailure;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return IsInputError(e.kind()) ? kExitInputError : kExitNumericFailure;
  } catch (const fs::filesystem_error& e) {
    err << "IoFailure: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitNumericFailure;
  }
  return kExitInputError;
}

}  // namespace imblens::cli
