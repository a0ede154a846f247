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

#include "cli/report_json.h"

#include <string>
#include <vector>

namespace imblens::cli {
namespace {

std::string Key(std::size_t value) { return std::to_string(value); }

json RankedPairs(std::span<const double> values, std::size_t top_m) {
  json pairs = json::array();
  for (std::size_t id : TopIndices(values, top_m)) {
    pairs.push_back(json::array({id, values[id]}));
  }
  return pairs;
}

}  // namespace

json OptionalJson(const std::optional<double>& value) {
  return value ? json(*value) : json(nullptr);
}

std::string SpaceName(Space space) { return space == Space::kCe ? "ce" : "fe"; }

std::string GroupByName(GroupBy group_by) {
  return group_by == GroupBy::kPredicted ? "predicted" : "true";
}

std::string FeModeName(FeMode mode) {
  return mode == FeMode::kMagnitude ? "magnitude" : "ce-aligned";
}

json ToJson(const AccuracyReport& report) {
  json recall = json::array();
  for (const auto& r : report.per_class_recall) recall.push_back(OptionalJson(r));
  json confusion = json::array();
  for (std::size_t r = 0; r < report.confusion.rows(); ++r) {
    auto row = report.confusion.row(r);
    confusion.push_back(std::vector<std::int64_t>(row.begin(), row.end()));
  }
  return {{"per_class_recall", recall},
          {"absent_classes", report.absent_classes},
          {"bac", report.bac},
          {"overall_accuracy", report.overall_accuracy},
          {"confusion", confusion}};
}

json ToJson(const ConsistencyReport& report) {
  return {{"max_abs_err", report.max_abs_err},
          {"mismatched_argmax_count", report.mismatched_argmax_count},
          {"within_tolerance", report.within_tolerance}};
}

json ToJson(const CoverageReport& report) {
  json overall = json::object();
  for (std::size_t ki = 0; ki < report.k_values.size(); ++ki) {
    overall[Key(report.k_values[ki])] = report.overall_coverage[ki];
  }
  json per_class = json::object();
  for (std::size_t c = 0; c < report.per_class_coverage.size(); ++c) {
    json row = json::object();
    for (std::size_t ki = 0; ki < report.k_values.size(); ++ki) {
      row[Key(report.k_values[ki])] = OptionalJson(report.per_class_coverage[c][ki]);
    }
    per_class[Key(c)] = row;
  }
  return {{"k_values", report.k_values},
          {"overall_coverage", overall},
          {"per_class_coverage", per_class},
          {"class_counts", report.class_counts},
          {"empty_classes", report.empty_classes},
          {"minimal_k", report.minimal_k}};
}

json ToJson(const InstanceTopK& topk) {
  return {{"instance", topk.instance},
          {"reference_class", topk.reference_class},
          {"adversary_class",
           topk.adversary_class ? json(*topk.adversary_class) : json(nullptr)},
          {"adversary_logit", topk.adversary_class ? json(topk.adversary_logit)
                                                   : json(nullptr)},
          {"k_indices", topk.k_indices},
          {"k_values", topk.k_values},
          {"covered", topk.covered}};
}

json ToJson(const ContributionReport& report) {
  json per_class = json::object();
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const auto& entry = report.per_class[c];
    if (!entry) {
      per_class[Key(c)] = nullptr;
      continue;
    }
    per_class[Key(c)] = {{"mean_fractions", entry->mean_fractions},
                         {"largest", entry->largest},
                         {"included", entry->included}};
  }
  return {{"k", report.k},
          {"per_class", per_class},
          {"excluded_non_positive", report.excluded_non_positive}};
}

json ToJson(const FrobeniusReport& report) {
  json per_class = json::object();
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    per_class[Key(c)] = {{"tp", OptionalJson(report.per_class[c].tp)},
                         {"fp", OptionalJson(report.per_class[c].fp)}};
  }
  return {{"space", SpaceName(report.space)},
          {"fb_train_tp", report.fb_train_tp},
          {"fb_train_fp", report.fb_train_fp},
          {"per_class", per_class},
          {"excluded_tp", report.excluded_tp},
          {"excluded_fp", report.excluded_fp}};
}

json ToJson(const OverlapReport& report) {
  json per_class = json::object();
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    per_class[Key(c)] = {{"tp", OptionalJson(report.per_class[c].tp)},
                         {"fp", OptionalJson(report.per_class[c].fp)}};
  }
  return {{"overlap_tp", OptionalJson(report.overlap_tp)},
          {"overlap_fp", OptionalJson(report.overlap_fp)},
          {"per_class", per_class},
          {"excluded_tp", report.excluded_tp},
          {"excluded_fp", report.excluded_fp}};
}

json ToJson(std::span<const OutcomePartition> partitions) {
  json out = json::object();
  for (const OutcomePartition& p : partitions) {
    out[Key(p.class_index)] = {{"tp", p.tp.size()},
                               {"fp", p.fp.size()},
                               {"fn", p.fn.size()}};
  }
  return out;
}

json ToJson(const TrainTrace& trace) {
  return {{"per_epoch_loss", trace.per_epoch_loss},
          {"per_epoch_bac", trace.per_epoch_bac},
          {"per_epoch_eval_bac", trace.per_epoch_eval_bac},
          {"best_epoch", trace.best_epoch},
          {"best_bac", trace.best_bac},
          {"final_train_bac",
           trace.per_epoch_bac.empty() ? json(nullptr)
                                       : json(trace.per_epoch_bac[trace.best_epoch])}};
}

json ToJson(const MeanCeRatio& ratio) {
  return {{"majority_max", ratio.majority_max},
          {"others_avg", ratio.others_avg},
          {"ratio", OptionalJson(ratio.ratio)}};
}

json ToJson(const ClassProfile& profile, std::size_t top_m) {
  return {{"class", profile.class_index},
          {"count", profile.count},
          {"mean_fe", profile.mean_fe},
          {"mean_ce", profile.mean_ce},
          {"fe_frequency", profile.fe_frequency},
          {"top_mean_fe", RankedPairs(profile.mean_fe, top_m)},
          {"top_mean_ce", RankedPairs(profile.mean_ce, top_m)}};
}

json ToJson(const WeightSummary& summary, std::size_t top_m) {
  json top = json::array();
  for (std::size_t i = 0; i < std::min(top_m, summary.top_weights.size()); ++i) {
    top.push_back(json::array({summary.top_weights[i].first,
                               summary.top_weights[i].second}));
  }
  return {{"class", summary.class_index},
          {"top_weights", top},
          {"top10_abs_sum", summary.top10_abs_sum},
          {"max_abs_weight", summary.max_abs_weight}};
}

}  // namespace imblens::cli
