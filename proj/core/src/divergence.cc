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

#include "imblens/divergence.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "imblens/class_stats.h"
#include "imblens/error.h"

namespace imblens {
namespace {

void CheckCompatible(const Decomposition& train, const Decomposition& test) {
  if (train.feature_dim() != test.feature_dim() ||
      train.num_classes() != test.num_classes()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "train and test differ in feature width or class count");
  }
}

void CheckPartitions(const Decomposition& test,
                     std::span<const OutcomePartition> partitions) {
  if (partitions.size() != test.num_classes()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "need one outcome partition per class");
  }
  for (const OutcomePartition& p : partitions) {
    for (const auto* set : {&p.tp, &p.fp, &p.fn}) {
      for (std::size_t n : *set) {
        if (n >= test.num_instances()) {
          throw Error(ErrorKind::kInvalidArgument,
                      "partition index " + std::to_string(n) + " out of range");
        }
      }
    }
  }
}

std::vector<std::vector<std::size_t>> TrainGroups(const Decomposition& train) {
  std::vector<std::vector<std::size_t>> groups(train.num_classes());
  const auto& labels = train.set().labels;
  for (std::size_t n = 0; n < labels.size(); ++n) {
    groups[static_cast<std::size_t>(labels[n])].push_back(n);
  }
  return groups;
}

std::vector<double> MeanVector(const Decomposition& d, Space space,
                               std::span<const std::size_t> instances,
                               std::size_t class_index) {
  const std::size_t width = d.feature_dim();
  std::vector<double> mean(width, 0.0);
  std::vector<double> row(width);
  for (std::size_t n : instances) {
    d.SpaceRow(space, n, class_index, row);
    for (std::size_t h = 0; h < width; ++h) mean[h] += row[h];
  }
  const auto count = static_cast<double>(instances.size());
  for (double& v : mean) v /= count;
  return mean;
}

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return sum;
}

double OverlapFraction(std::span<const std::size_t> a,
                       std::span<const std::size_t> b, std::size_t top_m) {
  std::vector<std::size_t> sa(a.begin(), a.end());
  std::vector<std::size_t> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::vector<std::size_t> common;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(),
                        std::back_inserter(common));
  return static_cast<double>(common.size()) / static_cast<double>(top_m);
}

std::optional<double> MeanOf(std::span<const std::optional<double>> values) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

}  // namespace

std::vector<OutcomePartition> PartitionOutcomes(
    std::span<const std::int64_t> labels,
    std::span<const std::size_t> predictions, std::size_t num_classes) {
  if (labels.size() != predictions.size()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "label and prediction counts differ");
  }
  std::vector<OutcomePartition> partitions(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) partitions[c].class_index = c;
  for (std::size_t n = 0; n < labels.size(); ++n) {
    if (labels[n] < 0 || static_cast<std::size_t>(labels[n]) >= num_classes ||
        predictions[n] >= num_classes) {
      throw Error(ErrorKind::kLabelOutOfRange,
                  "class index at instance " + std::to_string(n) + " out of range");
    }
    const auto truth = static_cast<std::size_t>(labels[n]);
    const std::size_t pred = predictions[n];
    if (truth == pred) {
      partitions[truth].tp.push_back(n);
    } else {
      partitions[truth].fn.push_back(n);
      partitions[pred].fp.push_back(n);
    }
  }
  return partitions;
}

FrobeniusReport FrobeniusDivergence(const Decomposition& train,
                                    const Decomposition& test,
                                    std::span<const OutcomePartition> partitions,
                                    Space space) {
  CheckCompatible(train, test);
  CheckPartitions(test, partitions);
  const auto train_groups = TrainGroups(train);

  FrobeniusReport report;
  report.space = space;
  report.per_class.resize(train.num_classes());
  double tp_squared = 0.0;
  double fp_squared = 0.0;
  for (std::size_t c = 0; c < train.num_classes(); ++c) {
    const OutcomePartition& p = partitions[c];
    if (train_groups[c].empty()) {
      report.excluded_tp.push_back(c);
      report.excluded_fp.push_back(c);
      continue;
    }
    const std::vector<double> train_mean =
        MeanVector(train, space, train_groups[c], c);
    if (p.tp.empty()) {
      report.excluded_tp.push_back(c);
    } else {
      double sq = SquaredDistance(train_mean, MeanVector(test, space, p.tp, c));
      report.per_class[c].tp = std::sqrt(sq);
      tp_squared += sq;
    }
    if (p.fp.empty()) {
      report.excluded_fp.push_back(c);
    } else {
      double sq = SquaredDistance(train_mean, MeanVector(test, space, p.fp, c));
      report.per_class[c].fp = std::sqrt(sq);
      fp_squared += sq;
    }
  }
  report.fb_train_tp = std::sqrt(tp_squared);
  report.fb_train_fp = std::sqrt(fp_squared);
  return report;
}

FrobeniusReport FrobeniusDivergence(const Decomposition& train,
                                    const Decomposition& test, Space space) {
  const auto partitions = PartitionOutcomes(test.set().labels, test.predictions(),
                                            test.num_classes());
  return FrobeniusDivergence(train, test, partitions, space);
}

std::vector<std::size_t> FrequentIdentities(const Decomposition& d,
                                            std::span<const std::size_t> instances,
                                            std::size_t class_index,
                                            const OverlapOptions& options) {
  const std::size_t width = d.feature_dim();
  std::vector<double> counts(width, 0.0);
  for (std::size_t n : instances) {
    if (options.rank_by == RankBy::kActivation) {
      auto fe = d.fe(n);
      for (std::size_t h = 0; h < width; ++h) {
        if (fe[h] > 0.0f) counts[h] += 1.0;
      }
    } else {
      for (std::size_t id :
           TopKIdentities(d, n, options.k, options.topk, class_index)) {
        counts[id] += 1.0;
      }
    }
  }
  return TopIndices(counts, options.top_m);
}

OverlapReport IdentityOverlap(const Decomposition& train,
                              const Decomposition& test,
                              std::span<const OutcomePartition> partitions,
                              const OverlapOptions& options) {
  CheckCompatible(train, test);
  CheckPartitions(test, partitions);
  if (options.top_m == 0 || options.top_m > train.feature_dim()) {
    throw Error(ErrorKind::kInvalidArgument, "top_m must be in [1, H]");
  }
  if (options.k == 0) throw Error(ErrorKind::kInvalidArgument, "K must be >= 1");
  const auto train_groups = TrainGroups(train);

  OverlapReport report;
  report.per_class.resize(train.num_classes());
  std::vector<std::optional<double>> tp_values(train.num_classes());
  std::vector<std::optional<double>> fp_values(train.num_classes());
  for (std::size_t c = 0; c < train.num_classes(); ++c) {
    const OutcomePartition& p = partitions[c];
    if (train_groups[c].empty()) {
      report.excluded_tp.push_back(c);
      report.excluded_fp.push_back(c);
      continue;
    }
    const auto train_top = FrequentIdentities(train, train_groups[c], c, options);
    if (p.tp.empty()) {
      report.excluded_tp.push_back(c);
    } else {
      tp_values[c] = OverlapFraction(
          train_top, FrequentIdentities(test, p.tp, c, options), options.top_m);
    }
    if (p.fp.empty()) {
      report.excluded_fp.push_back(c);
    } else {
      fp_values[c] = OverlapFraction(
          train_top, FrequentIdentities(test, p.fp, c, options), options.top_m);
    }
    report.per_class[c] = {tp_values[c], fp_values[c]};
  }
  report.overlap_tp = MeanOf(tp_values);
  report.overlap_fp = MeanOf(fp_values);
  return report;
}

OverlapReport IdentityOverlap(const Decomposition& train,
                              const Decomposition& test,
                              const OverlapOptions& options) {
  const auto partitions = PartitionOutcomes(test.set().labels, test.predictions(),
                                            test.num_classes());
  return IdentityOverlap(train, test, partitions, options);
}

}  // namespace imblens
