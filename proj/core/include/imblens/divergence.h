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

#ifndef IMBLENS_DIVERGENCE_H_
#define IMBLENS_DIVERGENCE_H_

// Train/test divergence per class. Test instances are split into true
// positives, false positives, and false negatives for each class; class mean
// vectors of each partition are compared against the train class means.
//
// In ce space an instance grouped under class c contributes ce(n, c).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "imblens/decomposition.h"
#include "imblens/topk.h"

namespace imblens {

struct OutcomePartition {
  std::size_t class_index = 0;
  std::vector<std::size_t> tp;  // label == c, prediction == c
  std::vector<std::size_t> fp;  // prediction == c, label != c
  std::vector<std::size_t> fn;  // label == c, prediction != c
};

std::vector<OutcomePartition> PartitionOutcomes(
    std::span<const std::int64_t> labels,
    std::span<const std::size_t> predictions, std::size_t num_classes);

struct ClassNorms {
  std::optional<double> tp;  // absent when the partition or train class is empty
  std::optional<double> fp;
};

struct FrobeniusReport {
  Space space = Space::kFe;
  double fb_train_tp = 0.0;
  double fb_train_fp = 0.0;
  std::vector<ClassNorms> per_class;
  std::vector<std::size_t> excluded_tp;
  std::vector<std::size_t> excluded_fp;
};

// Train is grouped by true label; test by the given partitions.
FrobeniusReport FrobeniusDivergence(const Decomposition& train,
                                    const Decomposition& test,
                                    std::span<const OutcomePartition> partitions,
                                    Space space);
// Partitions derived from the test decomposition's predictions.
FrobeniusReport FrobeniusDivergence(const Decomposition& train,
                                    const Decomposition& test, Space space);

enum class RankBy {
  kTopKMembership,  // presence in per-instance top-K sets
  kActivation,      // fe[h] > 0
};

struct OverlapOptions {
  TopKOptions topk;
  std::size_t k = 7;
  std::size_t top_m = 10;
  RankBy rank_by = RankBy::kTopKMembership;
};

struct ClassOverlap {
  std::optional<double> tp;
  std::optional<double> fp;
};

struct OverlapReport {
  std::optional<double> overlap_tp;  // mean over classes with data
  std::optional<double> overlap_fp;
  std::vector<ClassOverlap> per_class;
  std::vector<std::size_t> excluded_tp;
  std::vector<std::size_t> excluded_fp;
};

// Top-m most frequent identities among a group of instances, ties by
// ascending identity.
std::vector<std::size_t> FrequentIdentities(const Decomposition& d,
                                            std::span<const std::size_t> instances,
                                            std::size_t class_index,
                                            const OverlapOptions& options);

OverlapReport IdentityOverlap(const Decomposition& train,
                              const Decomposition& test,
                              std::span<const OutcomePartition> partitions,
                              const OverlapOptions& options = {});
OverlapReport IdentityOverlap(const Decomposition& train,
                              const Decomposition& test,
                              const OverlapOptions& options = {});

}  // namespace imblens

#endif  // IMBLENS_DIVERGENCE_H_
