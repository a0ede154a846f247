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

#ifndef IMBLENS_CLASS_STATS_H_
#define IMBLENS_CLASS_STATS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "imblens/decomposition.h"
#include "imblens/embx.h"

namespace imblens {

struct ClassProfile {
  std::size_t class_index = 0;
  std::size_t count = 0;
  std::vector<double> mean_fe;
  // Mean of ce(n, class_index) over the class's instances.
  std::vector<double> mean_ce;
  // Fraction of instances whose fe[h] exceeds the activity threshold.
  std::vector<double> fe_frequency;
};

struct ProfileOptions {
  GroupBy group_by = GroupBy::kPredicted;
  double activity_epsilon = 0.0;  // fe[h] > epsilon counts as active
};

// One entry per class; nullopt for classes with no instances.
std::vector<std::optional<ClassProfile>> ClassProfiles(
    const Decomposition& d, std::span<const std::int64_t> labels,
    const ProfileOptions& options = {});

// Indices of the m largest entries, descending, ties by ascending index.
std::vector<std::size_t> TopIndices(std::span<const double> values,
                                    std::size_t m);

struct WeightSummary {
  std::size_t class_index = 0;
  std::vector<std::pair<std::size_t, double>> top_weights;  // (identity, |w|)
  double top10_abs_sum = 0.0;
  double max_abs_weight = 0.0;
};

std::vector<WeightSummary> WeightSummaries(const ClassifierHead& head);

struct MeanCeRatio {
  double majority_max = 0.0;
  double others_avg = 0.0;
  std::optional<double> ratio;  // absent when majority_max is 0
};

// Compares the majority class's largest mean ce against the average of the
// other classes' largest mean ce. Empty classes are skipped.
MeanCeRatio LargestMeanCeRatio(
    std::span<const std::optional<ClassProfile>> profiles,
    std::size_t majority_class);

// Class with the most instances, ties toward the lowest index.
std::size_t MajorityClass(const EmbeddingSet& set);

}  // namespace imblens

#endif  // IMBLENS_CLASS_STATS_H_
