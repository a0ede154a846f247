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

#ifndef IMBLENS_TOPK_H_
#define IMBLENS_TOPK_H_

// Top-K feature relevance.
//
// For an instance with reference (predicted) class R and adversary class A
// (largest logit among the other classes), rank the reference class's
// classification embedding descending. The instance is covered at K when
// the sum of the K largest entries plus bias[R] strictly exceeds LG_A. The
// coverage ratio of a group is the fraction of its instances covered.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "imblens/decomposition.h"

namespace imblens {

// How fe-space rankings pick their identities.
enum class FeMode {
  kMagnitude,  // largest fe values of the instance, class-free
  kCeAligned,  // fe underlying the reference class's top ce
};

struct TopKOptions {
  Space space = Space::kCe;
  FeMode fe_mode = FeMode::kMagnitude;
};

struct InstanceTopK {
  std::size_t instance = 0;
  std::size_t reference_class = 0;
  // Absent only for single-class heads; adversary_logit is then -inf.
  std::optional<std::size_t> adversary_class;
  double adversary_logit = 0.0;
  std::vector<std::size_t> k_indices;  // descending by value, ties by index
  std::vector<double> k_values;
  double top_sum = 0.0;                // sum of k_values
  bool covered = false;                // top_sum + bias[R] > LG_A
};

// K is clamped to H. Requires K >= 1.
InstanceTopK ComputeInstanceTopK(const Decomposition& d, std::size_t n,
                                 std::size_t k, const TopKOptions& options = {});

// Smallest k in [1, H] whose top-k sum plus bias[R] exceeds LG_A, or H + 1
// when no prefix does.
std::size_t MinimalK(const Decomposition& d, std::size_t n,
                     const TopKOptions& options = {});

// Identities of the instance's top-K set, in rank order. Classification
// embeddings come from reference_class when given, else the prediction.
std::vector<std::size_t> TopKIdentities(
    const Decomposition& d, std::size_t n, std::size_t k,
    const TopKOptions& options = {},
    std::optional<std::size_t> reference_class = std::nullopt);

struct CoverageReport {
  std::vector<std::size_t> k_values;
  std::vector<double> overall_coverage;  // parallel to k_values
  // [class][k index]; nullopt when the class has no instances.
  std::vector<std::vector<std::optional<double>>> per_class_coverage;
  std::vector<std::size_t> class_counts;
  std::vector<std::size_t> empty_classes;
  std::vector<std::size_t> minimal_k;  // per instance
};

CoverageReport CoverageRatios(const Decomposition& d,
                              std::span<const std::int64_t> labels,
                              std::span<const std::size_t> k_values,
                              const TopKOptions& options = {},
                              GroupBy group_by = GroupBy::kPredicted);

struct ClassMember {
  std::size_t identity = 0;
  std::size_t count = 0;
  double ratio = 0.0;  // count / class size

  friend bool operator==(const ClassMember&, const ClassMember&) = default;
};

// Per class, the top_m feature identities occurring most often in the
// per-instance top-K sets (ties by ascending identity). Identities that never
// occur are omitted. nullopt for empty classes.
std::vector<std::optional<std::vector<ClassMember>>> ClassMembers(
    const Decomposition& d, std::span<const std::int64_t> labels, std::size_t k,
    std::size_t top_m, const TopKOptions& options = {},
    GroupBy group_by = GroupBy::kPredicted);

// Per class, the number of distinct identities across the per-instance
// top-K sets. nullopt for empty classes.
std::vector<std::optional<std::size_t>> UnionCounts(
    const Decomposition& d, std::span<const std::int64_t> labels, std::size_t k,
    const TopKOptions& options = {}, GroupBy group_by = GroupBy::kPredicted);

struct ClassContribution {
  std::vector<double> mean_fractions;  // rank j: mean of ce_(j) / LG_R
  double largest = 0.0;                // mean_fractions[0]
  std::size_t included = 0;
};

struct ContributionReport {
  std::size_t k = 0;
  // nullopt when the class has no instance with a positive reference logit.
  std::vector<std::optional<ClassContribution>> per_class;
  std::vector<std::size_t> excluded_non_positive;  // per class
};

// Fraction of each instance's reference logit contributed by its top-K
// classification-embedding entries, averaged per class. Instances whose
// reference logit is <= 0 are excluded and counted.
ContributionReport LogitContributions(const Decomposition& d,
                                      std::span<const std::int64_t> labels,
                                      std::size_t k,
                                      GroupBy group_by = GroupBy::kPredicted);

struct ContributionRatio {
  double majority_largest = 0.0;
  double others_average = 0.0;
  std::optional<double> ratio;  // others_average / majority_largest
};

ContributionRatio LargestContributionRatio(const ContributionReport& report,
                                           std::size_t majority_class);

}  // namespace imblens

#endif  // IMBLENS_TOPK_H_
