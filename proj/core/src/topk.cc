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

#include "imblens/topk.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "imblens/error.h"
#include "imblens/parallel.h"

namespace imblens {
namespace {

constexpr std::size_t kInstanceBlock = 128;

struct Ranked {
  std::vector<std::size_t> order;  // first `limit` entries are sorted
  std::vector<double> values;      // ranked values, length `limit`
};

// Ranks the instance's values descending, ties by ascending identity. Only
// the first `limit` positions are materialized.
Ranked RankInstance(const Decomposition& d, std::size_t n,
                    const TopKOptions& options, std::size_t limit,
                    std::optional<std::size_t> reference_class = std::nullopt) {
  const std::size_t width = d.feature_dim();
  limit = std::min(limit, width);
  std::vector<double> row(width);
  const Space ranking_space =
      (options.space == Space::kFe && options.fe_mode == FeMode::kMagnitude)
          ? Space::kFe
          : Space::kCe;
  d.SpaceRow(ranking_space, n, reference_class.value_or(d.prediction(n)), row);

  Ranked ranked;
  ranked.order.resize(width);
  std::iota(ranked.order.begin(), ranked.order.end(), std::size_t{0});
  auto by_value = [&row](std::size_t a, std::size_t b) {
    return row[a] > row[b] || (row[a] == row[b] && a < b);
  };
  if (limit == width) {
    std::sort(ranked.order.begin(), ranked.order.end(), by_value);
  } else {
    std::partial_sort(ranked.order.begin(),
                      ranked.order.begin() + static_cast<std::ptrdiff_t>(limit),
                      ranked.order.end(), by_value);
  }
  ranked.order.resize(limit);

  ranked.values.resize(limit);
  auto fe = d.fe(n);
  for (std::size_t i = 0; i < limit; ++i) {
    const std::size_t id = ranked.order[i];
    ranked.values[i] = options.space == Space::kCe ? row[id] : fe[id];
  }
  return ranked;
}

struct AdversaryInfo {
  std::optional<std::size_t> adversary;
  double logit = -std::numeric_limits<double>::infinity();
};

AdversaryInfo FindAdversary(const Decomposition& d, std::size_t n) {
  AdversaryInfo info;
  const std::size_t ref = d.prediction(n);
  for (std::size_t c = 0; c < d.num_classes(); ++c) {
    if (c == ref) continue;
    if (!info.adversary || d.logit(n, c) > info.logit) {
      info.adversary = c;
      info.logit = d.logit(n, c);
    }
  }
  return info;
}

void CheckInstance(const Decomposition& d, std::size_t n) {
  if (n >= d.num_instances()) {
    throw Error(ErrorKind::kInvalidArgument,
                "instance " + std::to_string(n) + " out of range");
  }
}

void CheckK(std::size_t k) {
  if (k == 0) throw Error(ErrorKind::kInvalidArgument, "K must be >= 1");
}

// First k at which the running prefix sum plus bias exceeds the adversary
// logit; width + 1 when none does.
std::size_t FirstCovering(std::span<const double> ranked_values, double bias,
                          double adversary_logit) {
  double sum = 0.0;
  for (std::size_t i = 0; i < ranked_values.size(); ++i) {
    sum += ranked_values[i];
    if (sum + bias > adversary_logit) return i + 1;
  }
  return ranked_values.size() + 1;
}

// Per-instance top-K identity sets computed in parallel, in instance order.
std::vector<std::vector<std::size_t>> AllTopKSets(const Decomposition& d,
                                                  std::size_t k,
                                                  const TopKOptions& options) {
  std::vector<std::vector<std::size_t>> sets(d.num_instances());
  ParallelForBlocks(d.num_instances(), kInstanceBlock,
                    [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t n = begin; n < end; ++n) {
      sets[n] = RankInstance(d, n, options, k).order;
    }
  });
  return sets;
}

std::vector<std::size_t> ClassSizes(std::span<const std::size_t> groups,
                                    std::size_t classes) {
  std::vector<std::size_t> sizes(classes, 0);
  for (std::size_t g : groups) ++sizes[g];
  return sizes;
}

}  // namespace

InstanceTopK ComputeInstanceTopK(const Decomposition& d, std::size_t n,
                                 std::size_t k, const TopKOptions& options) {
  CheckInstance(d, n);
  CheckK(k);
  Ranked ranked = RankInstance(d, n, options, k);
  AdversaryInfo adversary = FindAdversary(d, n);

  InstanceTopK result;
  result.instance = n;
  result.reference_class = d.prediction(n);
  result.adversary_class = adversary.adversary;
  result.adversary_logit = adversary.logit;
  result.k_indices = std::move(ranked.order);
  result.k_values = std::move(ranked.values);
  for (double v : result.k_values) result.top_sum += v;
  result.covered =
      result.top_sum + d.bias(result.reference_class) > adversary.logit;
  return result;
}

std::size_t MinimalK(const Decomposition& d, std::size_t n,
                     const TopKOptions& options) {
  CheckInstance(d, n);
  Ranked ranked = RankInstance(d, n, options, d.feature_dim());
  return FirstCovering(ranked.values, d.bias(d.prediction(n)),
                       FindAdversary(d, n).logit);
}

std::vector<std::size_t> TopKIdentities(
    const Decomposition& d, std::size_t n, std::size_t k,
    const TopKOptions& options, std::optional<std::size_t> reference_class) {
  CheckInstance(d, n);
  CheckK(k);
  if (reference_class && *reference_class >= d.num_classes()) {
    throw Error(ErrorKind::kInvalidArgument, "reference class out of range");
  }
  return RankInstance(d, n, options, k, reference_class).order;
}

CoverageReport CoverageRatios(const Decomposition& d,
                              std::span<const std::int64_t> labels,
                              std::span<const std::size_t> k_values,
                              const TopKOptions& options, GroupBy group_by) {
  if (k_values.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "k_values must be non-empty");
  }
  for (std::size_t k : k_values) CheckK(k);
  const std::vector<std::size_t> groups = GroupAssignments(d, labels, group_by);
  const std::size_t n_count = d.num_instances();
  const std::size_t classes = d.num_classes();
  const std::size_t width = d.feature_dim();

  // covered[n][ki], evaluated directly at each K: with negative entries the
  // prefix sums are not monotone, so minimal_k alone cannot decide coverage.
  std::vector<std::vector<char>> covered(n_count);
  CoverageReport report;
  report.k_values.assign(k_values.begin(), k_values.end());
  report.minimal_k.assign(n_count, 0);

  ParallelForBlocks(n_count, kInstanceBlock,
                    [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t n = begin; n < end; ++n) {
      Ranked ranked = RankInstance(d, n, options, width);
      const double bias = d.bias(d.prediction(n));
      const double adversary = FindAdversary(d, n).logit;
      report.minimal_k[n] = FirstCovering(ranked.values, bias, adversary);

      std::vector<double> prefix(width + 1, 0.0);
      for (std::size_t i = 0; i < width; ++i) {
        prefix[i + 1] = prefix[i] + ranked.values[i];
      }
      covered[n].resize(k_values.size());
      for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
        const std::size_t k = std::min(k_values[ki], width);
        covered[n][ki] = prefix[k] + bias > adversary;
      }
    }
  });

  report.class_counts = ClassSizes(groups, classes);
  std::vector<std::vector<std::size_t>> class_hits(
      classes, std::vector<std::size_t>(k_values.size(), 0));
  std::vector<std::size_t> total_hits(k_values.size(), 0);
  for (std::size_t n = 0; n < n_count; ++n) {
    for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
      if (covered[n][ki]) {
        ++class_hits[groups[n]][ki];
        ++total_hits[ki];
      }
    }
  }

  report.overall_coverage.resize(k_values.size());
  for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
    report.overall_coverage[ki] =
        static_cast<double>(total_hits[ki]) / static_cast<double>(n_count);
  }
  report.per_class_coverage.resize(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    auto& row = report.per_class_coverage[c];
    row.resize(k_values.size());
    if (report.class_counts[c] == 0) {
      report.empty_classes.push_back(c);
      continue;
    }
    for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
      row[ki] = static_cast<double>(class_hits[c][ki]) /
                static_cast<double>(report.class_counts[c]);
    }
  }
  return report;
}

std::vector<std::optional<std::vector<ClassMember>>> ClassMembers(
    const Decomposition& d, std::span<const std::int64_t> labels, std::size_t k,
    std::size_t top_m, const TopKOptions& options, GroupBy group_by) {
  CheckK(k);
  if (top_m == 0) throw Error(ErrorKind::kInvalidArgument, "top_m must be >= 1");
  const std::vector<std::size_t> groups = GroupAssignments(d, labels, group_by);
  const std::size_t classes = d.num_classes();
  const std::size_t width = d.feature_dim();
  const auto sets = AllTopKSets(d, k, options);

  std::vector<std::vector<std::size_t>> tallies(
      classes, std::vector<std::size_t>(width, 0));
  for (std::size_t n = 0; n < sets.size(); ++n) {
    for (std::size_t id : sets[n]) ++tallies[groups[n]][id];
  }
  const std::vector<std::size_t> sizes = ClassSizes(groups, classes);

  std::vector<std::optional<std::vector<ClassMember>>> result(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    if (sizes[c] == 0) continue;
    std::vector<ClassMember> members(width);
    for (std::size_t h = 0; h < width; ++h) {
      members[h] = {h, tallies[c][h],
                    static_cast<double>(tallies[c][h]) /
                        static_cast<double>(sizes[c])};
    }
    std::stable_sort(members.begin(), members.end(),
                     [](const ClassMember& a, const ClassMember& b) {
                       return a.count > b.count;
                     });
    members.resize(std::min(top_m, width));
    std::erase_if(members, [](const ClassMember& m) { return m.count == 0; });
    result[c] = std::move(members);
  }
  return result;
}

std::vector<std::optional<std::size_t>> UnionCounts(
    const Decomposition& d, std::span<const std::int64_t> labels, std::size_t k,
    const TopKOptions& options, GroupBy group_by) {
  CheckK(k);
  const std::vector<std::size_t> groups = GroupAssignments(d, labels, group_by);
  const std::size_t classes = d.num_classes();
  const auto sets = AllTopKSets(d, k, options);

  std::vector<std::vector<char>> seen(
      classes, std::vector<char>(d.feature_dim(), 0));
  std::vector<std::size_t> sizes = ClassSizes(groups, classes);
  for (std::size_t n = 0; n < sets.size(); ++n) {
    for (std::size_t id : sets[n]) seen[groups[n]][id] = 1;
  }
  std::vector<std::optional<std::size_t>> counts(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    if (sizes[c] == 0) continue;
    counts[c] = static_cast<std::size_t>(
        std::count(seen[c].begin(), seen[c].end(), 1));
  }
  return counts;
}

ContributionReport LogitContributions(const Decomposition& d,
                                      std::span<const std::int64_t> labels,
                                      std::size_t k, GroupBy group_by) {
  CheckK(k);
  const std::vector<std::size_t> groups = GroupAssignments(d, labels, group_by);
  const std::size_t classes = d.num_classes();
  k = std::min(k, d.feature_dim());

  // fractions[n] stays empty for excluded instances.
  std::vector<std::vector<double>> fractions(d.num_instances());
  ParallelForBlocks(d.num_instances(), kInstanceBlock,
                    [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t n = begin; n < end; ++n) {
      const double reference_logit = d.logit(n, d.prediction(n));
      if (!(reference_logit > 0.0)) continue;
      Ranked ranked = RankInstance(d, n, TopKOptions{}, k);
      fractions[n].resize(k);
      for (std::size_t j = 0; j < k; ++j) {
        fractions[n][j] = ranked.values[j] / reference_logit;
      }
    }
  });

  ContributionReport report;
  report.k = k;
  report.excluded_non_positive.assign(classes, 0);
  std::vector<std::vector<double>> sums(classes, std::vector<double>(k, 0.0));
  std::vector<std::size_t> included(classes, 0);
  for (std::size_t n = 0; n < fractions.size(); ++n) {
    const std::size_t c = groups[n];
    if (fractions[n].empty()) {
      ++report.excluded_non_positive[c];
      continue;
    }
    ++included[c];
    for (std::size_t j = 0; j < k; ++j) sums[c][j] += fractions[n][j];
  }

  report.per_class.resize(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    if (included[c] == 0) continue;
    ClassContribution contribution;
    contribution.included = included[c];
    contribution.mean_fractions.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      contribution.mean_fractions[j] =
          sums[c][j] / static_cast<double>(included[c]);
    }
    contribution.largest = contribution.mean_fractions[0];
    report.per_class[c] = std::move(contribution);
  }
  return report;
}

ContributionRatio LargestContributionRatio(const ContributionReport& report,
                                           std::size_t majority_class) {
  if (majority_class >= report.per_class.size()) {
    throw Error(ErrorKind::kInvalidArgument, "majority class out of range");
  }
  ContributionRatio result;
  if (report.per_class[majority_class]) {
    result.majority_largest = report.per_class[majority_class]->largest;
  }
  double sum = 0.0;
  std::size_t others = 0;
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    if (c == majority_class || !report.per_class[c]) continue;
    sum += report.per_class[c]->largest;
    ++others;
  }
  if (others > 0) result.others_average = sum / static_cast<double>(others);
  if (report.per_class[majority_class] && others > 0 &&
      result.majority_largest != 0.0) {
    result.ratio = result.others_average / result.majority_largest;
  }
  return result;
}

}  // namespace imblens
