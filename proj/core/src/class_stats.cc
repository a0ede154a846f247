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

#include "imblens/class_stats.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "imblens/error.h"

namespace imblens {

std::vector<std::optional<ClassProfile>> ClassProfiles(
    const Decomposition& d, std::span<const std::int64_t> labels,
    const ProfileOptions& options) {
  const std::vector<std::size_t> groups =
      GroupAssignments(d, labels, options.group_by);
  const std::size_t classes = d.num_classes();
  const std::size_t width = d.feature_dim();

  std::vector<ClassProfile> acc(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    acc[c].class_index = c;
    acc[c].mean_fe.assign(width, 0.0);
    acc[c].mean_ce.assign(width, 0.0);
    acc[c].fe_frequency.assign(width, 0.0);
  }

  std::vector<double> ce(width);
  for (std::size_t n = 0; n < d.num_instances(); ++n) {
    ClassProfile& p = acc[groups[n]];
    ++p.count;
    auto fe = d.fe(n);
    d.ClassEmbedding(n, p.class_index, ce);
    for (std::size_t h = 0; h < width; ++h) {
      p.mean_fe[h] += fe[h];
      p.mean_ce[h] += ce[h];
      if (fe[h] > options.activity_epsilon) p.fe_frequency[h] += 1.0;
    }
  }

  std::vector<std::optional<ClassProfile>> profiles(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    ClassProfile& p = acc[c];
    if (p.count == 0) continue;
    const auto count = static_cast<double>(p.count);
    for (std::size_t h = 0; h < width; ++h) {
      p.mean_fe[h] /= count;
      p.mean_ce[h] /= count;
      p.fe_frequency[h] /= count;
    }
    profiles[c] = std::move(p);
  }
  return profiles;
}

std::vector<std::size_t> TopIndices(std::span<const double> values,
                                    std::size_t m) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  m = std::min(m, values.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m),
                    order.end(), [&](std::size_t a, std::size_t b) {
                      return values[a] > values[b] ||
                             (values[a] == values[b] && a < b);
                    });
  order.resize(m);
  return order;
}

std::vector<WeightSummary> WeightSummaries(const ClassifierHead& head) {
  std::vector<WeightSummary> summaries;
  summaries.reserve(head.num_classes());
  for (std::size_t c = 0; c < head.num_classes(); ++c) {
    auto row = head.weights.row(c);
    std::vector<double> magnitudes(row.size());
    std::transform(row.begin(), row.end(), magnitudes.begin(),
                   [](float w) { return std::abs(static_cast<double>(w)); });

    WeightSummary summary;
    summary.class_index = c;
    for (std::size_t id : TopIndices(magnitudes, magnitudes.size())) {
      summary.top_weights.emplace_back(id, magnitudes[id]);
    }
    const std::size_t top = std::min<std::size_t>(10, summary.top_weights.size());
    for (std::size_t i = 0; i < top; ++i) {
      summary.top10_abs_sum += summary.top_weights[i].second;
    }
    summary.max_abs_weight = summary.top_weights.front().second;
    summaries.push_back(std::move(summary));
  }
  return summaries;
}

MeanCeRatio LargestMeanCeRatio(
    std::span<const std::optional<ClassProfile>> profiles,
    std::size_t majority_class) {
  if (profiles.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "ratio needs at least two classes");
  }
  if (majority_class >= profiles.size() || !profiles[majority_class]) {
    throw Error(ErrorKind::kEmptyInput,
                "majority class " + std::to_string(majority_class) +
                    " has no profile");
  }
  auto largest = [](const ClassProfile& p) {
    return *std::max_element(p.mean_ce.begin(), p.mean_ce.end());
  };

  MeanCeRatio result;
  result.majority_max = largest(*profiles[majority_class]);
  // Running mean: exact when every class has the same maximum.
  std::size_t others = 0;
  for (std::size_t c = 0; c < profiles.size(); ++c) {
    if (c == majority_class || !profiles[c]) continue;
    ++others;
    result.others_avg +=
        (largest(*profiles[c]) - result.others_avg) / static_cast<double>(others);
  }
  if (others == 0) {
    throw Error(ErrorKind::kEmptyInput, "no non-empty class besides the majority");
  }
  if (result.majority_max != 0.0) {
    result.ratio = result.others_avg / result.majority_max;
  }
  return result;
}

std::size_t MajorityClass(const EmbeddingSet& set) {
  std::vector<std::size_t> counts(set.num_classes, 0);
  for (std::int64_t label : set.labels) ++counts[static_cast<std::size_t>(label)];
  return static_cast<std::size_t>(
      std::max_element(counts.begin(), counts.end()) - counts.begin());
}

}  // namespace imblens
