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

#include "imblens/decomposition.h"

#include <cmath>
#include <string>

#include "imblens/error.h"
#include "imblens/parallel.h"

namespace imblens {
namespace {

constexpr std::size_t kInstanceBlock = 256;

}  // namespace

Decomposition::Decomposition(const EmbeddingSet& set, const ClassifierHead& head)
    : set_(&set), head_(&head) {
  if (set.feature_dim() != head.feature_dim()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "embedding width " + std::to_string(set.feature_dim()) +
                    " differs from head width " +
                    std::to_string(head.feature_dim()));
  }
  if (set.num_classes != head.num_classes()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "embedding set has " + std::to_string(set.num_classes) +
                    " classes but head has " +
                    std::to_string(head.num_classes()));
  }

  const std::size_t n_count = set.num_instances();
  const std::size_t classes = head.num_classes();
  const std::size_t width = head.feature_dim();
  logits_ = MatrixD(n_count, classes);
  predictions_.assign(n_count, 0);

  ParallelForBlocks(n_count, kInstanceBlock,
                    [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t n = begin; n < end; ++n) {
      auto fe = set.fe.row(n);
      auto row = logits_.row(n);
      for (std::size_t c = 0; c < classes; ++c) {
        auto w = head.weights.row(c);
        double sum = 0.0;
        for (std::size_t h = 0; h < width; ++h) {
          sum += static_cast<double>(fe[h]) * static_cast<double>(w[h]);
        }
        row[c] = sum + head.bias_at(c);
      }
      predictions_[n] = ArgMax(row);
    }
  });
}

void Decomposition::ClassEmbedding(std::size_t n, std::size_t c,
                                   std::span<double> out) const {
  auto fe = set_->fe.row(n);
  auto w = head_->weights.row(c);
  for (std::size_t h = 0; h < fe.size(); ++h) {
    out[h] = static_cast<double>(fe[h]) * static_cast<double>(w[h]);
  }
}

std::vector<double> Decomposition::ClassEmbedding(std::size_t n,
                                                  std::size_t c) const {
  std::vector<double> out(feature_dim());
  ClassEmbedding(n, c, out);
  return out;
}

void Decomposition::SpaceRow(Space space, std::size_t n, std::size_t c,
                             std::span<double> out) const {
  if (space == Space::kCe) {
    ClassEmbedding(n, c, out);
    return;
  }
  auto fe = set_->fe.row(n);
  for (std::size_t h = 0; h < fe.size(); ++h) out[h] = fe[h];
}

std::size_t ArgMax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::vector<std::size_t> GroupAssignments(const Decomposition& d,
                                          std::span<const std::int64_t> labels,
                                          GroupBy group_by) {
  if (labels.size() != d.num_instances()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "label count differs from instance count");
  }
  std::vector<std::size_t> groups(labels.size());
  for (std::size_t n = 0; n < labels.size(); ++n) {
    if (group_by == GroupBy::kPredicted) {
      groups[n] = d.prediction(n);
    } else {
      if (labels[n] < 0 || static_cast<std::size_t>(labels[n]) >= d.num_classes()) {
        throw Error(ErrorKind::kLabelOutOfRange,
                    "label at instance " + std::to_string(n) + " out of range");
      }
      groups[n] = static_cast<std::size_t>(labels[n]);
    }
  }
  return groups;
}

ConsistencyReport CheckExportedLogits(const Decomposition& d,
                                      const MatrixF& exported, double tol) {
  if (exported.rows() != d.num_instances() || exported.cols() != d.num_classes()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "exported logits shape differs from [N, C]");
  }
  ConsistencyReport report;
  std::vector<double> row(d.num_classes());
  for (std::size_t n = 0; n < d.num_instances(); ++n) {
    for (std::size_t c = 0; c < d.num_classes(); ++c) {
      row[c] = exported(n, c);
      report.max_abs_err =
          std::max(report.max_abs_err, std::abs(d.logit(n, c) - row[c]));
    }
    if (ArgMax(row) != d.prediction(n)) ++report.mismatched_argmax_count;
  }
  report.within_tolerance = report.max_abs_err <= tol;
  return report;
}

AccuracyReport Accuracy(const Decomposition& d,
                        std::span<const std::int64_t> labels) {
  if (labels.size() != d.num_instances()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "label count differs from instance count");
  }
  return Accuracy(labels, d.predictions(), d.num_classes());
}

AccuracyReport Accuracy(std::span<const std::int64_t> labels,
                        std::span<const std::size_t> predictions,
                        std::size_t num_classes) {
  if (labels.empty()) throw Error(ErrorKind::kEmptyInput, "no instances to score");
  if (labels.size() != predictions.size()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "label and prediction counts differ");
  }

  AccuracyReport report;
  report.confusion = Matrix<std::int64_t>(num_classes, num_classes);
  std::size_t correct = 0;
  for (std::size_t n = 0; n < labels.size(); ++n) {
    if (labels[n] < 0 || static_cast<std::size_t>(labels[n]) >= num_classes ||
        predictions[n] >= num_classes) {
      throw Error(ErrorKind::kLabelOutOfRange,
                  "class index at instance " + std::to_string(n) + " out of range");
    }
    auto truth = static_cast<std::size_t>(labels[n]);
    ++report.confusion(truth, predictions[n]);
    if (truth == predictions[n]) ++correct;
  }

  double recall_sum = 0.0;
  std::size_t present = 0;
  report.per_class_recall.resize(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) {
    std::int64_t total = 0;
    for (std::size_t p = 0; p < num_classes; ++p) total += report.confusion(c, p);
    if (total == 0) {
      report.absent_classes.push_back(c);
      continue;
    }
    double recall = static_cast<double>(report.confusion(c, c)) /
                    static_cast<double>(total);
    report.per_class_recall[c] = recall;
    recall_sum += recall;
    ++present;
  }
  report.bac = recall_sum / static_cast<double>(present);
  report.overall_accuracy =
      static_cast<double>(correct) / static_cast<double>(labels.size());
  return report;
}

}  // namespace imblens
