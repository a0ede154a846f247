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

#ifndef IMBLENS_DECOMPOSITION_H_
#define IMBLENS_DECOMPOSITION_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "imblens/embx.h"
#include "imblens/matrix.h"

namespace imblens {

// Which embedding a statistic is computed over.
enum class Space { kCe, kFe };

// Whether instances are assigned to classes by prediction or by label.
enum class GroupBy { kPredicted, kTrue };

// The decision pipeline of a linear head applied to one embedding set.
//
// The classification embedding of instance n for class c is the element-wise
// product fe[n] * weights[c]; its row sum plus bias[c] is the logit. The
// N x C x H tensor of classification embeddings is never stored; rows are
// produced on demand. The decomposition keeps references to the set and the
// head, which must outlive it.
class Decomposition {
 public:
  Decomposition(const EmbeddingSet& set, const ClassifierHead& head);
  Decomposition(EmbeddingSet&&, const ClassifierHead&) = delete;
  Decomposition(const EmbeddingSet&, ClassifierHead&&) = delete;

  std::size_t num_instances() const { return logits_.rows(); }
  std::size_t num_classes() const { return logits_.cols(); }
  std::size_t feature_dim() const { return head_->feature_dim(); }

  const EmbeddingSet& set() const { return *set_; }
  const ClassifierHead& head() const { return *head_; }

  const MatrixD& logits() const { return logits_; }
  double logit(std::size_t n, std::size_t c) const { return logits_(n, c); }
  double bias(std::size_t c) const { return head_->bias_at(c); }

  // Argmax of each logit row, ties broken toward the lowest class index.
  std::span<const std::size_t> predictions() const { return predictions_; }
  std::size_t prediction(std::size_t n) const { return predictions_[n]; }

  std::span<const float> fe(std::size_t n) const { return set_->fe.row(n); }

  // Writes ce(n, c) into out, which must have feature_dim() entries.
  void ClassEmbedding(std::size_t n, std::size_t c, std::span<double> out) const;
  std::vector<double> ClassEmbedding(std::size_t n, std::size_t c) const;

  // Values ranked by top-K analyses: ce(n, c) or fe[n] widened to double.
  void SpaceRow(Space space, std::size_t n, std::size_t c,
                std::span<double> out) const;

 private:
  const EmbeddingSet* set_;
  const ClassifierHead* head_;
  MatrixD logits_;
  std::vector<std::size_t> predictions_;
};

// Index of the largest value, ties toward the lowest index.
std::size_t ArgMax(std::span<const double> values);

// Class assignment per instance under the chosen grouping.
std::vector<std::size_t> GroupAssignments(const Decomposition& d,
                                          std::span<const std::int64_t> labels,
                                          GroupBy group_by);

struct ConsistencyReport {
  double max_abs_err = 0.0;
  std::size_t mismatched_argmax_count = 0;
  bool within_tolerance = true;
};

// Compares computed logits against logits written by an exporter.
ConsistencyReport CheckExportedLogits(const Decomposition& d,
                                      const MatrixF& exported, double tol);

struct AccuracyReport {
  // Recall per class; nullopt for classes with no instances.
  std::vector<std::optional<double>> per_class_recall;
  std::vector<std::size_t> absent_classes;
  double bac = 0.0;
  double overall_accuracy = 0.0;
  Matrix<std::int64_t> confusion;  // rows: true label, cols: prediction
};

AccuracyReport Accuracy(const Decomposition& d,
                        std::span<const std::int64_t> labels);
AccuracyReport Accuracy(std::span<const std::int64_t> labels,
                        std::span<const std::size_t> predictions,
                        std::size_t num_classes);

}  // namespace imblens

#endif  // IMBLENS_DECOMPOSITION_H_
