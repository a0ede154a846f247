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

#ifndef IMBLENS_PROBE_TRAINER_H_
#define IMBLENS_PROBE_TRAINER_H_

// Retrains the final linear layer on stored feature embeddings with
// full-batch gradient descent on mean softmax cross-entropy.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "imblens/embx.h"
#include "imblens/error.h"
#include "imblens/matrix.h"

namespace imblens {

enum class InitScheme { kZeros, kScaledUniform };
enum class LrSchedule { kConstant, kCosine };

struct TrainConfig {
  std::size_t epochs = 500;
  double learning_rate = 0.1;
  LrSchedule schedule = LrSchedule::kCosine;
  // Cosine decay ends at learning_rate * final_lr_fraction.
  double final_lr_fraction = 0.01;
  double weight_decay = 1e-4;  // L2 on weights only, not bias
  std::uint64_t seed = 0;
  InitScheme init = InitScheme::kZeros;
  bool class_balanced_loss = false;  // inverse-frequency instance weights
};

void ValidateTrainConfig(const TrainConfig& config);

// Learning rate applied at the given zero-based epoch.
double LearningRateAt(const TrainConfig& config, std::size_t epoch);

struct TrainTrace {
  std::vector<double> per_epoch_loss;  // objective after each epoch's step
  std::vector<double> per_epoch_bac;   // train BAC after each step
  std::vector<double> per_epoch_eval_bac;  // empty without an eval set
  std::size_t best_epoch = 0;          // zero-based
  double best_bac = 0.0;
  ClassifierHead final_head;           // head at best_epoch
};

class TrainingDiverged : public Error {
 public:
  TrainingDiverged(const std::string& message, TrainTrace trace)
      : Error(ErrorKind::kDivergence, message), trace_(std::move(trace)) {}
  const TrainTrace& trace() const { return trace_; }

 private:
  TrainTrace trace_;
};

// Linear-head parameters in double precision.
struct HeadParams {
  MatrixD weights;            // C x H
  std::vector<double> bias;   // C

  static HeadParams FromHead(const ClassifierHead& head);
  ClassifierHead ToHead() const;
};

struct Objective {
  double loss = 0.0;
  MatrixD grad_weights;
  std::vector<double> grad_bias;
  std::vector<std::size_t> predictions;
};

// Per-class instance weights; all ones unless class_balanced is set, in
// which case weight[c] = N / (present classes * count[c]).
std::vector<double> ClassLossWeights(const EmbeddingSet& data,
                                     bool class_balanced);

// Loss (weighted mean cross-entropy + weight_decay/2 * |W|^2) and its
// analytic gradient. Reduction order is fixed, so results do not depend on
// the thread count.
Objective EvaluateObjective(const EmbeddingSet& data, const HeadParams& params,
                            double weight_decay,
                            std::span<const double> class_weights);

TrainTrace RetrainHead(const EmbeddingSet& train, const TrainConfig& config,
                       const EmbeddingSet* eval = nullptr);

// Max relative error between the analytic gradient and central finite
// differences over every weight and bias entry.
double GradientCheck(const EmbeddingSet& train, const ClassifierHead& head,
                     double epsilon, double weight_decay = 0.0);

}  // namespace imblens

#endif  // IMBLENS_PROBE_TRAINER_H_
