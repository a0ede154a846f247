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

#include "imblens/probe_trainer.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "imblens/decomposition.h"
#include "imblens/parallel.h"

namespace imblens {
namespace {

constexpr std::size_t kInstanceBlock = 256;

struct BlockPartial {
  double loss = 0.0;
  MatrixD grad_weights;
  std::vector<double> grad_bias;
};

// Uniform in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementation.
double UnitUniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

HeadParams InitialParams(std::size_t classes, std::size_t width,
                         const TrainConfig& config) {
  HeadParams params{MatrixD(classes, width), std::vector<double>(classes, 0.0)};
  if (config.init == InitScheme::kScaledUniform) {
    std::mt19937_64 rng(config.seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(width));
    for (double& w : params.weights.values()) {
      w = (2.0 * UnitUniform(rng) - 1.0) * bound;
    }
  }
  return params;
}

void CheckDimensions(const EmbeddingSet& data, const HeadParams& params) {
  if (data.feature_dim() != params.weights.cols() ||
      data.num_classes != params.weights.rows() ||
      params.bias.size() != params.weights.rows()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "embedding set and head parameters disagree in shape");
  }
}

std::vector<std::size_t> Predict(const EmbeddingSet& data,
                                 const HeadParams& params) {
  ClassifierHead head = params.ToHead();
  Decomposition d(data, head);
  return {d.predictions().begin(), d.predictions().end()};
}

}  // namespace

void ValidateTrainConfig(const TrainConfig& config) {
  if (config.epochs == 0) {
    throw Error(ErrorKind::kInvalidArgument, "epochs must be >= 1");
  }
  if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate)) {
    throw Error(ErrorKind::kInvalidArgument, "learning rate must be finite and >= 0");
  }
  if (!(config.weight_decay >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "weight decay must be >= 0");
  }
  if (!(config.final_lr_fraction >= 0.0 && config.final_lr_fraction <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "final_lr_fraction must be in [0, 1]");
  }
}

double LearningRateAt(const TrainConfig& config, std::size_t epoch) {
  if (config.schedule == LrSchedule::kConstant || config.epochs <= 1) {
    return config.learning_rate;
  }
  const double floor = config.learning_rate * config.final_lr_fraction;
  const double progress =
      static_cast<double>(epoch) / static_cast<double>(config.epochs - 1);
  return floor + 0.5 * (config.learning_rate - floor) *
                     (1.0 + std::cos(std::numbers::pi * progress));
}

HeadParams HeadParams::FromHead(const ClassifierHead& head) {
  HeadParams params{MatrixD(head.num_classes(), head.feature_dim()),
                    std::vector<double>(head.num_classes(), 0.0)};
  auto src = head.weights.values();
  std::copy(src.begin(), src.end(), params.weights.values().begin());
  for (std::size_t c = 0; c < head.num_classes(); ++c) params.bias[c] = head.bias_at(c);
  return params;
}

ClassifierHead HeadParams::ToHead() const {
  ClassifierHead head;
  head.weights = MatrixF(weights.rows(), weights.cols());
  auto src = weights.values();
  std::transform(src.begin(), src.end(), head.weights.values().begin(),
                 [](double v) { return static_cast<float>(v); });
  head.bias = std::vector<float>(bias.size());
  std::transform(bias.begin(), bias.end(), head.bias->begin(),
                 [](double v) { return static_cast<float>(v); });
  return head;
}

std::vector<double> ClassLossWeights(const EmbeddingSet& data,
                                     bool class_balanced) {
  std::vector<double> weights(data.num_classes, 1.0);
  if (!class_balanced) return weights;
  std::vector<std::size_t> counts(data.num_classes, 0);
  for (std::int64_t label : data.labels) ++counts[static_cast<std::size_t>(label)];
  const auto present = static_cast<double>(
      std::count_if(counts.begin(), counts.end(), [](std::size_t n) { return n > 0; }));
  const auto total = static_cast<double>(data.num_instances());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    weights[c] = counts[c] == 0 ? 0.0
                                : total / (present * static_cast<double>(counts[c]));
  }
  return weights;
}

Objective EvaluateObjective(const EmbeddingSet& data, const HeadParams& params,
                            double weight_decay,
                            std::span<const double> class_weights) {
  CheckDimensions(data, params);
  const std::size_t n_count = data.num_instances();
  const std::size_t classes = params.weights.rows();
  const std::size_t width = params.weights.cols();

  Objective objective;
  objective.predictions.assign(n_count, 0);
  std::vector<BlockPartial> partials(NumBlocks(n_count, kInstanceBlock));

  ParallelForBlocks(n_count, kInstanceBlock,
                    [&](std::size_t block, std::size_t begin, std::size_t end) {
    BlockPartial& part = partials[block];
    part.grad_weights = MatrixD(classes, width);
    part.grad_bias.assign(classes, 0.0);
    std::vector<double> z(classes);
    for (std::size_t n = begin; n < end; ++n) {
      auto fe = data.fe.row(n);
      for (std::size_t c = 0; c < classes; ++c) {
        auto w = params.weights.row(c);
        double sum = 0.0;
        for (std::size_t h = 0; h < width; ++h) sum += w[h] * fe[h];
        z[c] = sum + params.bias[c];
      }
      objective.predictions[n] = ArgMax(z);

      const auto label = static_cast<std::size_t>(data.labels[n]);
      const double peak = *std::max_element(z.begin(), z.end());
      const double label_margin = z[label] - peak;
      double partition = 0.0;
      for (double& v : z) {
        v = std::exp(v - peak);
        partition += v;
      }
      const double weight = class_weights[label];
      // z now holds unnormalized probabilities.
      part.loss += weight * (std::log(partition) - label_margin);
      for (std::size_t c = 0; c < classes; ++c) {
        const double residual =
            weight * (z[c] / partition - (c == label ? 1.0 : 0.0));
        part.grad_bias[c] += residual;
        auto g = part.grad_weights.row(c);
        for (std::size_t h = 0; h < width; ++h) g[h] += residual * fe[h];
      }
    }
  });

  const double inv_n = 1.0 / static_cast<double>(n_count);
  objective.grad_weights = MatrixD(classes, width);
  objective.grad_bias.assign(classes, 0.0);
  for (const BlockPartial& part : partials) {
    objective.loss += part.loss;
    auto src = part.grad_weights.values();
    auto dst = objective.grad_weights.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    for (std::size_t c = 0; c < classes; ++c) objective.grad_bias[c] += part.grad_bias[c];
  }
  objective.loss *= inv_n;
  for (double& g : objective.grad_weights.values()) g *= inv_n;
  for (double& g : objective.grad_bias) g *= inv_n;

  if (weight_decay > 0.0) {
    double norm = 0.0;
    auto w = params.weights.values();
    auto g = objective.grad_weights.values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      norm += w[i] * w[i];
      g[i] += weight_decay * w[i];
    }
    objective.loss += 0.5 * weight_decay * norm;
  }
  return objective;
}

TrainTrace RetrainHead(const EmbeddingSet& train, const TrainConfig& config,
                       const EmbeddingSet* eval) {
  ValidateTrainConfig(config);
  ValidateEmbeddingSet(train, /*allow_signed_fe=*/true);
  if (eval != nullptr &&
      (eval->feature_dim() != train.feature_dim() ||
       eval->num_classes != train.num_classes)) {
    throw Error(ErrorKind::kDimensionMismatch,
                "eval set differs from train set in width or class count");
  }

  const std::vector<double> class_weights =
      ClassLossWeights(train, config.class_balanced_loss);
  HeadParams params =
      InitialParams(train.num_classes, train.feature_dim(), config);
  Objective objective =
      EvaluateObjective(train, params, config.weight_decay, class_weights);

  TrainTrace trace;
  bool have_best = false;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = LearningRateAt(config, epoch);
    auto w = params.weights.values();
    auto gw = objective.grad_weights.values();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * gw[i];
    for (std::size_t c = 0; c < params.bias.size(); ++c) {
      params.bias[c] -= lr * objective.grad_bias[c];
    }

    objective = EvaluateObjective(train, params, config.weight_decay, class_weights);
    if (!std::isfinite(objective.loss)) {
      trace.final_head = params.ToHead();
      throw TrainingDiverged(
          "loss became non-finite at epoch " + std::to_string(epoch),
          std::move(trace));
    }
    trace.per_epoch_loss.push_back(objective.loss);
    const double train_bac =
        Accuracy(train.labels, objective.predictions, train.num_classes).bac;
    trace.per_epoch_bac.push_back(train_bac);

    double selection_bac = train_bac;
    if (eval != nullptr) {
      selection_bac =
          Accuracy(eval->labels, Predict(*eval, params), eval->num_classes).bac;
      trace.per_epoch_eval_bac.push_back(selection_bac);
    }
    if (!have_best || selection_bac > trace.best_bac) {
      have_best = true;
      trace.best_bac = selection_bac;
      trace.best_epoch = epoch;
      trace.final_head = params.ToHead();
    }
  }
  return trace;
}

double GradientCheck(const EmbeddingSet& train, const ClassifierHead& head,
                     double epsilon, double weight_decay) {
  const std::vector<double> class_weights = ClassLossWeights(train, false);
  HeadParams params = HeadParams::FromHead(head);
  const Objective analytic =
      EvaluateObjective(train, params, weight_decay, class_weights);

  auto loss_at = [&](double& slot, double value) {
    const double saved = slot;
    slot = value;
    const double loss =
        EvaluateObjective(train, params, weight_decay, class_weights).loss;
    slot = saved;
    return loss;
  };
  double max_rel = 0.0;
  auto compare = [&](double& slot, double analytic_grad) {
    const double base = slot;
    const double numeric =
        (loss_at(slot, base + epsilon) - loss_at(slot, base - epsilon)) /
        (2.0 * epsilon);
    const double scale =
        std::max({std::abs(analytic_grad), std::abs(numeric), 1e-6});
    max_rel = std::max(max_rel, std::abs(analytic_grad - numeric) / scale);
  };

  auto w = params.weights.values();
  auto gw = analytic.grad_weights.values();
  for (std::size_t i = 0; i < w.size(); ++i) compare(w[i], gw[i]);
  for (std::size_t c = 0; c < params.bias.size(); ++c) {
    compare(params.bias[c], analytic.grad_bias[c]);
  }
  return max_rel;
}

}  // namespace imblens
