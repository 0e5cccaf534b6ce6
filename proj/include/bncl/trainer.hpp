/**
 * Copyright 2026 The BNCL Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef BNCL_TRAINER_HPP_
#define BNCL_TRAINER_HPP_

#include <bncl/interchange.hpp>
#include <bncl/label_graph.hpp>
#include <bncl/loss.hpp>
#include <bncl/propagation.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

namespace bncl {

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.8;
  double beta2 = 0.9;
  double epsilon = 1e-8;
  std::size_t batch_size = 128;
  int epochs = 30;
  int lr_step = 10;
  double lr_decay = 0.9;
  std::uint64_t seed = 0;
  double init_scale = 0.01;

  void validate() const;
};

struct OptimizerState {
  ModelParams first_moment;
  ModelParams second_moment;
  std::uint64_t step = 0;

  static OptimizerState zeros_like(const ModelParams& params);
};

struct EpochRecord {
  int epoch = 0;
  LossBreakdown loss;  // summed over the epoch's batches
  double learning_rate = 0.0;
  double seconds = 0.0;
};

using TrainHistory = std::vector<EpochRecord>;

struct Statistics {
  double kappa = 0.0;
  std::vector<double> lambdas;
};

/// kappa = mean subset size, lambda_l = fraction of samples containing l.
Statistics estimate_statistics(const std::map<std::size_t, LabelVector>& annotations);

/// Supervision with kappa/lambda filled in (estimated for scarce annotation).
SupervisionConfig resolve_supervision(const SupervisionConfig& supervision, std::ostream* log = nullptr);

/// Loss of the propagated batch as a function of the weights.
class Objective {
 public:
  Objective(const FeatureMatrix& features, const BalancedNeighborhoods& nbhd, LossConfig loss,
            SupervisionConfig supervision);

  struct Evaluation {
    LossBreakdown loss;
    ModelParams gradient;  // zero outside the neighbourhood supports
  };

  /// `pattern`, when given, receives the on/off state of every ReLU and log clamp.
  LossBreakdown loss(const ModelParams& params, std::span<const std::size_t> batch,
                     std::vector<unsigned char>* pattern = nullptr) const;
  Evaluation gradient(const ModelParams& params, std::span<const std::size_t> batch) const;

  /// Loss over the whole feature set in fixed, unshuffled batches.
  LossBreakdown dataset_loss(const ModelParams& params, std::size_t batch_size) const;

  const SupportMasks& masks() const { return masks_; }
  const LossConfig& loss_config() const { return loss_; }
  const SupervisionConfig& supervision() const { return supervision_; }
  std::size_t samples() const { return features_.samples(); }

 private:
  BatchTargets targets(std::span<const std::size_t> batch) const;
  HiddenStates run(const ModelParams& masked, std::span<const std::size_t> batch) const;

  const FeatureMatrix& features_;
  const BalancedNeighborhoods& nbhd_;
  SupportMasks masks_;
  LossConfig loss_;
  SupervisionConfig supervision_;
};

/// Gradient of the total loss on one batch; throws NumericError naming the
/// first non-finite loss component.
Objective::Evaluation compute_gradients(const Objective& objective, const ModelParams& params,
                                        std::span<const std::size_t> batch);

/// One bias-corrected Adam update.
void adam_step(ModelParams& params, const ModelParams& grads, OptimizerState& state, double lr,
               const TrainConfig& config);

/// learning_rate * lr_decay^floor(epoch / lr_step)
double lr_at(int epoch, const TrainConfig& config);

/// Sample order of one epoch: Fisher-Yates over 0..n-1 with Rng(seed, epoch stream).
std::vector<std::size_t> epoch_order(std::size_t samples, std::uint64_t seed, int epoch);

struct Checkpoint {
  ModelParams params;
  OptimizerState optimizer;
  int epoch = 0;  // completed epochs
  PercentilePair percentiles;
  bool zero_self_walks = false;
};

/// Sequence of float64 envelopes: meta (1 x 8), params, first moment, second moment.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct TrainResult {
  ModelParams params;
  OptimizerState optimizer;
  TrainHistory history;
  int epochs_completed = 0;
};

/// Runs config.epochs epochs of shuffled mini-batch Adam. Starts from `resume`
/// when given (its epoch count is taken as already completed).
TrainResult train(const Objective& objective, const TrainConfig& config, const Checkpoint* resume = nullptr,
                  std::ostream* log = nullptr);

struct GradCheckOptions {
  std::size_t entries = 100;  // compared entries to collect
  double step = 1e-4;
  std::uint64_t seed = 0;
  bool flip_sign = false;     // test hook: negate the analytic gradient
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  double mean_rel_error = 0.0;
  std::size_t compared = 0;
  std::size_t masked_entries = 0;  // excluded: outside the neighbourhood support
  std::size_t kink_skipped = 0;    // excluded: a ReLU or clamp switched within +-step
  double bound = 0.0;
  bool passed = false;
};

/// Relative error |a - n| / max(|a|, |n|); zero when both vanish.
double relative_error(double analytic, double numeric);

/// Central differences on a random subsample of unmasked entries. Entries
/// whose perturbation flips any ReLU or clamp are resampled, since the
/// difference quotient does not estimate a derivative there.
GradCheckReport grad_check(const Objective& objective, const ModelParams& params, std::span<const std::size_t> batch,
                           const GradCheckOptions& options = {});

}  // namespace bncl

#endif  // BNCL_TRAINER_HPP_
