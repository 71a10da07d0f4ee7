// Copyright 2026 The IntDiff Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef INTDIFF__TRAINING_HPP_
#define INTDIFF__TRAINING_HPP_

#include "intdiff/denoiser.hpp"
#include "intdiff/intention.hpp"
#include "intdiff/rng.hpp"
#include "intdiff/schedule.hpp"
#include "intdiff/trajdata.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace intdiff
{

/// Optimizer is Adam with the canonical moment constants below.
struct TrainConfig
{
  double learning_rate = 1e-3;
  int batch_size = 256;
  int epochs = 100;
  double loss_alpha = 1.0;
  double loss_beta = 0.5;
  double null_dropout = 0.1;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  /// Global gradient-norm clip; 0 disables clipping.
  double grad_clip = 0.0;
  int threads = 1;
  /// Write a checkpoint every N epochs (0: only at the end).
  int checkpoint_every = 0;
};

void validate(const TrainConfig & cfg);
nlohmann::json to_json(const TrainConfig & cfg);

struct LossReport
{
  int epoch = 0;
  double total = 0.0;
  double intent_term = 0.0;
  double diffusion_term = 0.0;
};

struct AdamState
{
  std::uint64_t step = 0;
  DenoiserParams m;
  DenoiserParams v;
};

struct TrainState
{
  DenoiserParams params;
  AdamState adam;
  int epochs_completed = 0;
};

TrainState init_train_state(const ModelConfig & model, std::uint64_t seed);

/// A normalized window with its encoded future intention.
struct TrainingSample
{
  Trajectory obs;
  Trajectory fut;
  IntentionVector target;
};

/// Normalize every window and label its future segment.
std::vector<TrainingSample> make_training_set(
  const std::vector<TrajectoryWindow> & windows, const IntentionThresholds & th = {},
  double dt = kFrameStep);

/// Diffusion draws for one batch, in a fixed order per window: k uniform in
/// [1, K], then 24 standard normals for eps, then the dropout coin.
std::vector<TrainingExample> draw_examples(
  std::span<const TrainingSample> batch, int steps, double null_dropout, Rng & rng);

/// One Adam update on `state`. Throws TrainingError on a non-finite loss.
LossReport train_step(
  TrainState & state, std::span<const TrainingSample> batch, const TrainConfig & cfg,
  const NoiseSchedule & sched, Rng & rng);

/// Shuffled sample order for an epoch, a pure function of (n, seed, epoch).
std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, int epoch);

struct TrainLoopOptions
{
  std::string metrics_path;     ///< CSV `epoch,total,intent,diffusion`; empty to skip
  std::string checkpoint_path;  ///< empty to skip writing checkpoints
  /// Called after each epoch.
  std::function<void(const LossReport &)> on_epoch;
};

/**
 * @brief Train from `state.epochs_completed` up to `cfg.epochs`.
 *
 * Each epoch shuffles with epoch_permutation() and seeds every batch from
 * (seed, epoch, batch index), so a run resumed from a checkpoint reproduces
 * the remaining epochs of an uninterrupted run exactly. When resuming, the
 * metrics file is appended to.
 */
TrainState train_loop(
  std::span<const TrainingSample> dataset, const TrainConfig & cfg, const NoiseSchedule & sched,
  TrainState state, const TrainLoopOptions & options = {});

Checkpoint to_checkpoint(const TrainState & state, const TrainConfig & cfg);
TrainState train_state_from_checkpoint(const Checkpoint & ckpt);

}  // namespace intdiff

#endif  // INTDIFF__TRAINING_HPP_
