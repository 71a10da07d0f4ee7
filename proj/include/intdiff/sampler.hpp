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

#ifndef INTDIFF__SAMPLER_HPP_
#define INTDIFF__SAMPLER_HPP_

#include "intdiff/denoiser.hpp"
#include "intdiff/intention.hpp"
#include "intdiff/schedule.hpp"
#include "intdiff/trajdata.hpp"
#include "intdiff/types.hpp"

#include <atomic>
#include <cstdint>
#include <vector>

namespace intdiff
{

struct GuidanceConfig
{
  /// Weight of the conditional prediction; the unconditional one gets 1 - w.
  double w = 0.9;
};

struct SamplerConfig
{
  int steps = kDefaultSteps;  ///< K
  int stride = 20;
  int n_samples = 20;
  std::uint64_t seed = 0;
  bool record_intermediate = false;
  /// Chains are distributed over this many threads; results do not depend on it.
  int threads = 1;
};

void validate(const GuidanceConfig & g);
void validate(const SamplerConfig & s);

/// w * eps_cond + (1 - w) * eps_uncond.
Trajectory guided_noise(const Trajectory & eps_cond, const Trajectory & eps_uncond, double w);

/// Deterministic (eta = 0) DDIM update from step k_from to k_to < k_from,
/// using cumulative alpha_bar with alpha_bar(0) = 1.
Trajectory ddim_step(const Trajectory & y_k, const Trajectory & eps_hat, int k_from, int k_to,
                     const NoiseSchedule & sched);

/// x0 estimate implied by a noise prediction at step k.
Trajectory predict_x0(const Trajectory & y_k, const Trajectory & eps_hat, int k,
                      const NoiseSchedule & sched);

/// K, K - stride, ..., ending exactly at 0 (last hop shortened if needed).
std::vector<int> step_ladder(int steps, int stride);

/// Noise predictor bound to one window's condition, in diffusion space.
class NoisePredictor
{
public:
  virtual ~NoisePredictor() = default;
  virtual Trajectory predict(const Trajectory & y_k, bool null_condition, int k) const = 0;
};

/// predict_noise() with a fixed conditional input.
class DenoiserPredictor : public NoisePredictor
{
public:
  DenoiserPredictor(const DenoiserParams & params, Mat history_features, IntentionVector intention);
  Trajectory predict(const Trajectory & y_k, bool null_condition, int k) const override;

private:
  const DenoiserParams & params_;
  Condition cond_;
};

/// Thread-safe call counters for the two guidance branches.
struct SamplerCounters
{
  std::atomic<std::size_t> conditional{0};
  std::atomic<std::size_t> unconditional{0};
};

struct ChainResult
{
  Trajectory final_state;                ///< y_0 in diffusion space
  std::vector<Trajectory> intermediates;  ///< y after each ladder hop (if recorded)
  std::size_t ladder_steps = 0;
};

/// Run one guided reverse chain from y_K along `ladder`.
ChainResult run_chain(const NoisePredictor & predictor, Trajectory y_start,
                      const std::vector<int> & ladder, const GuidanceConfig & gcfg,
                      const NoiseSchedule & sched, bool record_intermediate,
                      SamplerCounters * counters = nullptr);

struct PredictionSet
{
  /// n_samples trajectories (12 x 2), denormalized, meters.
  std::vector<Trajectory> samples;
  /// Ladder steps visited after the start, e.g. {80, 60, 40, 20, 0}.
  std::vector<int> ladder;
  /// intermediates[j][s]: sample s after hop j, denormalized. Empty unless
  /// recording was requested.
  std::vector<std::vector<Trajectory>> intermediates;
  IntentionVector intention;
  std::size_t conditional_evals = 0;
  std::size_t unconditional_evals = 0;
};

/// Per-chain RNG stream: derived from (seed, window stream, sample index) so
/// that serial and parallel runs agree bitwise.
std::uint64_t chain_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t sample);

/// Draw n_samples futures by guided DDIM. `predictor` works in diffusion
/// space; results are mapped back with `traj_scale` and `origin`.
PredictionSet sample_with(const NoisePredictor & predictor, double traj_scale,
                          const Point2 & origin, const IntentionVector & intention,
                          const GuidanceConfig & gcfg, const SamplerConfig & scfg,
                          const NoiseSchedule & sched, std::uint64_t stream = 0);

/// Full pipeline for one window: normalize, encode the history, condition on
/// `intention`, sample, denormalize.
PredictionSet sample(const DenoiserParams & params, const TrajectoryWindow & window,
                     const IntentionVector & intention, const GuidanceConfig & gcfg,
                     const SamplerConfig & scfg, const NoiseSchedule & sched,
                     std::uint64_t stream = 0);

}  // namespace intdiff

#endif  // INTDIFF__SAMPLER_HPP_
