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

#ifndef INTDIFF__DENOISER_HPP_
#define INTDIFF__DENOISER_HPP_

#include "intdiff/intention.hpp"
#include "intdiff/schedule.hpp"
#include "intdiff/types.hpp"

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace intdiff
{

/// Widths and depths of the three networks. Defaults are the full-size
/// configuration; tests and desk-scale runs use much smaller ones.
struct ModelConfig
{
  int steps = kDefaultSteps;  ///< K, diffusion steps the noise net is trained for

  int d_enc = 128;  ///< motion encoder width (d_model of F_obs)
  int enc_layers = 2;
  int enc_heads = 4;

  int d_int = 256;  ///< intention estimator
  int int_layers = 4;
  int int_heads = 4;

  int d_noise = 512;  ///< noise-prediction network
  int noise_layers = 4;
  int noise_heads = 8;

  int ff_mult = 4;  ///< feed-forward hidden width = ff_mult * d
  /// Trajectories are divided by this before entering the networks and the
  /// diffusion process.
  double traj_scale = 1.0;

  bool operator==(const ModelConfig &) const = default;
};

void validate(const ModelConfig & cfg);
nlohmann::json to_json(const ModelConfig & cfg);
ModelConfig model_config_from_json(const nlohmann::json & j);

struct LinearIdx
{
  int w = -1;  ///< in x out
  int b = -1;  ///< 1 x out
};

struct NormIdx
{
  int gain = -1;
  int bias = -1;
};

/// Pre-norm transformer block.
struct BlockIdx
{
  NormIdx ln1;
  LinearIdx qkv;
  LinearIdx proj;
  NormIdx ln2;
  LinearIdx ff1;
  LinearIdx ff2;
};

/// Tensor indices of every parameter, derived deterministically from a
/// ModelConfig.
struct ParamLayout
{
  LinearIdx enc_in;
  std::vector<BlockIdx> enc_blocks;
  NormIdx enc_norm;

  LinearIdx int_in;
  std::vector<BlockIdx> int_blocks;
  NormIdx int_norm;
  LinearIdx int_out;

  LinearIdx hist_token;
  LinearIdx intent_token;
  int null_embedding = -1;
  LinearIdx step_mlp1;
  LinearIdx step_mlp2;
  LinearIdx fut_in;
  std::vector<BlockIdx> noise_blocks;
  NormIdx noise_norm;
  LinearIdx noise_out;
};

/**
 * @brief All learnable parameters, as an ordered list of named tensors.
 *
 * Gradients and optimizer moments use the same type. Tensor names are
 * stable and prefixed by owner: `enc.`, `int.`, `noise.`.
 */
class DenoiserParams
{
public:
  DenoiserParams() = default;

  /// Every tensor zero.
  static DenoiserParams zeros(const ModelConfig & cfg);
  /// Uniform fan-in initialization: weights and biases of a linear map with
  /// fan-in n are drawn from U(-1/sqrt(n), 1/sqrt(n)); norm gains are 1,
  /// norm biases 0; the null embedding is drawn from U(-1, 1).
  static DenoiserParams initialize(const ModelConfig & cfg, std::uint64_t seed);

  DenoiserParams zeros_like() const { return zeros(config_); }

  const ModelConfig & config() const { return config_; }
  const ParamLayout & layout() const { return layout_; }

  std::size_t tensor_count() const { return tensors_.size(); }
  const std::string & name(std::size_t i) const { return names_[i]; }
  Mat & tensor(std::size_t i) { return tensors_[i]; }
  const Mat & tensor(std::size_t i) const { return tensors_[i]; }
  std::vector<Mat> & tensors() { return tensors_; }
  const std::vector<Mat> & tensors() const { return tensors_; }

  /// Index of a tensor by name; throws ValidationError if absent.
  std::size_t index_of(const std::string & name) const;

  std::size_t parameter_count() const;
  bool all_finite() const;
  double squared_norm() const;

  /// Same config and bitwise-equal tensors.
  bool bitwise_equal(const DenoiserParams & other) const;

private:
  ModelConfig config_;
  ParamLayout layout_;
  std::vector<std::string> names_;
  std::vector<Mat> tensors_;
};

/// Number of scalar parameters for a configuration, without allocating.
std::size_t parameter_count(const ModelConfig & cfg);

/// Conditioning inputs of the noise network. When `is_null` is set the
/// learned null embedding replaces both history and intention.
struct Condition
{
  Mat history_features;  ///< F_obs, 8 x d_enc
  IntentionVector intention;
  bool is_null = false;

  static Condition null() { return Condition{Mat(), {}, true}; }
};

/// Motion encoder: normalized 8 x 2 history (meters) -> 8 x d_enc features.
Mat encode_history(const DenoiserParams & params, const Trajectory & obs);

/// Intention estimator head: F_obs -> two unconstrained codes.
IntentionVector estimate_intention(const DenoiserParams & params, const Mat & history_features);

/// Noise prediction eps_theta(y_k, cond, k). y_k is 12 x 2 in diffusion
/// space (normalized meters divided by traj_scale); k in [1, K].
Trajectory predict_noise(
  const DenoiserParams & params, const Trajectory & y_k, const Condition & cond, int k);

/// One element of a training batch with its diffusion draw fixed, so that the
/// loss is a deterministic function of the parameters.
struct TrainingExample
{
  Trajectory obs;          ///< normalized 8 x 2, meters
  Trajectory fut;          ///< normalized 12 x 2, meters
  IntentionVector target;  ///< encoded future intention
  int k = 1;               ///< diffusion step in [1, K]
  Trajectory eps;          ///< 12 x 2 standard normal draw
  bool use_null = false;   ///< null-condition dropout outcome
};

struct LossConfig
{
  double loss_alpha = 1.0;  ///< weight of the intention term
  double loss_beta = 0.5;   ///< weight of the noise-estimation term
  int threads = 1;          ///< batch partitions; reduction order is fixed
};

struct EvalCounters
{
  std::size_t conditional = 0;
  std::size_t unconditional = 0;
};

struct LossResult
{
  double loss = 0.0;            ///< loss_alpha * intent_term + loss_beta * diffusion_term
  double intent_term = 0.0;     ///< mean intention MSE over the batch
  double diffusion_term = 0.0;  ///< mean noise MSE over the batch
  DenoiserParams grads;
  EvalCounters counters;
};

/**
 * @brief Combined loss and its exact gradient.
 *
 * For each example the intention head is trained against `target` from
 * F_obs; the noise net sees y_k = sqrt(abar_k) y0 + sqrt(1 - abar_k) eps with
 * y0 = fut / traj_scale, conditioned on (F_obs, target) or on the null
 * embedding when `use_null` is set, and regresses eps.
 */
LossResult loss_and_gradients(
  const DenoiserParams & params, std::span<const TrainingExample> batch,
  const NoiseSchedule & sched, const LossConfig & cfg);

/// Checkpoint container: params plus optional same-shaped auxiliary tensor
/// sets (e.g. optimizer moments) and free-form metadata.
struct Checkpoint
{
  DenoiserParams params;
  std::map<std::string, DenoiserParams> aux;
  nlohmann::json meta = nlohmann::json::object();
};

inline constexpr int kCheckpointVersion = 1;

/// Binary layout: 8-byte magic "INTDIFFC", uint64 header length, JSON header
/// (format, version, config, tensor names/shapes, section names, meta), then
/// each section's tensors as little-endian float64 in header order.
void write_checkpoint(std::ostream & out, const Checkpoint & ckpt);
Checkpoint read_checkpoint(std::istream & in);
void save_checkpoint(const std::string & path, const Checkpoint & ckpt);
Checkpoint load_checkpoint(const std::string & path);

}  // namespace intdiff

#endif  // INTDIFF__DENOISER_HPP_
