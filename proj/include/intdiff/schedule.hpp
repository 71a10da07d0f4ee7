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

#ifndef INTDIFF__SCHEDULE_HPP_
#define INTDIFF__SCHEDULE_HPP_

#include "intdiff/types.hpp"

#include <iosfwd>
#include <vector>

namespace intdiff
{

/**
 * @brief Variance schedule of the forward diffusion process.
 *
 * Steps are 1-based: beta(k), alpha(k), alpha_bar(k) for k in [1, K].
 * alpha_bar(0) is defined as 1 so that step 0 is the clean data. All values
 * are 64-bit.
 */
class NoiseSchedule
{
public:
  NoiseSchedule() = default;
  /// Builds alphas and cumulative products from betas; validates invariants.
  explicit NoiseSchedule(std::vector<double> betas);

  int steps() const { return static_cast<int>(betas_.size()); }
  double beta(int k) const;
  double alpha(int k) const;
  /// k in [0, K]; alpha_bar(0) == 1.
  double alpha_bar(int k) const;

  const std::vector<double> & betas() const { return betas_; }
  const std::vector<double> & alphas() const { return alphas_; }
  const std::vector<double> & alpha_bars() const { return alpha_bars_; }

private:
  void check_step(int k, int lo) const;

  std::vector<double> betas_;
  std::vector<double> alphas_;
  std::vector<double> alpha_bars_;
};

inline constexpr int kDefaultSteps = 100;
inline constexpr double kDefaultBetaStart = 1e-4;
inline constexpr double kDefaultBetaEnd = 5e-2;

/// beta linear from beta_start (k = 1) to beta_end (k = K).
NoiseSchedule build_linear_schedule(
  int steps = kDefaultSteps, double beta_start = kDefaultBetaStart,
  double beta_end = kDefaultBetaEnd);

struct MarginalParams
{
  double mean_scale = 1.0;  ///< sqrt(alpha_bar_k)
  double std = 0.0;         ///< sqrt(1 - alpha_bar_k)
};

/// q(Y_k | Y_0) = N(mean_scale * Y_0, std^2 I), k in [1, K].
MarginalParams marginal_params(int k, const NoiseSchedule & sched);

/// sqrt(alpha_bar_k) * y0 + sqrt(1 - alpha_bar_k) * eps, k in [1, K].
Trajectory forward_sample(const Trajectory & y0, int k, const Trajectory & eps,
                          const NoiseSchedule & sched);

/// Step-0 forward process: returns y0 unchanged.
inline Trajectory forward_identity(const Trajectory & y0) { return y0; }

/// One transition q(Y_k | Y_{k-1}): sqrt(1 - beta_k) * y_prev + sqrt(beta_k) * eps.
Trajectory forward_transition(const Trajectory & y_prev, int k, const Trajectory & eps,
                              const NoiseSchedule & sched);

/// CSV with header `k,beta,alpha,alpha_bar`, one row per step.
void write_schedule_csv(std::ostream & out, const NoiseSchedule & sched);

}  // namespace intdiff

#endif  // INTDIFF__SCHEDULE_HPP_
