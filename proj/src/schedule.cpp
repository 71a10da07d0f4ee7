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

#include "intdiff/schedule.hpp"

#include "intdiff/errors.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace intdiff
{

NoiseSchedule::NoiseSchedule(std::vector<double> betas) : betas_(std::move(betas))
{
  if (betas_.empty()) {
    throw ValidationError("noise schedule needs at least one step");
  }
  alphas_.reserve(betas_.size());
  alpha_bars_.reserve(betas_.size());
  double prod = 1.0;
  for (const double b : betas_) {
    if (!(b > 0.0 && b < 1.0)) {
      throw ValidationError("every beta must lie in (0, 1)");
    }
    const double a = 1.0 - b;
    prod *= a;
    alphas_.push_back(a);
    alpha_bars_.push_back(prod);
  }
  for (std::size_t i = 0; i < alpha_bars_.size(); ++i) {
    const double prev = i == 0 ? 1.0 : alpha_bars_[i - 1];
    if (!(alpha_bars_[i] < prev && alpha_bars_[i] > 0.0)) {
      throw ValidationError("alpha_bar must be strictly decreasing and positive");
    }
  }
}

void NoiseSchedule::check_step(int k, int lo) const
{
  if (k < lo || k > steps()) {
    throw ValidationError(
      "diffusion step " + std::to_string(k) + " outside [" + std::to_string(lo) + ", " +
      std::to_string(steps()) + "]");
  }
}

double NoiseSchedule::beta(int k) const
{
  check_step(k, 1);
  return betas_[static_cast<std::size_t>(k - 1)];
}

double NoiseSchedule::alpha(int k) const
{
  check_step(k, 1);
  return alphas_[static_cast<std::size_t>(k - 1)];
}

double NoiseSchedule::alpha_bar(int k) const
{
  check_step(k, 0);
  return k == 0 ? 1.0 : alpha_bars_[static_cast<std::size_t>(k - 1)];
}

NoiseSchedule build_linear_schedule(int steps, double beta_start, double beta_end)
{
  if (steps < 1) {
    throw ValidationError("schedule needs K >= 1");
  }
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
    throw ValidationError("schedule needs 0 < beta_start <= beta_end < 1");
  }
  std::vector<double> betas(static_cast<std::size_t>(steps));
  for (int k = 1; k <= steps; ++k) {
    const double t = steps == 1 ? 0.0 : static_cast<double>(k - 1) / (steps - 1);
    betas[static_cast<std::size_t>(k - 1)] = beta_start + (beta_end - beta_start) * t;
  }
  return NoiseSchedule(std::move(betas));
}

MarginalParams marginal_params(int k, const NoiseSchedule & sched)
{
  if (k < 1 || k > sched.steps()) {
    throw ValidationError("marginal_params: step outside [1, K]");
  }
  const double ab = sched.alpha_bar(k);
  return {std::sqrt(ab), std::sqrt(1.0 - ab)};
}

Trajectory forward_sample(const Trajectory & y0, int k, const Trajectory & eps,
                          const NoiseSchedule & sched)
{
  if (y0.rows() != eps.rows() || y0.cols() != eps.cols()) {
    throw ValidationError("forward_sample: shape mismatch between y0 and eps");
  }
  const auto m = marginal_params(k, sched);
  return m.mean_scale * y0 + m.std * eps;
}

Trajectory forward_transition(const Trajectory & y_prev, int k, const Trajectory & eps,
                              const NoiseSchedule & sched)
{
  if (y_prev.rows() != eps.rows() || y_prev.cols() != eps.cols()) {
    throw ValidationError("forward_transition: shape mismatch");
  }
  const double b = sched.beta(k);
  return std::sqrt(1.0 - b) * y_prev + std::sqrt(b) * eps;
}

void write_schedule_csv(std::ostream & out, const NoiseSchedule & sched)
{
  out << "k,beta,alpha,alpha_bar\n";
  char buf[128];
  for (int k = 1; k <= sched.steps(); ++k) {
    std::snprintf(
      buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", k, sched.beta(k), sched.alpha(k),
      sched.alpha_bar(k));
    out << buf;
  }
}

}  // namespace intdiff
