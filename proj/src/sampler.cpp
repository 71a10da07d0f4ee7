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

#include "intdiff/sampler.hpp"

#include "intdiff/errors.hpp"
#include "intdiff/rng.hpp"

#include <cmath>
#include <string>
#include <thread>

namespace intdiff
{

void validate(const GuidanceConfig & g)
{
  if (!(g.w >= 0.0 && g.w <= 1.0)) {
    throw ValidationError("guidance scale w must lie in [0, 1]");
  }
}

void validate(const SamplerConfig & s)
{
  if (s.steps < 1) {
    throw ValidationError("sampler needs K >= 1");
  }
  if (s.stride < 1 || s.stride > s.steps) {
    throw ValidationError("sampler stride must lie in [1, K]");
  }
  if (s.n_samples < 1) {
    throw ValidationError("n_samples must be >= 1");
  }
}

Trajectory guided_noise(const Trajectory & eps_cond, const Trajectory & eps_uncond, double w)
{
  if (eps_cond.rows() != eps_uncond.rows() || eps_cond.cols() != eps_uncond.cols()) {
    throw ValidationError("guided_noise: shape mismatch");
  }
  if (w == 1.0) {
    return eps_cond;
  }
  if (w == 0.0) {
    return eps_uncond;
  }
  return w * eps_cond + (1.0 - w) * eps_uncond;
}

Trajectory predict_x0(const Trajectory & y_k, const Trajectory & eps_hat, int k,
                      const NoiseSchedule & sched)
{
  const double ab = sched.alpha_bar(k);
  return (y_k - std::sqrt(1.0 - ab) * eps_hat) / std::sqrt(ab);
}

Trajectory ddim_step(const Trajectory & y_k, const Trajectory & eps_hat, int k_from, int k_to,
                     const NoiseSchedule & sched)
{
  if (!(k_to >= 0 && k_to < k_from && k_from <= sched.steps())) {
    throw ValidationError(
      "ddim_step needs 0 <= k_to < k_from <= K, got k_from=" + std::to_string(k_from) +
      " k_to=" + std::to_string(k_to));
  }
  if (y_k.rows() != eps_hat.rows() || y_k.cols() != eps_hat.cols()) {
    throw ValidationError("ddim_step: shape mismatch");
  }
  const Trajectory x0 = predict_x0(y_k, eps_hat, k_from, sched);
  const double ab_to = sched.alpha_bar(k_to);
  return std::sqrt(ab_to) * x0 + std::sqrt(1.0 - ab_to) * eps_hat;
}

std::vector<int> step_ladder(int steps, int stride)
{
  if (steps < 1 || stride < 1 || stride > steps) {
    throw ValidationError("step_ladder needs 1 <= stride <= K");
  }
  std::vector<int> ladder;
  for (int k = steps; k > 0; k -= stride) {
    ladder.push_back(k);
  }
  ladder.push_back(0);
  return ladder;
}

DenoiserPredictor::DenoiserPredictor(
  const DenoiserParams & params, Mat history_features, IntentionVector intention)
: params_(params), cond_{std::move(history_features), intention, false}
{
}

Trajectory DenoiserPredictor::predict(const Trajectory & y_k, bool null_condition, int k) const
{
  if (null_condition) {
    return predict_noise(params_, y_k, Condition::null(), k);
  }
  return predict_noise(params_, y_k, cond_, k);
}

ChainResult run_chain(const NoisePredictor & predictor, Trajectory y_start,
                      const std::vector<int> & ladder, const GuidanceConfig & gcfg,
                      const NoiseSchedule & sched, bool record_intermediate,
                      SamplerCounters * counters)
{
  validate(gcfg);
  if (ladder.size() < 2) {
    throw ValidationError("ladder needs at least two entries");
  }
  ChainResult out;
  Trajectory y = std::move(y_start);
  for (std::size_t j = 0; j + 1 < ladder.size(); ++j) {
    const int k_from = ladder[j];
    const int k_to = ladder[j + 1];
    const Trajectory eps_c = predictor.predict(y, false, k_from);
    const Trajectory eps_u = predictor.predict(y, true, k_from);
    if (counters != nullptr) {
      counters->conditional.fetch_add(1, std::memory_order_relaxed);
      counters->unconditional.fetch_add(1, std::memory_order_relaxed);
    }
    y = ddim_step(y, guided_noise(eps_c, eps_u, gcfg.w), k_from, k_to, sched);
    if (record_intermediate) {
      out.intermediates.push_back(y);
    }
    ++out.ladder_steps;
  }
  out.final_state = std::move(y);
  return out;
}

std::uint64_t chain_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t sample)
{
  return derive_seed({seed, stream, sample, 0xc4a1ULL});
}

PredictionSet sample_with(const NoisePredictor & predictor, double traj_scale,
                          const Point2 & origin, const IntentionVector & intention,
                          const GuidanceConfig & gcfg, const SamplerConfig & scfg,
                          const NoiseSchedule & sched, std::uint64_t stream)
{
  validate(gcfg);
  validate(scfg);
  if (scfg.steps != sched.steps()) {
    throw ValidationError("sampler K does not match the schedule");
  }
  const auto ladder = step_ladder(scfg.steps, scfg.stride);
  const auto n = static_cast<std::size_t>(scfg.n_samples);

  const auto to_world = [&](const Trajectory & y) {
    Trajectory t = traj_scale * y;
    t.rowwise() += origin.transpose();
    return t;
  };

  PredictionSet out;
  out.intention = intention;
  out.ladder.assign(ladder.begin() + 1, ladder.end());
  out.samples.resize(n);
  if (scfg.record_intermediate) {
    out.intermediates.assign(ladder.size() - 1, std::vector<Trajectory>(n));
  }

  SamplerCounters counters;
  const auto run_one = [&](std::size_t s) {
    Rng rng(chain_seed(scfg.seed, stream, s));
    Trajectory y(kFutLen, 2);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      y.data()[i] = rng.normal();
    }
    auto chain = run_chain(predictor, std::move(y), ladder, gcfg, sched,
                           scfg.record_intermediate, &counters);
    out.samples[s] = to_world(chain.final_state);
    for (std::size_t j = 0; j < chain.intermediates.size(); ++j) {
      out.intermediates[j][s] = to_world(chain.intermediates[j]);
    }
  };

  const auto threads = static_cast<std::size_t>(std::max(1, scfg.threads));
  if (threads == 1 || n == 1) {
    for (std::size_t s = 0; s < n; ++s) {
      run_one(s);
    }
  } else {
    std::vector<std::thread> workers;
    const std::size_t parts = std::min(threads, n);
    workers.reserve(parts);
    for (std::size_t p = 0; p < parts; ++p) {
      workers.emplace_back([&, p] {
        for (std::size_t s = p; s < n; s += parts) {
          run_one(s);
        }
      });
    }
    for (auto & w : workers) {
      w.join();
    }
  }
  out.conditional_evals = counters.conditional.load();
  out.unconditional_evals = counters.unconditional.load();
  return out;
}

PredictionSet sample(const DenoiserParams & params, const TrajectoryWindow & window,
                     const IntentionVector & intention, const GuidanceConfig & gcfg,
                     const SamplerConfig & scfg, const NoiseSchedule & sched,
                     std::uint64_t stream)
{
  validate_window(window);
  if (scfg.steps != params.config().steps) {
    throw ValidationError("sampler K does not match the model's K");
  }
  const TrajectoryWindow norm = normalize(window);
  DenoiserPredictor predictor(params, encode_history(params, norm.obs), intention);
  return sample_with(predictor, params.config().traj_scale, norm.origin, intention, gcfg, scfg,
                     sched, stream);
}

}  // namespace intdiff
