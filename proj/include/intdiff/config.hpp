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

#ifndef INTDIFF__CONFIG_HPP_
#define INTDIFF__CONFIG_HPP_

#include "intdiff/denoiser.hpp"
#include "intdiff/intention.hpp"
#include "intdiff/sampler.hpp"
#include "intdiff/schedule.hpp"
#include "intdiff/training.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>

namespace intdiff
{

/// Everything a CLI run needs, read from one flat JSON object. See
/// docs/FORMATS.md for the key list. Unknown keys are rejected.
struct RunConfig
{
  int steps = kDefaultSteps;
  double beta_start = kDefaultBetaStart;
  double beta_end = kDefaultBetaEnd;

  ModelConfig model;
  TrainConfig train;
  GuidanceConfig guidance;
  int sampler_stride = 20;
  int n_samples = 20;

  IntentionThresholds thresholds;
  double dt = kFrameStep;
  std::uint64_t seed = 0;

  NoiseSchedule schedule() const;
  SamplerConfig sampler() const;
};

RunConfig run_config_from_json(const nlohmann::json & j);
nlohmann::json to_json(const RunConfig & cfg);
RunConfig load_run_config(const std::string & path);

}  // namespace intdiff

#endif  // INTDIFF__CONFIG_HPP_
