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

#include "intdiff/config.hpp"

#include "intdiff/errors.hpp"

#include <fstream>

namespace intdiff
{

NoiseSchedule RunConfig::schedule() const
{
  return build_linear_schedule(steps, beta_start, beta_end);
}

SamplerConfig RunConfig::sampler() const
{
  SamplerConfig s;
  s.steps = steps;
  s.stride = sampler_stride;
  s.n_samples = n_samples;
  s.seed = seed;
  s.threads = train.threads;
  return s;
}

nlohmann::json to_json(const RunConfig & c)
{
  nlohmann::json j = {
    {"steps", c.steps},
    {"beta_start", c.beta_start},
    {"beta_end", c.beta_end},
    {"guidance_w", c.guidance.w},
    {"sampler_stride", c.sampler_stride},
    {"n_samples", c.n_samples},
    {"v_lt", c.thresholds.v_lt},
    {"v_rt", c.thresholds.v_rt},
    {"a_acc", c.thresholds.a_acc},
    {"a_dec", c.thresholds.a_dec},
    {"dt", c.dt},
    {"seed", c.seed},
  };
  auto model = to_json(c.model);
  model.erase("steps");
  j.update(model);
  auto train = to_json(c.train);
  train.erase("seed");
  j.update(train);
  return j;
}

RunConfig run_config_from_json(const nlohmann::json & j)
{
  if (!j.is_object()) {
    throw ValidationError("config must be a flat JSON object");
  }
  RunConfig c;
  const auto known = to_json(c);
  for (const auto & [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw ValidationError("unknown config key '" + key + "'");
    }
    if (value.is_object() || value.is_array()) {
      throw ValidationError("config key '" + key + "' must be a scalar");
    }
  }
  try {
    c.steps = j.value("steps", c.steps);
    c.beta_start = j.value("beta_start", c.beta_start);
    c.beta_end = j.value("beta_end", c.beta_end);
    c.guidance.w = j.value("guidance_w", c.guidance.w);
    c.sampler_stride = j.value("sampler_stride", c.sampler_stride);
    c.n_samples = j.value("n_samples", c.n_samples);
    c.thresholds.v_lt = j.value("v_lt", c.thresholds.v_lt);
    c.thresholds.v_rt = j.value("v_rt", c.thresholds.v_rt);
    c.thresholds.a_acc = j.value("a_acc", c.thresholds.a_acc);
    c.thresholds.a_dec = j.value("a_dec", c.thresholds.a_dec);
    c.dt = j.value("dt", c.dt);
    c.seed = j.value("seed", c.seed);

    auto model = to_json(c.model);
    model.update(j);
    model["steps"] = c.steps;
    c.model = model_config_from_json(model);

    auto & t = c.train;
    t.learning_rate = j.value("learning_rate", t.learning_rate);
    t.batch_size = j.value("batch_size", t.batch_size);
    t.epochs = j.value("epochs", t.epochs);
    t.loss_alpha = j.value("loss_alpha", t.loss_alpha);
    t.loss_beta = j.value("loss_beta", t.loss_beta);
    t.null_dropout = j.value("null_dropout", t.null_dropout);
    t.adam_beta1 = j.value("adam_beta1", t.adam_beta1);
    t.adam_beta2 = j.value("adam_beta2", t.adam_beta2);
    t.adam_eps = j.value("adam_eps", t.adam_eps);
    t.grad_clip = j.value("grad_clip", t.grad_clip);
    t.threads = j.value("threads", t.threads);
    t.checkpoint_every = j.value("checkpoint_every", t.checkpoint_every);
    t.seed = c.seed;
  } catch (const nlohmann::json::exception & e) {
    throw ValidationError(std::string("bad config value: ") + e.what());
  }
  validate(c.train);
  validate(c.guidance);
  validate(c.thresholds);
  validate(c.sampler());
  if (!(c.dt > 0.0)) {
    throw ValidationError("dt must be positive");
  }
  (void)c.schedule();
  return c;
}

RunConfig load_run_config(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config '" + path + "'");
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception & e) {
    throw ValidationError(path + ": " + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace intdiff
