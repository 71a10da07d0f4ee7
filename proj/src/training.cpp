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

#include "intdiff/training.hpp"

#include "intdiff/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace intdiff
{

void validate(const TrainConfig & cfg)
{
  if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate)) {
    throw ValidationError("learning_rate must be finite and non-negative");
  }
  if (cfg.batch_size < 1) {
    throw ValidationError("batch_size must be >= 1");
  }
  if (cfg.epochs < 0) {
    throw ValidationError("epochs must be >= 0");
  }
  if (!(cfg.null_dropout >= 0.0 && cfg.null_dropout <= 1.0)) {
    throw ValidationError("null_dropout must lie in [0, 1]");
  }
  if (!(cfg.adam_beta1 >= 0.0 && cfg.adam_beta1 < 1.0) ||
      !(cfg.adam_beta2 >= 0.0 && cfg.adam_beta2 < 1.0) || !(cfg.adam_eps > 0.0)) {
    throw ValidationError("invalid Adam constants");
  }
  if (cfg.grad_clip < 0.0) {
    throw ValidationError("grad_clip must be >= 0");
  }
  if (cfg.checkpoint_every < 0) {
    throw ValidationError("checkpoint_every must be >= 0");
  }
}

nlohmann::json to_json(const TrainConfig & cfg)
{
  return {
    {"learning_rate", cfg.learning_rate}, {"batch_size", cfg.batch_size},
    {"epochs", cfg.epochs},               {"loss_alpha", cfg.loss_alpha},
    {"loss_beta", cfg.loss_beta},         {"null_dropout", cfg.null_dropout},
    {"seed", cfg.seed},                   {"adam_beta1", cfg.adam_beta1},
    {"adam_beta2", cfg.adam_beta2},       {"adam_eps", cfg.adam_eps},
    {"grad_clip", cfg.grad_clip},         {"threads", cfg.threads},
    {"checkpoint_every", cfg.checkpoint_every},
  };
}

TrainState init_train_state(const ModelConfig & model, std::uint64_t seed)
{
  TrainState s;
  s.params = DenoiserParams::initialize(model, seed);
  s.adam.m = s.params.zeros_like();
  s.adam.v = s.params.zeros_like();
  return s;
}

std::vector<TrainingSample> make_training_set(
  const std::vector<TrajectoryWindow> & windows, const IntentionThresholds & th, double dt)
{
  validate(th);
  std::vector<TrainingSample> out;
  out.reserve(windows.size());
  for (const auto & w : windows) {
    validate_window(w);
    const auto n = normalize(w);
    out.push_back({n.obs, n.fut, encode(label_window(n, th, dt).label)});
  }
  return out;
}

std::vector<TrainingExample> draw_examples(
  std::span<const TrainingSample> batch, int steps, double null_dropout, Rng & rng)
{
  std::vector<TrainingExample> out;
  out.reserve(batch.size());
  for (const auto & s : batch) {
    TrainingExample ex;
    ex.obs = s.obs;
    ex.fut = s.fut;
    ex.target = s.target;
    ex.k = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(steps)));
    ex.eps.resize(kFutLen, 2);
    for (Eigen::Index i = 0; i < ex.eps.size(); ++i) {
      ex.eps.data()[i] = rng.normal();
    }
    ex.use_null = rng.uniform() < null_dropout;
    out.push_back(std::move(ex));
  }
  return out;
}

namespace
{

void adam_update(TrainState & state, const DenoiserParams & grads, const TrainConfig & cfg)
{
  auto & adam = state.adam;
  ++adam.step;
  const double t = static_cast<double>(adam.step);
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, t);
  for (std::size_t i = 0; i < state.params.tensor_count(); ++i) {
    const Mat & g = grads.tensor(i);
    Mat & m = adam.m.tensor(i);
    Mat & v = adam.v.tensor(i);
    m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g;
    v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * g.cwiseAbs2();
    const Mat update =
      ((m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.adam_eps)).matrix();
    state.params.tensor(i) -= cfg.learning_rate * update;
  }
}

std::string step_diagnostic(
  const TrainState & state, std::span<const TrainingExample> examples, const LossResult & r)
{
  std::ostringstream os;
  os << "non-finite loss at optimizer step " << state.adam.step + 1 << " (loss=" << r.loss
     << ", intent=" << r.intent_term << ", diffusion=" << r.diffusion_term
     << ", param_norm=" << std::sqrt(state.params.squared_norm())
     << ", grad_norm=" << std::sqrt(r.grads.squared_norm()) << ", k=[";
  for (std::size_t i = 0; i < examples.size(); ++i) {
    os << (i ? "," : "") << examples[i].k;
  }
  os << "])";
  return os.str();
}

}  // namespace

LossReport train_step(
  TrainState & state, std::span<const TrainingSample> batch, const TrainConfig & cfg,
  const NoiseSchedule & sched, Rng & rng)
{
  if (batch.empty()) {
    throw ValidationError("train_step: empty batch");
  }
  const auto examples = draw_examples(batch, sched.steps(), cfg.null_dropout, rng);
  LossConfig lc{cfg.loss_alpha, cfg.loss_beta, cfg.threads};
  LossResult r = loss_and_gradients(state.params, examples, sched, lc);
  if (!std::isfinite(r.loss) || !r.grads.all_finite()) {
    throw TrainingError(step_diagnostic(state, examples, r));
  }
  if (cfg.grad_clip > 0.0) {
    const double norm = std::sqrt(r.grads.squared_norm());
    if (norm > cfg.grad_clip) {
      const double s = cfg.grad_clip / norm;
      for (auto & t : r.grads.tensors()) {
        t *= s;
      }
    }
  }
  adam_update(state, r.grads, cfg);
  return {state.epochs_completed, r.loss, r.intent_term, r.diffusion_term};
}

std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, int epoch)
{
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(derive_seed({seed, static_cast<std::uint64_t>(epoch), 0x5f1eULL}));
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

Checkpoint to_checkpoint(const TrainState & state, const TrainConfig & cfg)
{
  Checkpoint ckpt;
  ckpt.params = state.params;
  ckpt.aux.emplace("adam_m", state.adam.m);
  ckpt.aux.emplace("adam_v", state.adam.v);
  ckpt.meta = {
    {"epochs_completed", state.epochs_completed},
    {"adam_step", state.adam.step},
    {"train_config", to_json(cfg)},
  };
  return ckpt;
}

TrainState train_state_from_checkpoint(const Checkpoint & ckpt)
{
  TrainState s;
  s.params = ckpt.params;
  const auto m = ckpt.aux.find("adam_m");
  const auto v = ckpt.aux.find("adam_v");
  if (m != ckpt.aux.end() && v != ckpt.aux.end()) {
    s.adam.m = m->second;
    s.adam.v = v->second;
    s.adam.step = ckpt.meta.value("adam_step", std::uint64_t{0});
  } else {
    s.adam.m = s.params.zeros_like();
    s.adam.v = s.params.zeros_like();
  }
  s.epochs_completed = ckpt.meta.value("epochs_completed", 0);
  return s;
}

TrainState train_loop(
  std::span<const TrainingSample> dataset, const TrainConfig & cfg, const NoiseSchedule & sched,
  TrainState state, const TrainLoopOptions & options)
{
  validate(cfg);
  if (dataset.empty()) {
    throw ValidationError("train_loop: empty dataset");
  }
  if (sched.steps() != state.params.config().steps) {
    throw ValidationError("schedule step count does not match the model's K");
  }

  std::ofstream metrics;
  if (!options.metrics_path.empty()) {
    const bool resuming = state.epochs_completed > 0;
    metrics.open(options.metrics_path, resuming ? std::ios::app : std::ios::trunc);
    if (!metrics) {
      throw IoError("cannot open metrics file '" + options.metrics_path + "'");
    }
    if (!resuming) {
      metrics << "epoch,total,intent,diffusion\n";
    }
  }
  const auto write_checkpoint_file = [&] {
    if (options.checkpoint_path.empty()) {
      return;
    }
    try {
      save_checkpoint(options.checkpoint_path, to_checkpoint(state, cfg));
    } catch (const IoError & e) {
      throw IoError("checkpoint '" + options.checkpoint_path + "': " + e.what());
    }
  };

  const std::size_t n = dataset.size();
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  std::vector<TrainingSample> batch;
  while (state.epochs_completed < cfg.epochs) {
    const int epoch = state.epochs_completed;
    const auto perm = epoch_permutation(n, cfg.seed, epoch);
    double intent_sum = 0.0;
    double diffusion_sum = 0.0;
    std::size_t b = 0;
    for (std::size_t start = 0; start < n; start += bs, ++b) {
      const std::size_t end = std::min(n, start + bs);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(dataset[perm[i]]);
      }
      Rng rng(derive_seed({cfg.seed, static_cast<std::uint64_t>(epoch), b, 0xba7cULL}));
      const auto r = train_step(state, batch, cfg, sched, rng);
      intent_sum += r.intent_term * static_cast<double>(end - start);
      diffusion_sum += r.diffusion_term * static_cast<double>(end - start);
    }
    LossReport report;
    report.epoch = epoch;
    report.intent_term = intent_sum / static_cast<double>(n);
    report.diffusion_term = diffusion_sum / static_cast<double>(n);
    report.total = cfg.loss_alpha * report.intent_term + cfg.loss_beta * report.diffusion_term;
    state.epochs_completed = epoch + 1;

    if (metrics.is_open()) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", report.epoch, report.total,
                    report.intent_term, report.diffusion_term);
      metrics << buf << std::flush;
      if (!metrics) {
        throw IoError("failed writing metrics file '" + options.metrics_path + "'");
      }
    }
    if (options.on_epoch) {
      options.on_epoch(report);
    }
    if (cfg.checkpoint_every > 0 && state.epochs_completed % cfg.checkpoint_every == 0 &&
        state.epochs_completed < cfg.epochs) {
      write_checkpoint_file();
    }
  }
  write_checkpoint_file();
  return state;
}

}  // namespace intdiff
