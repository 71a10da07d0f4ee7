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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include "intdiff/denoiser.hpp"
#include "intdiff/errors.hpp"
#include "intdiff/harness.hpp"
#include "intdiff/intention.hpp"
#include "intdiff/rng.hpp"
#include "intdiff/sampler.hpp"
#include "intdiff/schedule.hpp"
#include "intdiff/training.hpp"
#include "intdiff/trajdata.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace
{

using namespace intdiff;
namespace fs = std::filesystem;

struct Outcome
{
  bool pass = false;
  std::string detail;
};

struct Criterion
{
  int id;
  const char * name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char * f, double a = 0, double b = 0, double c = 0, double d = 0)
{
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c, d);
  return buf;
}

Trajectory gaussian(Rng & rng, int rows = kFutLen)
{
  Trajectory t(rows, 2);
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    t.data()[i] = rng.normal();
  }
  return t;
}

bool same_bits(const Mat & a, const Mat & b)
{
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) ==
           0;
}

std::string slurp(const fs::path & p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ModelConfig tiny_model(int steps)
{
  ModelConfig mc;
  mc.steps = steps;
  mc.d_enc = 8;
  mc.enc_layers = 1;
  mc.enc_heads = 2;
  mc.d_int = 8;
  mc.int_layers = 1;
  mc.int_heads = 2;
  mc.d_noise = 8;
  mc.noise_layers = 1;
  mc.noise_heads = 2;
  mc.ff_mult = 2;
  return mc;
}

// ---------------------------------------------------------------------------

Outcome schedule_identities()
{
  double worst_identity = 0.0;
  bool decreasing = true;
  for (int K : {1, 4, 100}) {
    const auto s = K == 4 ? build_linear_schedule(4, 0.1, 0.4) : build_linear_schedule(K);
    for (int k = 1; k <= K; ++k) {
      decreasing = decreasing && s.alpha_bar(k) < s.alpha_bar(k - 1);
      const auto m = marginal_params(k, s);
      worst_identity =
        std::max(worst_identity, std::abs(m.mean_scale * m.mean_scale + m.std * m.std - 1.0));
    }
  }
  const auto s4 = build_linear_schedule(4, 0.1, 0.4);
  const double expect[] = {0.9, 0.72, 0.504, 0.3024};
  double worst_k4 = 0.0;
  for (int k = 1; k <= 4; ++k) {
    worst_k4 = std::max(worst_k4, std::abs(s4.alpha_bar(k) - expect[k - 1]));
  }
  const bool pass = decreasing && worst_identity <= 1e-12 && worst_k4 <= 1e-12;
  return {pass, fmt("identity err %.2e, K=4 alpha_bar err %.2e", worst_identity, worst_k4)};
}

Outcome forward_agreement()
{
  const auto s = build_linear_schedule(10, 1e-4, 5e-2);
  const Trajectory y0 = Trajectory::Constant(kFutLen, 2, 1.0);
  Rng rng(derive_seed({2024, 2}));
  const int trials = 100000;
  double sum_a = 0, sq_a = 0, sum_b = 0, sq_b = 0;
  for (int i = 0; i < trials; ++i) {
    const auto a = forward_sample(y0, 10, gaussian(rng), s);
    Trajectory b = y0;
    for (int k = 1; k <= 10; ++k) {
      b = forward_transition(b, k, gaussian(rng), s);
    }
    for (Eigen::Index j = 0; j < a.size(); ++j) {
      sum_a += a.data()[j];
      sq_a += a.data()[j] * a.data()[j];
      sum_b += b.data()[j];
      sq_b += b.data()[j] * b.data()[j];
    }
  }
  const double n = static_cast<double>(trials) * kFutLen * 2;
  const double mean_a = sum_a / n;
  const double mean_b = sum_b / n;
  const double var_a = sq_a / n - mean_a * mean_a;
  const double var_b = sq_b / n - mean_b * mean_b;
  const double dm = std::abs(mean_a - mean_b) / std::abs(mean_b);
  const double dv = std::abs(var_a - var_b) / var_b;
  return {dm < 0.02 && dv < 0.02,
          fmt("mean %.5f vs %.5f (%.3f%%), var %.5f", mean_a, mean_b, 100 * dm, var_a) +
            fmt(" vs %.5f (%.3f%%)", var_b, 100 * dv)};
}

class OraclePredictor : public NoisePredictor
{
public:
  OraclePredictor(Trajectory target, const NoiseSchedule & sched)
  : target_(std::move(target)), sched_(sched)
  {
  }
  Trajectory predict(const Trajectory & y_k, bool, int k) const override
  {
    const double ab = sched_.alpha_bar(k);
    return (y_k - std::sqrt(ab) * target_) / std::sqrt(1.0 - ab);
  }

private:
  Trajectory target_;
  const NoiseSchedule & sched_;
};

Outcome oracle_convergence()
{
  const auto s = build_linear_schedule();
  Rng rng(3);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const Trajectory target = gaussian(rng);
    const OraclePredictor oracle(target, s);
    for (int stride : {1, 10, 20}) {
      SamplerConfig sc;
      sc.stride = stride;
      sc.n_samples = 10;
      sc.seed = static_cast<std::uint64_t>(trial);
      const auto ps = sample_with(oracle, 1.0, Point2::Zero(), {}, GuidanceConfig{}, sc, s);
      for (const auto & y : ps.samples) {
        worst = std::max(worst, (y - target).cwiseAbs().maxCoeff());
      }
    }
  }
  return {worst < 1e-6, fmt("max |error| %.3e over strides {1,10,20}", worst)};
}

Outcome gradient_check()
{
  const auto mc = tiny_model(10);
  const auto sched = build_linear_schedule(10, 1e-4, 5e-2);
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    const auto p = DenoiserParams::initialize(mc, seed);
    SyntheticSpec sp;
    sp.count = 2;
    sp.noise_std = 0.05;
    sp.seed = seed;
    const auto ts = make_training_set(generate_synthetic(sp));
    Rng rng(seed);
    auto batch = draw_examples(ts, 10, 0.0, rng);
    batch[1].use_null = true;
    const LossConfig lc;
    const auto r = loss_and_gradients(p, batch, sched, lc);
    const double h = 1e-5;
    for (std::size_t t = 0; t < p.tensor_count(); ++t) {
      for (Eigen::Index i = 0; i < p.tensor(t).size(); ++i) {
        auto q = p;
        q.tensor(t).data()[i] += h;
        const double lp = loss_and_gradients(q, batch, sched, lc).loss;
        q.tensor(t).data()[i] -= 2.0 * h;
        const double lm = loss_and_gradients(q, batch, sched, lc).loss;
        const double fd = (lp - lm) / (2.0 * h);
        const double a = r.grads.tensor(t).data()[i];
        worst = std::max(worst, std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6}));
        ++checked;
      }
    }
  }
  return {worst < 1e-4,
          fmt("%.0f parameters x 3 seeds, worst relative error %.2e", checked / 3.0, worst)};
}

Outcome guidance_endpoints()
{
  const auto s = build_linear_schedule();
  const auto params = DenoiserParams::initialize(tiny_model(100), 5);
  Rng rng(5);
  const auto f = encode_history(params, gaussian(rng, kObsLen));
  const auto y = gaussian(rng);
  const auto c = predict_noise(params, y, Condition{f, {1.0, 0.0}, false}, 40);
  const auto u = predict_noise(params, y, Condition::null(), 40);
  const bool ends = same_bits(guided_noise(c, u, 1.0), c) && same_bits(guided_noise(c, u, 0.0), u);
  double worst = 0.0;
  for (double w : {0.0, 0.3, 0.5, 0.9, 1.0}) {
    const Trajectory expect = w * c + (1.0 - w) * u;
    worst = std::max(worst, (guided_noise(c, u, w) - expect).cwiseAbs().maxCoeff());
  }
  const auto g = guided_noise(Trajectory::Ones(12, 2), Trajectory::Zero(12, 2), 0.9);
  const bool default_ok = GuidanceConfig{}.w == 0.9 && (g.array() - 0.9).abs().maxCoeff() < 1e-15;
  return {ends && worst < 1e-14 && default_ok,
          std::string(ends ? "endpoints bitwise" : "endpoints differ") +
            fmt(", affine err %.2e at 5 weights", worst)};
}

// Labeler written without the library: explicit rotation by the history
// angle, then loops over raw differences.
IntentionLabel reference_label(const TrajectoryWindow & w, double dt)
{
  const double hx = w.obs(7, 0) - w.obs(0, 0);
  const double hy = w.obs(7, 1) - w.obs(0, 1);
  double theta = 0.0;
  if (std::hypot(hx, hy) >= 1e-9) {
    theta = std::atan2(hy, hx);
  }
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const int n = static_cast<int>(w.fut.rows());
  std::vector<double> lon(static_cast<std::size_t>(n));
  std::vector<double> lat(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    lon[static_cast<std::size_t>(i)] = c * w.fut(i, 0) + s * w.fut(i, 1);
    lat[static_cast<std::size_t>(i)] = -s * w.fut(i, 0) + c * w.fut(i, 1);
  }
  double v = 0.0;
  for (int i = 1; i < n; ++i) {
    v += (lat[static_cast<std::size_t>(i)] - lat[static_cast<std::size_t>(i - 1)]) / dt;
  }
  v /= (n - 1);
  double acc = 0.0;
  for (int i = 2; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    acc += (lon[u] - 2.0 * lon[u - 1] + lon[u - 2]) / (dt * dt);
  }
  acc /= (n - 2);
  IntentionLabel out;
  out.lateral = v > 0.2 ? Lateral::Lt : (v < -0.2 ? Lateral::Rt : Lateral::Kd);
  out.longitudinal =
    acc > 0.5 ? Longitudinal::Acc : (acc < -0.5 ? Longitudinal::Dec : Longitudinal::Nor);
  return out;
}

Outcome labeler_oracle()
{
  std::vector<TrajectoryWindow> windows;
  Rng pick(6);
  for (int batch = 0; batch < 10; ++batch) {
    SyntheticSpec sp;
    sp.count = 1000;
    sp.seed = 600 + static_cast<std::uint64_t>(batch);
    sp.speed = 0.4 + 1.6 * pick.uniform();
    sp.turn_rate = 0.02 + 0.25 * pick.uniform();
    sp.noise_std = 0.01 + 0.15 * pick.uniform();
    for (auto & w : generate_synthetic(sp)) {
      windows.push_back(denormalize(w));
    }
  }
  std::size_t agree = 0;
  std::size_t invariant = 0;
  std::size_t classes[9] = {};
  Rng rng(66);
  for (const auto & w : windows) {
    const auto lab = label_window(w).label;
    agree += lab == reference_label(w, kFrameStep) ? 1 : 0;
    classes[static_cast<int>(lab.lateral) * 3 + static_cast<int>(lab.longitudinal)]++;

    const double phi = 2.0 * 3.14159265358979323846 * rng.uniform();
    Eigen::Matrix2d r;
    r << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    TrajectoryWindow rw = w;
    rw.obs = w.obs * r.transpose();
    rw.fut = w.fut * r.transpose();
    invariant += label_window(rw).label == lab ? 1 : 0;
  }
  const std::size_t n = windows.size();
  std::size_t populated = 0;
  for (auto c : classes) {
    populated += c > 0 ? 1 : 0;
  }
  return {agree == n && invariant == n,
          fmt("%.0f/%.0f match reference, %.0f/%.0f rotation-invariant", agree, n, invariant, n) +
            fmt(", %.0f of 9 label classes present", populated)};
}

double naive_ade(const Trajectory & p, const Trajectory & t)
{
  double sum = 0.0;
  for (int i = 0; i < p.rows(); ++i) {
    sum += std::sqrt((p(i, 0) - t(i, 0)) * (p(i, 0) - t(i, 0)) +
                     (p(i, 1) - t(i, 1)) * (p(i, 1) - t(i, 1)));
  }
  return sum / p.rows();
}

double naive_fde(const Trajectory & p, const Trajectory & t)
{
  const int l = static_cast<int>(p.rows()) - 1;
  return std::sqrt((p(l, 0) - t(l, 0)) * (p(l, 0) - t(l, 0)) +
                   (p(l, 1) - t(l, 1)) * (p(l, 1) - t(l, 1)));
}

Outcome metric_oracle()
{
  Rng rng(7);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto truth = gaussian(rng);
    std::vector<Trajectory> samples;
    double ba = 1e300;
    double bf = 1e300;
    const int n = 1 + static_cast<int>(rng.uniform_int(20));
    for (int s = 0; s < n; ++s) {
      samples.push_back(truth + 0.5 * gaussian(rng));
      ba = std::min(ba, naive_ade(samples.back(), truth));
      bf = std::min(bf, naive_fde(samples.back(), truth));
    }
    const auto m = best_of_n(samples, truth);
    worst = std::max({worst, std::abs(ade(samples[0], truth) - naive_ade(samples[0], truth)),
                      std::abs(fde(samples[0], truth) - naive_fde(samples[0], truth)),
                      std::abs(m.ade - ba), std::abs(m.fde - bf)});
  }
  const Trajectory truth = Trajectory::Zero(12, 2);
  const Trajectory off = truth.rowwise() + Eigen::RowVector2d(0.3, 0.4);
  const double a345 = ade(off, truth);
  return {worst <= 1e-12 && a345 == 0.5,
          fmt("worst deviation %.2e over 1000 cases, 3-4-5 ADE = %.17g", worst, a345)};
}

Outcome learning_demo()
{
  ModelConfig mc;
  mc.steps = 100;
  mc.d_enc = 32;
  mc.enc_layers = 1;
  mc.enc_heads = 4;
  mc.d_int = 32;
  mc.int_layers = 1;
  mc.int_heads = 4;
  mc.d_noise = 64;
  mc.noise_layers = 2;
  mc.noise_heads = 4;
  mc.ff_mult = 2;
  mc.traj_scale = 2.0;
  const auto sched = build_linear_schedule();

  SyntheticSpec train_spec;
  train_spec.count = 2000;
  train_spec.noise_std = 0.05;
  train_spec.seed = 1;
  SyntheticSpec held_spec = train_spec;
  held_spec.count = 500;
  held_spec.seed = 2;
  const auto train = make_training_set(generate_synthetic(train_spec));
  const auto held = generate_synthetic(held_spec);

  TrainConfig tc;
  tc.epochs = 100;
  tc.batch_size = 64;
  tc.seed = 3;
  const auto state = train_loop(train, tc, sched, init_train_state(mc, 4));

  SamplerConfig sc;
  sc.n_samples = 20;
  sc.seed = 5;
  const GuidanceConfig g;
  std::vector<Metrics> model_m;
  std::vector<Metrics> cv_m;
  std::size_t lt_total = 0;
  std::size_t lt_hit = 0;
  for (std::size_t i = 0; i < held.size(); ++i) {
    const auto & w = held[i];
    const auto world = denormalize(w);
    const auto intent = estimate_intention(state.params, encode_history(state.params, w.obs));
    model_m.push_back(best_of_n(sample(state.params, w, intent, g, sc, sched, i), world.fut));
    const std::vector<Trajectory> cv = {constant_velocity_baseline(world.obs)};
    cv_m.push_back(best_of_n(cv, world.fut));

    const auto truth_label = label_window(w).label;
    if (truth_label.lateral == Lateral::Lt) {
      const auto ps = sample(state.params, w, encode(truth_label), g, sc, sched, 100000 + i);
      for (const auto & s : ps.samples) {
        TrajectoryWindow sw = world;
        sw.fut = s;
        ++lt_total;
        lt_hit += label_window(sw).label.lateral == Lateral::Lt ? 1 : 0;
      }
    }
  }
  const auto model = aggregate(model_m);
  const auto cv = aggregate(cv_m);
  const double frac = lt_total ? static_cast<double>(lt_hit) / static_cast<double>(lt_total) : 0.0;
  return {model.ade < cv.ade && frac >= 0.70,
          fmt("best-of-20 ADE %.4f vs constant-velocity %.4f; Lt-conditioned samples labeled Lt "
              "%.1f%% of %.0f",
              model.ade, cv.ade, 100.0 * frac, static_cast<double>(lt_total))};
}

Outcome determinism()
{
  const auto dir = fs::temp_directory_path() / "intdiff_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto mc = tiny_model(20);
  const auto sched = build_linear_schedule(20);
  SyntheticSpec sp;
  sp.count = 48;
  sp.noise_std = 0.05;
  sp.seed = 9;
  const auto windows = generate_synthetic(sp);
  const auto ts = make_training_set(windows);
  TrainConfig tc;
  tc.epochs = 3;
  tc.batch_size = 16;
  tc.seed = 9;
  SamplerConfig scfg;
  scfg.steps = 20;
  scfg.stride = 5;
  scfg.n_samples = 8;
  scfg.seed = 9;
  scfg.record_intermediate = true;

  std::string preds[2];
  std::string metrics[2];
  for (int run = 0; run < 2; ++run) {
    const std::string tag = std::to_string(run);
    TrainLoopOptions opt;
    opt.metrics_path = (dir / ("loss" + tag + ".csv")).string();
    opt.checkpoint_path = (dir / ("model" + tag + ".ckpt")).string();
    train_loop(ts, tc, sched, init_train_state(mc, 9), opt);
    const auto params = load_checkpoint(opt.checkpoint_path).params;
    std::vector<PredictionRecord> recs;
    std::vector<Metrics> per;
    for (std::size_t i = 0; i < windows.size(); ++i) {
      const auto intent = estimate_intention(params, encode_history(params, windows[i].obs));
      recs.push_back({i, 20, 5, sample(params, windows[i], intent, GuidanceConfig{}, scfg, sched, i)});
      per.push_back(best_of_n(recs.back().set, denormalize(windows[i]).fut));
    }
    std::ostringstream p;
    write_predictions_jsonl(p, recs);
    preds[run] = p.str();
    metrics[run] = metrics_to_json(aggregate(per), config_digest("acceptance")).dump();
  }
  const bool ckpt_same = slurp(dir / "model0.ckpt") == slurp(dir / "model1.ckpt");
  const bool loss_same = slurp(dir / "loss0.csv") == slurp(dir / "loss1.csv");
  const bool pred_same = preds[0] == preds[1];
  const bool metric_same = metrics[0] == metrics[1];

  const auto params = load_checkpoint((dir / "model0.ckpt").string()).params;
  bool parallel_same = true;
  for (std::size_t i = 0; i < 8; ++i) {
    auto serial_cfg = scfg;
    auto par_cfg = scfg;
    par_cfg.threads = 4;
    const auto a = sample(params, windows[i], {1.0, 0.0}, GuidanceConfig{}, serial_cfg, sched, i);
    const auto b = sample(params, windows[i], {1.0, 0.0}, GuidanceConfig{}, par_cfg, sched, i);
    for (std::size_t s = 0; s < a.samples.size(); ++s) {
      parallel_same = parallel_same && same_bits(a.samples[s], b.samples[s]);
      for (std::size_t j = 0; j < a.intermediates.size(); ++j) {
        parallel_same = parallel_same && same_bits(a.intermediates[j][s], b.intermediates[j][s]);
      }
    }
  }
  fs::remove_all(dir);
  const bool pass = ckpt_same && loss_same && pred_same && metric_same && parallel_same;
  return {pass, std::string("checkpoints ") + (ckpt_same ? "same" : "DIFFER") + ", losses " +
                  (loss_same ? "same" : "DIFFER") + ", predictions " +
                  (pred_same ? "same" : "DIFFER") + ", metrics " +
                  (metric_same ? "same" : "DIFFER") + ", parallel sampler " +
                  (parallel_same ? "matches serial" : "DIFFERS")};
}

class CountingPredictor : public NoisePredictor
{
public:
  explicit CountingPredictor(const NoisePredictor & inner) : inner_(inner) {}
  Trajectory predict(const Trajectory & y_k, bool null_condition, int k) const override
  {
    ++(null_condition ? uncond : cond);
    return inner_.predict(y_k, null_condition, k);
  }
  mutable std::size_t cond = 0;
  mutable std::size_t uncond = 0;

private:
  const NoisePredictor & inner_;
};

Outcome cost_accounting()
{
  const auto sched = build_linear_schedule();
  const auto params = DenoiserParams::initialize(tiny_model(100), 10);
  Rng rng(10);
  const auto f = encode_history(params, gaussian(rng, kObsLen));
  const DenoiserPredictor inner(params, f, {1.0, 0.0});
  const CountingPredictor counting(inner);
  const auto ladder = step_ladder(100, 20);
  const auto chain = run_chain(counting, gaussian(rng), ladder, GuidanceConfig{}, sched, false);

  SyntheticSpec sp;
  sp.count = 1;
  SamplerConfig sc;
  sc.n_samples = 7;
  const auto ps =
    sample(params, generate_synthetic(sp)[0], {1.0, 0.0}, GuidanceConfig{}, sc, sched);
  const bool pass = chain.ladder_steps == 5 && counting.cond == 5 && counting.uncond == 5 &&
                    ps.ladder.size() == 5 && ps.conditional_evals + ps.unconditional_evals == 70;
  return {pass, fmt("ladder steps %.0f, evaluations per path %.0f cond + %.0f uncond",
                    static_cast<double>(chain.ladder_steps), static_cast<double>(counting.cond),
                    static_cast<double>(counting.uncond)) +
                  fmt("; %.0f samples -> %.0f evaluations", 7.0,
                      static_cast<double>(ps.conditional_evals + ps.unconditional_evals))};
}

}  // namespace

int main()
{
  const std::vector<Criterion> criteria = {
    {1, "schedule identities", 1.0, schedule_identities},
    {2, "forward vs sequential agreement", 30.0, forward_agreement},
    {3, "oracle DDIM convergence", 5.0, oracle_convergence},
    {4, "gradient correctness", 120.0, gradient_check},
    {5, "guidance endpoints", 1.0, guidance_endpoints},
    {6, "labeler oracle equivalence", 10.0, labeler_oracle},
    {7, "metric oracle equivalence", 5.0, metric_oracle},
    {8, "desk-scale learning demonstration", 1200.0, learning_demo},
    {9, "determinism", 60.0, determinism},
    {10, "sampler cost accounting", 5.0, cost_accounting},
  };
  int failures = 0;
  for (const auto & c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception & e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = secs <= c.budget_s;
    const bool pass = o.pass && in_budget;
    failures += pass ? 0 : 1;
    std::printf("AC%-2d %s  %-36s %8.2f s (budget %g s)%s  %s\n", c.id, pass ? "PASS" : "FAIL",
                c.name, secs, c.budget_s, in_budget ? "" : " OVER BUDGET", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
