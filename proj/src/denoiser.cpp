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

#include "intdiff/denoiser.hpp"

#include "intdiff/autodiff.hpp"
#include "intdiff/errors.hpp"
#include "intdiff/rng.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <thread>

namespace intdiff
{

using autodiff::Tape;
using autodiff::Var;

namespace
{

class LayoutBuilder
{
public:
  int add(const std::string & name, int rows, int cols)
  {
    names.push_back(name);
    shapes.emplace_back(rows, cols);
    return static_cast<int>(names.size()) - 1;
  }

  LinearIdx linear(const std::string & name, int in, int out)
  {
    return {add(name + ".w", in, out), add(name + ".b", 1, out)};
  }

  NormIdx norm(const std::string & name, int d)
  {
    return {add(name + ".gain", 1, d), add(name + ".bias", 1, d)};
  }

  BlockIdx block(const std::string & name, int d, int ff)
  {
    BlockIdx b;
    b.ln1 = norm(name + ".ln1", d);
    b.qkv = linear(name + ".qkv", d, 3 * d);
    b.proj = linear(name + ".proj", d, d);
    b.ln2 = norm(name + ".ln2", d);
    b.ff1 = linear(name + ".ff1", d, ff);
    b.ff2 = linear(name + ".ff2", ff, d);
    return b;
  }

  std::vector<std::string> names;
  std::vector<std::pair<int, int>> shapes;
};

constexpr int kHistoryFeatures = 4;  // position and velocity per step

ParamLayout build_layout(const ModelConfig & cfg, LayoutBuilder & lb)
{
  ParamLayout L;
  L.enc_in = lb.linear("enc.in", kHistoryFeatures, cfg.d_enc);
  for (int i = 0; i < cfg.enc_layers; ++i) {
    L.enc_blocks.push_back(lb.block("enc.block" + std::to_string(i), cfg.d_enc,
                                    cfg.ff_mult * cfg.d_enc));
  }
  L.enc_norm = lb.norm("enc.norm", cfg.d_enc);

  L.int_in = lb.linear("int.in", cfg.d_enc, cfg.d_int);
  for (int i = 0; i < cfg.int_layers; ++i) {
    L.int_blocks.push_back(lb.block("int.block" + std::to_string(i), cfg.d_int,
                                    cfg.ff_mult * cfg.d_int));
  }
  L.int_norm = lb.norm("int.norm", cfg.d_int);
  L.int_out = lb.linear("int.out", cfg.d_int, 2);

  L.hist_token = lb.linear("noise.hist_token", cfg.d_enc, cfg.d_noise);
  L.intent_token = lb.linear("noise.intent_token", 2, cfg.d_noise);
  L.null_embedding = lb.add("noise.null_embedding", 1, cfg.d_noise);
  L.step_mlp1 = lb.linear("noise.step_mlp1", cfg.d_noise, cfg.d_noise);
  L.step_mlp2 = lb.linear("noise.step_mlp2", cfg.d_noise, cfg.d_noise);
  L.fut_in = lb.linear("noise.fut_in", 2, cfg.d_noise);
  for (int i = 0; i < cfg.noise_layers; ++i) {
    L.noise_blocks.push_back(lb.block("noise.block" + std::to_string(i), cfg.d_noise,
                                      cfg.ff_mult * cfg.d_noise));
  }
  L.noise_norm = lb.norm("noise.norm", cfg.d_noise);
  L.noise_out = lb.linear("noise.out", cfg.d_noise, 2);
  return L;
}

/// sin/cos features of a scalar position, d entries.
Mat sinusoid(double pos, int d)
{
  Mat out(1, d);
  for (int i = 0; i < d; ++i) {
    const int pair = i / 2;
    const double freq = std::pow(10000.0, -2.0 * pair / static_cast<double>(d));
    out(0, i) = (i % 2 == 0) ? std::sin(pos * freq) : std::cos(pos * freq);
  }
  return out;
}

Mat positional_encoding(int rows, int d)
{
  Mat pe(rows, d);
  for (int t = 0; t < rows; ++t) {
    pe.row(t) = sinusoid(static_cast<double>(t), d);
  }
  return pe;
}

/// Lazily binds parameter tensors to tape leaves.
class Binder
{
public:
  Binder(Tape & tape, const DenoiserParams & params, DenoiserParams * grads)
  : tape_(tape), params_(params), grads_(grads), vars_(params.tensor_count(), Var{})
  {
  }

  Var operator()(int idx)
  {
    auto & v = vars_[static_cast<std::size_t>(idx)];
    if (v.id < 0) {
      Mat * g = grads_ != nullptr ? &grads_->tensor(static_cast<std::size_t>(idx)) : nullptr;
      v = tape_.parameter(params_.tensor(static_cast<std::size_t>(idx)), g);
    }
    return v;
  }

  Tape & tape() { return tape_; }
  const ModelConfig & cfg() const { return params_.config(); }
  const ParamLayout & layout() const { return params_.layout(); }

private:
  Tape & tape_;
  const DenoiserParams & params_;
  DenoiserParams * grads_;
  std::vector<Var> vars_;
};

Var linear(Binder & B, Var x, LinearIdx l)
{
  auto & t = B.tape();
  return t.add_row(t.matmul(x, B(l.w)), B(l.b));
}

Var self_attention(Binder & B, Var x, const BlockIdx & blk, int heads)
{
  auto & t = B.tape();
  const int d = static_cast<int>(t.value(x).cols());
  const int dh = d / heads;
  const Var qkv = linear(B, x, blk.qkv);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Var> outs;
  outs.reserve(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    const Var q = t.slice_cols(qkv, h * dh, dh);
    const Var k = t.slice_cols(qkv, d + h * dh, dh);
    const Var v = t.slice_cols(qkv, 2 * d + h * dh, dh);
    const Var att = t.softmax_rows(t.scale(t.matmul_nt(q, k), inv_sqrt));
    outs.push_back(t.matmul(att, v));
  }
  const Var merged = heads == 1 ? outs[0] : t.concat_cols(outs);
  return linear(B, merged, blk.proj);
}

Var transformer_block(Binder & B, Var x, const BlockIdx & blk, int heads)
{
  auto & t = B.tape();
  const Var h1 = t.layer_norm(x, B(blk.ln1.gain), B(blk.ln1.bias));
  x = t.add(x, self_attention(B, h1, blk, heads));
  const Var h2 = t.layer_norm(x, B(blk.ln2.gain), B(blk.ln2.bias));
  const Var ff = linear(B, t.gelu(linear(B, h2, blk.ff1)), blk.ff2);
  return t.add(x, ff);
}

Var encoder_forward(Binder & B, const Trajectory & obs)
{
  const auto & cfg = B.cfg();
  const auto & L = B.layout();
  auto & t = B.tape();
  const Eigen::Index n = obs.rows();
  Mat feat(n, kHistoryFeatures);
  for (Eigen::Index i = 0; i < n; ++i) {
    feat(i, 0) = obs(i, 0) / cfg.traj_scale;
    feat(i, 1) = obs(i, 1) / cfg.traj_scale;
    feat(i, 2) = i == 0 ? 0.0 : (obs(i, 0) - obs(i - 1, 0)) / cfg.traj_scale;
    feat(i, 3) = i == 0 ? 0.0 : (obs(i, 1) - obs(i - 1, 1)) / cfg.traj_scale;
  }
  Var x = linear(B, t.constant(std::move(feat)), L.enc_in);
  x = t.add(x, t.constant(positional_encoding(static_cast<int>(n), cfg.d_enc)));
  for (const auto & blk : L.enc_blocks) {
    x = transformer_block(B, x, blk, cfg.enc_heads);
  }
  return t.layer_norm(x, B(L.enc_norm.gain), B(L.enc_norm.bias));
}

Var intention_forward(Binder & B, Var f_obs)
{
  const auto & cfg = B.cfg();
  const auto & L = B.layout();
  auto & t = B.tape();
  const int n = static_cast<int>(t.value(f_obs).rows());
  Var x = linear(B, f_obs, L.int_in);
  x = t.add(x, t.constant(positional_encoding(n, cfg.d_int)));
  for (const auto & blk : L.int_blocks) {
    x = transformer_block(B, x, blk, cfg.int_heads);
  }
  const Var pooled = t.mean_rows(x);
  return linear(B, t.layer_norm(pooled, B(L.int_norm.gain), B(L.int_norm.bias)), L.int_out);
}

Mat intention_row(const IntentionVector & v)
{
  Mat m(1, 2);
  m << v.lateral, v.longitudinal;
  return m;
}

Var noise_forward(
  Binder & B, const Trajectory & y_k, Var f_obs, const IntentionVector & intention,
  bool is_null, int k)
{
  const auto & cfg = B.cfg();
  const auto & L = B.layout();
  auto & t = B.tape();

  const Var step_in = t.constant(sinusoid(static_cast<double>(k), cfg.d_noise));
  const Var step_tok = linear(B, t.gelu(linear(B, step_in, L.step_mlp1)), L.step_mlp2);

  std::vector<Var> tokens;
  if (is_null) {
    tokens.push_back(B(L.null_embedding));
  } else {
    tokens.push_back(linear(B, t.mean_rows(f_obs), L.hist_token));
    tokens.push_back(linear(B, t.constant(intention_row(intention)), L.intent_token));
  }
  tokens.push_back(step_tok);
  const int prefix = static_cast<int>(tokens.size());

  const int n = static_cast<int>(y_k.rows());
  Var fut = linear(B, t.constant(y_k), L.fut_in);
  fut = t.add(fut, t.constant(positional_encoding(n, cfg.d_noise)));
  tokens.push_back(fut);

  Var x = t.concat_rows(tokens);
  for (const auto & blk : L.noise_blocks) {
    x = transformer_block(B, x, blk, cfg.noise_heads);
  }
  x = t.slice_rows(x, prefix, n);
  return linear(B, t.layer_norm(x, B(L.noise_norm.gain), B(L.noise_norm.bias)), L.noise_out);
}

void check_finite(const Mat & m, const char * what)
{
  if (!m.allFinite()) {
    throw ValidationError(std::string(what) + " contains non-finite values");
  }
}

void check_trajectory(const Trajectory & t, int rows, const char * what)
{
  if (t.rows() != rows || t.cols() != 2) {
    throw ValidationError(
      std::string(what) + " must be " + std::to_string(rows) + "x2, got " +
      std::to_string(t.rows()) + "x" + std::to_string(t.cols()));
  }
  check_finite(t, what);
}

/// Accumulates loss terms and gradients of batch[begin, end) into `grads`.
void accumulate_range(
  const DenoiserParams & params, std::span<const TrainingExample> batch, std::size_t begin,
  std::size_t end, const NoiseSchedule & sched, const LossConfig & cfg, DenoiserParams & grads,
  double & intent_sum, double & diffusion_sum, EvalCounters & counters)
{
  const double n = static_cast<double>(batch.size());
  const double scale = params.config().traj_scale;
  for (std::size_t i = begin; i < end; ++i) {
    const auto & ex = batch[i];
    Tape tape(true);
    Binder B(tape, params, &grads);
    const Var f_obs = encoder_forward(B, ex.obs);
    const Var intent = intention_forward(B, f_obs);
    const Var l_int = tape.mse(intent, intention_row(ex.target));

    const Trajectory y0 = ex.fut / scale;
    const Trajectory y_k = forward_sample(y0, ex.k, ex.eps, sched);
    const Var eps_hat = noise_forward(B, y_k, f_obs, ex.target, ex.use_null, ex.k);
    const Var l_noise = tape.mse(eps_hat, ex.eps);
    if (ex.use_null) {
      ++counters.unconditional;
    } else {
      ++counters.conditional;
    }

    const Var total =
      tape.add(tape.scale(l_int, cfg.loss_alpha / n), tape.scale(l_noise, cfg.loss_beta / n));
    tape.backward(total);
    intent_sum += tape.value(l_int)(0, 0);
    diffusion_sum += tape.value(l_noise)(0, 0);
  }
}

}  // namespace

void validate(const ModelConfig & cfg)
{
  const auto positive = [](int v) { return v >= 1; };
  if (!positive(cfg.steps)) {
    throw ValidationError("model steps must be >= 1");
  }
  if (!positive(cfg.d_enc) || !positive(cfg.d_int) || !positive(cfg.d_noise) ||
      !positive(cfg.ff_mult)) {
    throw ValidationError("model widths must be >= 1");
  }
  if (cfg.enc_layers < 0 || cfg.int_layers < 0 || cfg.noise_layers < 0) {
    throw ValidationError("layer counts must be >= 0");
  }
  if (!positive(cfg.enc_heads) || !positive(cfg.int_heads) || !positive(cfg.noise_heads)) {
    throw ValidationError("head counts must be >= 1");
  }
  if (cfg.d_enc % cfg.enc_heads != 0 || cfg.d_int % cfg.int_heads != 0 ||
      cfg.d_noise % cfg.noise_heads != 0) {
    throw ValidationError("width must be divisible by head count");
  }
  if (!(cfg.traj_scale > 0.0) || !std::isfinite(cfg.traj_scale)) {
    throw ValidationError("traj_scale must be positive");
  }
}

nlohmann::json to_json(const ModelConfig & cfg)
{
  return {
    {"steps", cfg.steps},           {"d_enc", cfg.d_enc},
    {"enc_layers", cfg.enc_layers}, {"enc_heads", cfg.enc_heads},
    {"d_int", cfg.d_int},           {"int_layers", cfg.int_layers},
    {"int_heads", cfg.int_heads},   {"d_noise", cfg.d_noise},
    {"noise_layers", cfg.noise_layers}, {"noise_heads", cfg.noise_heads},
    {"ff_mult", cfg.ff_mult},       {"traj_scale", cfg.traj_scale},
  };
}

ModelConfig model_config_from_json(const nlohmann::json & j)
{
  ModelConfig cfg;
  cfg.steps = j.value("steps", cfg.steps);
  cfg.d_enc = j.value("d_enc", cfg.d_enc);
  cfg.enc_layers = j.value("enc_layers", cfg.enc_layers);
  cfg.enc_heads = j.value("enc_heads", cfg.enc_heads);
  cfg.d_int = j.value("d_int", cfg.d_int);
  cfg.int_layers = j.value("int_layers", cfg.int_layers);
  cfg.int_heads = j.value("int_heads", cfg.int_heads);
  cfg.d_noise = j.value("d_noise", cfg.d_noise);
  cfg.noise_layers = j.value("noise_layers", cfg.noise_layers);
  cfg.noise_heads = j.value("noise_heads", cfg.noise_heads);
  cfg.ff_mult = j.value("ff_mult", cfg.ff_mult);
  cfg.traj_scale = j.value("traj_scale", cfg.traj_scale);
  validate(cfg);
  return cfg;
}

DenoiserParams DenoiserParams::zeros(const ModelConfig & cfg)
{
  validate(cfg);
  LayoutBuilder lb;
  DenoiserParams p;
  p.config_ = cfg;
  p.layout_ = build_layout(cfg, lb);
  p.names_ = std::move(lb.names);
  p.tensors_.reserve(lb.shapes.size());
  for (const auto & [r, c] : lb.shapes) {
    p.tensors_.push_back(Mat::Zero(r, c));
  }
  return p;
}

DenoiserParams DenoiserParams::initialize(const ModelConfig & cfg, std::uint64_t seed)
{
  DenoiserParams p = zeros(cfg);
  Rng rng(derive_seed({seed, 0x1417ULL}));
  const auto fill_uniform = [&rng](Mat & m, double bound) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      m.data()[i] = bound * (2.0 * rng.uniform() - 1.0);
    }
  };
  for (std::size_t i = 0; i < p.tensors_.size(); ++i) {
    const std::string & name = p.names_[i];
    Mat & m = p.tensors_[i];
    const auto ends_with = [&name](std::string_view s) {
      return name.size() >= s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0;
    };
    if (ends_with(".gain")) {
      m.setOnes();
    } else if (ends_with(".bias")) {
      m.setZero();
    } else if (ends_with(".w")) {
      fill_uniform(m, 1.0 / std::sqrt(static_cast<double>(m.rows())));
    } else if (ends_with(".b")) {
      // Bias shares the fan-in bound of the weight registered just before it.
      const auto fan_in = static_cast<double>(p.tensors_[i - 1].rows());
      fill_uniform(m, 1.0 / std::sqrt(fan_in));
    } else {
      fill_uniform(m, 1.0);
    }
  }
  return p;
}

std::size_t DenoiserParams::index_of(const std::string & name) const
{
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) {
      return i;
    }
  }
  throw ValidationError("no parameter tensor named '" + name + "'");
}

std::size_t DenoiserParams::parameter_count() const
{
  std::size_t n = 0;
  for (const auto & t : tensors_) {
    n += static_cast<std::size_t>(t.size());
  }
  return n;
}

bool DenoiserParams::all_finite() const
{
  for (const auto & t : tensors_) {
    if (!t.allFinite()) {
      return false;
    }
  }
  return true;
}

double DenoiserParams::squared_norm() const
{
  double s = 0.0;
  for (const auto & t : tensors_) {
    s += t.squaredNorm();
  }
  return s;
}

bool DenoiserParams::bitwise_equal(const DenoiserParams & other) const
{
  if (!(config_ == other.config_) || tensors_.size() != other.tensors_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    const auto & a = tensors_[i];
    const auto & b = other.tensors_[i];
    if (a.rows() != b.rows() || a.cols() != b.cols() ||
        std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) !=
          0) {
      return false;
    }
  }
  return true;
}

std::size_t parameter_count(const ModelConfig & cfg)
{
  validate(cfg);
  LayoutBuilder lb;
  build_layout(cfg, lb);
  std::size_t n = 0;
  for (const auto & [r, c] : lb.shapes) {
    n += static_cast<std::size_t>(r) * static_cast<std::size_t>(c);
  }
  return n;
}

Mat encode_history(const DenoiserParams & params, const Trajectory & obs)
{
  check_trajectory(obs, kObsLen, "observed history");
  Tape tape(false);
  Binder B(tape, params, nullptr);
  return tape.value(encoder_forward(B, obs));
}

IntentionVector estimate_intention(const DenoiserParams & params, const Mat & history_features)
{
  if (history_features.cols() != params.config().d_enc || history_features.rows() < 1) {
    throw ValidationError("history features must be n x d_enc");
  }
  check_finite(history_features, "history features");
  Tape tape(false);
  Binder B(tape, params, nullptr);
  const Var f = tape.constant(history_features);
  const Mat out = tape.value(intention_forward(B, f));
  check_finite(out, "estimated intention");
  return {out(0, 0), out(0, 1)};
}

Trajectory predict_noise(
  const DenoiserParams & params, const Trajectory & y_k, const Condition & cond, int k)
{
  if (k < 1 || k > params.config().steps) {
    throw ValidationError("predict_noise: step " + std::to_string(k) + " outside [1, K]");
  }
  check_trajectory(y_k, kFutLen, "y_k");
  Tape tape(false);
  Binder B(tape, params, nullptr);
  Var f_obs{};
  if (!cond.is_null) {
    if (cond.history_features.cols() != params.config().d_enc ||
        cond.history_features.rows() < 1) {
      throw ValidationError("condition history features must be n x d_enc");
    }
    check_finite(cond.history_features, "condition history features");
    if (!std::isfinite(cond.intention.lateral) || !std::isfinite(cond.intention.longitudinal)) {
      throw ValidationError("condition intention is non-finite");
    }
    f_obs = tape.constant(cond.history_features);
  }
  return tape.value(noise_forward(B, y_k, f_obs, cond.intention, cond.is_null, k));
}

LossResult loss_and_gradients(
  const DenoiserParams & params, std::span<const TrainingExample> batch,
  const NoiseSchedule & sched, const LossConfig & cfg)
{
  if (batch.empty()) {
    throw ValidationError("loss_and_gradients: empty batch");
  }
  if (sched.steps() != params.config().steps) {
    throw ValidationError("schedule step count does not match the model's K");
  }
  for (const auto & ex : batch) {
    check_trajectory(ex.obs, kObsLen, "example obs");
    check_trajectory(ex.fut, kFutLen, "example fut");
    check_trajectory(ex.eps, kFutLen, "example eps");
    if (ex.k < 1 || ex.k > sched.steps()) {
      throw ValidationError("example step outside [1, K]");
    }
  }

  const std::size_t n = batch.size();
  const std::size_t parts =
    std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, cfg.threads)));

  LossResult result;
  result.grads = params.zeros_like();
  double intent_sum = 0.0;
  double diffusion_sum = 0.0;

  if (parts == 1) {
    accumulate_range(
      params, batch, 0, n, sched, cfg, result.grads, intent_sum, diffusion_sum, result.counters);
  } else {
    struct Partial
    {
      DenoiserParams grads;
      double intent = 0.0;
      double diffusion = 0.0;
      EvalCounters counters;
    };
    std::vector<Partial> partials(parts);
    std::vector<std::thread> workers;
    workers.reserve(parts);
    for (std::size_t p = 0; p < parts; ++p) {
      partials[p].grads = params.zeros_like();
      const std::size_t begin = p * n / parts;
      const std::size_t end = (p + 1) * n / parts;
      workers.emplace_back([&, p, begin, end] {
        accumulate_range(
          params, batch, begin, end, sched, cfg, partials[p].grads, partials[p].intent,
          partials[p].diffusion, partials[p].counters);
      });
    }
    for (auto & w : workers) {
      w.join();
    }
    for (const auto & part : partials) {
      for (std::size_t i = 0; i < result.grads.tensor_count(); ++i) {
        result.grads.tensor(i) += part.grads.tensor(i);
      }
      intent_sum += part.intent;
      diffusion_sum += part.diffusion;
      result.counters.conditional += part.counters.conditional;
      result.counters.unconditional += part.counters.unconditional;
    }
  }

  result.intent_term = intent_sum / static_cast<double>(n);
  result.diffusion_term = diffusion_sum / static_cast<double>(n);
  result.loss = cfg.loss_alpha * result.intent_term + cfg.loss_beta * result.diffusion_term;
  return result;
}

namespace
{

constexpr char kMagic[8] = {'I', 'N', 'T', 'D', 'I', 'F', 'F', 'C'};

void write_u64(std::ostream & out, std::uint64_t v)
{
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) {
    buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffU);
  }
  out.write(reinterpret_cast<const char *>(buf), 8);
}

std::uint64_t read_u64(std::istream & in)
{
  unsigned char buf[8];
  in.read(reinterpret_cast<char *>(buf), 8);
  if (!in) {
    throw IoError("checkpoint truncated");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  }
  return v;
}

void write_tensors(std::ostream & out, const DenoiserParams & p)
{
  for (const auto & t : p.tensors()) {
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      write_u64(out, std::bit_cast<std::uint64_t>(t.data()[i]));
    }
  }
}

void read_tensors(std::istream & in, DenoiserParams & p)
{
  for (auto & t : p.tensors()) {
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      t.data()[i] = std::bit_cast<double>(read_u64(in));
    }
  }
}

}  // namespace

void write_checkpoint(std::ostream & out, const Checkpoint & ckpt)
{
  const auto & p = ckpt.params;
  nlohmann::json header;
  header["format"] = "intdiff-checkpoint";
  header["version"] = kCheckpointVersion;
  header["config"] = to_json(p.config());
  auto tensors = nlohmann::json::array();
  for (std::size_t i = 0; i < p.tensor_count(); ++i) {
    tensors.push_back({{"name", p.name(i)}, {"rows", p.tensor(i).rows()},
                       {"cols", p.tensor(i).cols()}});
  }
  header["tensors"] = std::move(tensors);
  auto sections = nlohmann::json::array({"params"});
  for (const auto & [name, aux] : ckpt.aux) {
    if (!(aux.config() == p.config())) {
      throw ValidationError("checkpoint section '" + name + "' has a different config");
    }
    sections.push_back(name);
  }
  header["sections"] = std::move(sections);
  header["meta"] = ckpt.meta;

  const std::string text = header.dump();
  out.write(kMagic, sizeof(kMagic));
  write_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  write_tensors(out, p);
  for (const auto & [name, aux] : ckpt.aux) {
    write_tensors(out, aux);
  }
  if (!out) {
    throw IoError("failed writing checkpoint");
  }
}

Checkpoint read_checkpoint(std::istream & in)
{
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError("not an intdiff checkpoint (bad magic)");
  }
  const std::uint64_t len = read_u64(in);
  if (len > (1ULL << 30)) {
    throw IoError("checkpoint header too large");
  }
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) {
    throw IoError("checkpoint truncated in header");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception & e) {
    throw IoError(std::string("checkpoint header is not valid JSON: ") + e.what());
  }
  if (!header.contains("version")) {
    throw IoError("checkpoint header has no version field");
  }
  if (header.at("version").get<int>() != kCheckpointVersion) {
    throw IoError("unsupported checkpoint version " + header.at("version").dump());
  }

  Checkpoint ckpt;
  ckpt.params = DenoiserParams::zeros(model_config_from_json(header.at("config")));
  const auto & tensors = header.at("tensors");
  if (tensors.size() != ckpt.params.tensor_count()) {
    throw IoError("checkpoint tensor list does not match its config");
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto & t = tensors[i];
    if (t.at("name").get<std::string>() != ckpt.params.name(i) ||
        t.at("rows").get<Eigen::Index>() != ckpt.params.tensor(i).rows() ||
        t.at("cols").get<Eigen::Index>() != ckpt.params.tensor(i).cols()) {
      throw IoError("checkpoint tensor '" + t.at("name").get<std::string>() +
                    "' does not match the layout of its config");
    }
  }
  read_tensors(in, ckpt.params);
  const auto & sections = header.at("sections");
  for (std::size_t s = 1; s < sections.size(); ++s) {
    auto aux = ckpt.params.zeros_like();
    read_tensors(in, aux);
    ckpt.aux.emplace(sections[s].get<std::string>(), std::move(aux));
  }
  ckpt.meta = header.value("meta", nlohmann::json::object());
  return ckpt;
}

void save_checkpoint(const std::string & path, const Checkpoint & ckpt)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path + "' for reading");
  }
  try {
    return read_checkpoint(in);
  } catch (const IoError & e) {
    throw IoError(path + ": " + e.what());
  }
}

}  // namespace intdiff
