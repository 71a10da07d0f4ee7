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

// Command-line front end: data ingestion, labeling, training, sampling,
// evaluation and density export.

#include "intdiff/config.hpp"
#include "intdiff/errors.hpp"
#include "intdiff/harness.hpp"
#include "intdiff/intention.hpp"
#include "intdiff/sampler.hpp"
#include "intdiff/schedule.hpp"
#include "intdiff/training.hpp"
#include "intdiff/trajdata.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace
{

using namespace intdiff;

struct Common
{
  std::string config_path;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App * cmd, Common & c)
{
  cmd->add_option("--config", c.config_path, "Run configuration (flat JSON object)");
  cmd->add_option("--seed", c.seed, "Override the configured seed");
}

RunConfig resolve(const Common & c)
{
  nlohmann::json j = nlohmann::json::object();
  if (!c.config_path.empty()) {
    j = to_json(load_run_config(c.config_path));
  }
  if (c.seed) {
    j["seed"] = *c.seed;
  }
  return run_config_from_json(j);
}

std::ofstream open_out(const std::string & path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  return out;
}

void finish(std::ofstream & out, const std::string & path)
{
  out.flush();
  if (!out) {
    throw IoError("failed writing '" + path + "'");
  }
}

void write_windows(const std::string & path, const std::vector<TrajectoryWindow> & windows)
{
  auto out = open_out(path);
  write_windows_jsonl(out, windows);
  finish(out, path);
}

int report_error(const std::string & kind, const std::string & message)
{
  std::cerr << nlohmann::json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
  return 1;
}

// ---------------------------------------------------------------------------

struct IngestArgs
{
  Common common;
  std::vector<std::string> inputs;
  std::string output;
  int stride = 1;
  bool normalize = false;
};

void run_ingest(const IngestArgs & a)
{
  (void)resolve(a.common);
  std::vector<TrajectoryWindow> windows;
  std::size_t records = 0;
  for (const auto & path : a.inputs) {
    std::ifstream in(path);
    if (!in) {
      throw IoError("cannot open '" + path + "' for reading");
    }
    const auto scene = parse_scene_file(in);
    records += scene.record_count();
    for (auto & w : build_windows(scene, kObsLen, kFutLen, a.stride)) {
      windows.push_back(a.normalize ? normalize(w) : std::move(w));
    }
  }
  write_windows(a.output, windows);
  std::cout << nlohmann::json{{"records", records}, {"windows", windows.size()}}.dump() << '\n';
}

struct SynthArgs
{
  Common common;
  std::string output;
  std::size_t count = 100;
  double speed = 1.0;
  double turn_rate = 0.15;
  double noise_std = 0.0;
  std::vector<double> mix = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
};

void run_synth(const SynthArgs & a)
{
  const auto cfg = resolve(a.common);
  SyntheticSpec spec;
  spec.count = a.count;
  spec.speed = a.speed;
  spec.turn_rate = a.turn_rate;
  spec.noise_std = a.noise_std;
  spec.turn_probabilities = {a.mix.at(0), a.mix.at(1), a.mix.at(2)};
  spec.seed = cfg.seed;
  spec.dt = cfg.dt;
  const auto windows = generate_synthetic(spec);
  write_windows(a.output, windows);
  std::cout << nlohmann::json{{"windows", windows.size()}}.dump() << '\n';
}

struct LabelArgs
{
  Common common;
  std::string input;
  std::string output;
};

void run_label(const LabelArgs & a)
{
  const auto cfg = resolve(a.common);
  const auto windows = read_windows_jsonl_file(a.input);
  auto out = open_out(a.output);
  std::map<std::string, std::size_t> counts;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto lab = label_window(windows[i], cfg.thresholds, cfg.dt);
    const auto code = encode(lab.label);
    const std::string lat(to_string(lab.label.lateral));
    const std::string lon(to_string(lab.label.longitudinal));
    ++counts[lat];
    ++counts[lon];
    out << nlohmann::json{
             {"window", i},
             {"ped_id", windows[i].ped_id},
             {"lateral", lat},
             {"longitudinal", lon},
             {"code", {code.lateral, code.longitudinal}},
             {"v_la", lab.derivatives.v_la},
             {"a_lo", lab.derivatives.a_lo},
             {"degenerate_heading", lab.derivatives.degenerate_heading},
           }
             .dump()
        << '\n';
  }
  finish(out, a.output);
  std::cout << nlohmann::json{{"windows", windows.size()}, {"counts", counts}}.dump() << '\n';
}

struct TrainArgs
{
  Common common;
  std::string input;
  std::string output;
  std::string metrics;
  std::string resume;
  std::optional<int> epochs;
  std::optional<int> threads;
  bool quiet = false;
};

void run_train(const TrainArgs & a)
{
  auto cfg = resolve(a.common);
  if (a.epochs) {
    cfg.train.epochs = *a.epochs;
  }
  if (a.threads) {
    cfg.train.threads = *a.threads;
  }
  validate(cfg.train);
  const auto dataset = make_training_set(read_windows_jsonl_file(a.input), cfg.thresholds, cfg.dt);
  const auto sched = cfg.schedule();

  TrainState state;
  if (a.resume.empty()) {
    state = init_train_state(cfg.model, cfg.seed);
  } else {
    state = train_state_from_checkpoint(load_checkpoint(a.resume));
    if (!(state.params.config() == cfg.model)) {
      throw ValidationError("checkpoint model does not match the configured model");
    }
  }

  TrainLoopOptions opt;
  opt.metrics_path = a.metrics;
  opt.checkpoint_path = a.output;
  if (!a.quiet) {
    opt.on_epoch = [](const LossReport & r) {
      std::fprintf(stderr, "epoch %4d  total %.6f  intent %.6f  diffusion %.6f\n", r.epoch,
                   r.total, r.intent_term, r.diffusion_term);
    };
  }
  const auto final_state = train_loop(dataset, cfg.train, sched, std::move(state), opt);
  std::cout << nlohmann::json{{"epochs_completed", final_state.epochs_completed},
                              {"parameters", final_state.params.parameter_count()},
                              {"checkpoint", a.output}}
                 .dump()
            << '\n';
}

struct PredictArgs
{
  Common common;
  std::string input;
  std::string checkpoint;
  std::string output;
  std::string intention = "estimated";
  std::optional<int> n_samples;
  std::optional<int> stride;
  std::optional<int> threads;
  bool record_intermediate = false;
};

void run_predict(const PredictArgs & a)
{
  auto cfg = resolve(a.common);
  const auto ckpt = load_checkpoint(a.checkpoint);
  const auto & params = ckpt.params;
  cfg.steps = params.config().steps;
  const auto sched = cfg.schedule();
  auto scfg = cfg.sampler();
  if (a.n_samples) {
    scfg.n_samples = *a.n_samples;
  }
  if (a.stride) {
    scfg.stride = *a.stride;
  }
  if (a.threads) {
    scfg.threads = *a.threads;
  }
  scfg.record_intermediate = a.record_intermediate;
  validate(scfg);

  const auto windows = read_windows_jsonl_file(a.input);
  auto out = open_out(a.output);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    IntentionVector intent;
    if (a.intention == "label") {
      intent = encode(label_window(windows[i], cfg.thresholds, cfg.dt).label);
    } else {
      const auto n = normalize(windows[i]);
      intent = estimate_intention(params, encode_history(params, n.obs));
    }
    const PredictionRecord rec{
      i, scfg.steps, scfg.stride, sample(params, windows[i], intent, cfg.guidance, scfg, sched, i)};
    out << to_json(rec).dump() << '\n';
  }
  finish(out, a.output);
  std::cout << nlohmann::json{{"windows", windows.size()}, {"n_samples", scfg.n_samples}}.dump()
            << '\n';
}

struct EvalArgs
{
  Common common;
  std::string input;
  std::string predictions;
  std::string output;
  bool baseline = false;
};

void run_eval(const EvalArgs & a)
{
  const auto cfg = resolve(a.common);
  const auto digest = config_digest(to_json(cfg).dump());
  const auto windows = read_windows_jsonl_file(a.input);

  std::vector<Metrics> per;
  std::string label;
  if (a.baseline) {
    label = "constant-velocity";
    for (const auto & w : windows) {
      const auto d = denormalize(w);
      const std::vector<Trajectory> one = {constant_velocity_baseline(d.obs)};
      per.push_back(best_of_n(one, d.fut));
    }
  } else {
    if (a.predictions.empty()) {
      throw ValidationError("eval needs --predictions unless --baseline is given");
    }
    label = "best-of-n";
    for (const auto & rec : read_predictions_jsonl_file(a.predictions)) {
      if (rec.window >= windows.size()) {
        throw ValidationError("prediction refers to window " + std::to_string(rec.window) +
                              " but the input has " + std::to_string(windows.size()));
      }
      per.push_back(best_of_n(rec.set, denormalize(windows[rec.window]).fut));
    }
  }
  const auto m = aggregate(per);
  print_metrics_table(std::cout, m, label);
  if (!a.output.empty()) {
    auto out = open_out(a.output);
    out << metrics_to_json(m, digest).dump(2) << '\n';
    finish(out, a.output);
  }
}

struct DensityArgs
{
  Common common;
  std::string predictions;
  std::string output;
};

void run_export_density(const DensityArgs & a)
{
  (void)resolve(a.common);
  auto out = open_out(a.output);
  std::size_t n = 0;
  for (const auto & rec : read_predictions_jsonl_file(a.predictions)) {
    const auto recs = density_records(rec.set, rec.window, rec.steps, rec.stride);
    write_density_jsonl(out, recs);
    n += recs.size();
  }
  finish(out, a.output);
  std::cout << nlohmann::json{{"records", n}}.dump() << '\n';
}

struct ScheduleArgs
{
  Common common;
  std::string output;
};

void run_schedule_dump(const ScheduleArgs & a)
{
  const auto sched = resolve(a.common).schedule();
  if (a.output.empty() || a.output == "-") {
    write_schedule_csv(std::cout, sched);
    return;
  }
  auto out = open_out(a.output);
  write_schedule_csv(out, sched);
  finish(out, a.output);
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Intention-conditioned diffusion for pedestrian trajectory prediction"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto * c_ingest = app.add_subcommand("ingest", "Parse scene files into windows (JSON Lines)");
  add_common(c_ingest, ingest.common);
  c_ingest->add_option("--input,-i", ingest.inputs, "Scene file(s): frame ped x y")->required();
  c_ingest->add_option("--output,-o", ingest.output, "Windows JSON Lines")->required();
  c_ingest->add_option("--stride", ingest.stride, "Window stride in frames");
  c_ingest->add_flag("--normalize", ingest.normalize, "Translate to the last observed point");

  SynthArgs synth;
  auto * c_synth = app.add_subcommand("synth", "Generate synthetic turning windows");
  add_common(c_synth, synth.common);
  c_synth->add_option("--output,-o", synth.output, "Windows JSON Lines")->required();
  c_synth->add_option("--count,-n", synth.count, "Number of windows");
  c_synth->add_option("--speed", synth.speed, "m/s");
  c_synth->add_option("--turn-rate", synth.turn_rate, "rad per future step");
  c_synth->add_option("--noise-std", synth.noise_std, "Position noise, m");
  c_synth->add_option("--mix", synth.mix, "Turn probabilities: left straight right")
    ->expected(3);

  LabelArgs label;
  auto * c_label = app.add_subcommand("label", "Label the future intention of each window");
  add_common(c_label, label.common);
  c_label->add_option("--input,-i", label.input, "Windows JSON Lines")->required();
  c_label->add_option("--output,-o", label.output, "Labels JSON Lines")->required();

  TrainArgs train;
  auto * c_train = app.add_subcommand("train", "Train the model");
  add_common(c_train, train.common);
  c_train->add_option("--input,-i", train.input, "Windows JSON Lines")->required();
  c_train->add_option("--output,-o", train.output, "Checkpoint path")->required();
  c_train->add_option("--metrics", train.metrics, "Per-epoch loss CSV");
  c_train->add_option("--resume", train.resume, "Continue from this checkpoint");
  c_train->add_option("--epochs", train.epochs, "Override the configured epoch count");
  c_train->add_option("--threads", train.threads, "Batch partitions");
  c_train->add_flag("--quiet,-q", train.quiet, "No per-epoch log");

  PredictArgs predict;
  auto * c_predict = app.add_subcommand("predict", "Sample futures for each window");
  add_common(c_predict, predict.common);
  c_predict->add_option("--input,-i", predict.input, "Windows JSON Lines")->required();
  c_predict->add_option("--checkpoint,-c", predict.checkpoint, "Trained checkpoint")->required();
  c_predict->add_option("--output,-o", predict.output, "Predictions JSON Lines")->required();
  c_predict->add_option("--intention", predict.intention, "estimated | label")
    ->check(CLI::IsMember({"estimated", "label"}));
  c_predict->add_option("--n-samples", predict.n_samples, "Samples per window");
  c_predict->add_option("--stride", predict.stride, "DDIM stride");
  c_predict->add_option("--threads", predict.threads, "Sampling threads");
  c_predict->add_flag(
    "--record-intermediate", predict.record_intermediate, "Keep states for density export");

  EvalArgs eval;
  auto * c_eval = app.add_subcommand("eval", "Best-of-N ADE/FDE");
  add_common(c_eval, eval.common);
  c_eval->add_option("--input,-i", eval.input, "Windows JSON Lines (ground truth)")->required();
  c_eval->add_option("--predictions,-p", eval.predictions, "Predictions JSON Lines");
  c_eval->add_option("--output,-o", eval.output, "Metrics JSON");
  c_eval->add_flag("--baseline", eval.baseline, "Score the constant-velocity baseline instead");

  DensityArgs density;
  auto * c_density =
    app.add_subcommand("export-density", "Per-step sample positions for density plots");
  add_common(c_density, density.common);
  c_density->add_option("--predictions,-p", density.predictions, "Predictions JSON Lines")
    ->required();
  c_density->add_option("--output,-o", density.output, "Density JSON Lines")->required();

  ScheduleArgs schedule;
  auto * c_schedule = app.add_subcommand("schedule-dump", "Write the noise schedule as CSV");
  add_common(c_schedule, schedule.common);
  c_schedule->add_option("--output,-o", schedule.output, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp & e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp & e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion & e) {
    return app.exit(e);
  } catch (const CLI::ParseError & e) {
    report_error("usage_error", e.what());
    return 2;
  }

  try {
    if (c_ingest->parsed()) {
      run_ingest(ingest);
    } else if (c_synth->parsed()) {
      run_synth(synth);
    } else if (c_label->parsed()) {
      run_label(label);
    } else if (c_train->parsed()) {
      run_train(train);
    } else if (c_predict->parsed()) {
      run_predict(predict);
    } else if (c_eval->parsed()) {
      run_eval(eval);
    } else if (c_density->parsed()) {
      run_export_density(density);
    } else if (c_schedule->parsed()) {
      run_schedule_dump(schedule);
    }
  } catch (const Error & e) {
    return report_error(e.kind(), e.what());
  } catch (const std::exception & e) {
    return report_error("internal_error", e.what());
  }
  return 0;
}
