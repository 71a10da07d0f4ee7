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

#include "intdiff/harness.hpp"

#include "intdiff/errors.hpp"
#include "intdiff/trajdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace intdiff
{

namespace
{

void check_pair(const Trajectory & pred, const Trajectory & truth)
{
  if (pred.rows() != truth.rows() || pred.cols() != 2 || truth.cols() != 2) {
    throw ValidationError("prediction and ground truth must have equal length and 2 columns");
  }
  if (pred.rows() == 0) {
    throw ValidationError("empty trajectory");
  }
}

double sorted_mean(std::vector<double> v)
{
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (const double x : v) {
    s += x;
  }
  return s / static_cast<double>(v.size());
}

}  // namespace

double ade(const Trajectory & pred, const Trajectory & truth)
{
  check_pair(pred, truth);
  return (pred - truth).rowwise().norm().mean();
}

double fde(const Trajectory & pred, const Trajectory & truth)
{
  check_pair(pred, truth);
  const auto last = pred.rows() - 1;
  return (pred.row(last) - truth.row(last)).norm();
}

Metrics best_of_n(std::span<const Trajectory> samples, const Trajectory & truth)
{
  if (samples.empty()) {
    throw ValidationError("best_of_n needs at least one sample");
  }
  Metrics m;
  m.ade = std::numeric_limits<double>::infinity();
  m.fde = std::numeric_limits<double>::infinity();
  for (const auto & s : samples) {
    m.ade = std::min(m.ade, ade(s, truth));
    m.fde = std::min(m.fde, fde(s, truth));
  }
  m.n_windows = 1;
  m.n_samples = samples.size();
  return m;
}

Metrics best_of_n(const PredictionSet & preds, const Trajectory & truth)
{
  return best_of_n(std::span<const Trajectory>(preds.samples), truth);
}

Metrics aggregate(std::span<const Metrics> per_window)
{
  if (per_window.empty()) {
    throw ValidationError("aggregate needs at least one window");
  }
  std::vector<double> ades;
  std::vector<double> fdes;
  Metrics out;
  out.n_samples = per_window[0].n_samples;
  for (const auto & m : per_window) {
    ades.push_back(m.ade);
    fdes.push_back(m.fde);
    out.n_windows += m.n_windows;
    if (m.n_samples != out.n_samples) {
      out.n_samples = std::max(out.n_samples, m.n_samples);
    }
  }
  out.ade = sorted_mean(std::move(ades));
  out.fde = sorted_mean(std::move(fdes));
  return out;
}

Trajectory constant_velocity_baseline(const Trajectory & obs, int horizon)
{
  if (obs.rows() < 2 || obs.cols() != 2) {
    throw ValidationError("constant-velocity baseline needs at least 2 observed points");
  }
  const auto n = obs.rows();
  const Eigen::RowVector2d last = obs.row(n - 1);
  const Eigen::RowVector2d vel = obs.row(n - 1) - obs.row(n - 2);
  Trajectory out(horizon, 2);
  for (int t = 0; t < horizon; ++t) {
    out.row(t) = last + static_cast<double>(t + 1) * vel;
  }
  return out;
}

std::vector<DensityRecord> density_records(
  const PredictionSet & preds, std::uint64_t window, int steps, int stride)
{
  if (preds.intermediates.empty()) {
    throw ValidationError("density export needs intermediate states (record_intermediate)");
  }
  if (preds.intermediates.size() != preds.ladder.size()) {
    throw ValidationError("intermediate count does not match the ladder");
  }
  std::vector<DensityRecord> out;
  for (std::size_t j = 0; j < preds.intermediates.size(); ++j) {
    const auto & states = preds.intermediates[j];
    if (states.empty()) {
      throw ValidationError("empty intermediate state list");
    }
    DensityRecord rec;
    rec.window = window;
    rec.ladder_index = j;
    rec.k = preds.ladder[j];
    rec.steps = steps;
    rec.stride = stride;
    const auto horizon = states[0].rows();
    rec.positions.assign(static_cast<std::size_t>(horizon),
                         Mat(static_cast<Eigen::Index>(states.size()), 2));
    for (std::size_t s = 0; s < states.size(); ++s) {
      for (Eigen::Index t = 0; t < horizon; ++t) {
        rec.positions[static_cast<std::size_t>(t)].row(static_cast<Eigen::Index>(s)) =
          states[s].row(t);
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

nlohmann::json to_json(const DensityRecord & rec)
{
  auto positions = nlohmann::json::array();
  for (const auto & p : rec.positions) {
    positions.push_back(trajectory_to_json(p));
  }
  return {
    {"window", rec.window},     {"ladder_index", rec.ladder_index},
    {"k", rec.k},               {"K", rec.steps},
    {"stride", rec.stride},     {"n_samples", rec.n_samples()},
    {"positions", std::move(positions)},
  };
}

DensityRecord density_record_from_json(const nlohmann::json & j)
{
  DensityRecord rec;
  rec.window = j.at("window").get<std::uint64_t>();
  rec.ladder_index = j.at("ladder_index").get<std::size_t>();
  rec.k = j.at("k").get<int>();
  rec.steps = j.at("K").get<int>();
  rec.stride = j.at("stride").get<int>();
  for (const auto & p : j.at("positions")) {
    rec.positions.push_back(trajectory_from_json(p));
  }
  const auto n = j.at("n_samples").get<std::size_t>();
  for (const auto & p : rec.positions) {
    if (static_cast<std::size_t>(p.rows()) != n) {
      throw ValidationError("density record sample count does not match n_samples");
    }
  }
  return rec;
}

void write_density_jsonl(std::ostream & out, std::span<const DensityRecord> records)
{
  for (const auto & r : records) {
    out << to_json(r).dump() << '\n';
  }
}

namespace
{

nlohmann::json trajectories_to_json(const std::vector<Trajectory> & ts)
{
  auto arr = nlohmann::json::array();
  for (const auto & t : ts) {
    arr.push_back(trajectory_to_json(t));
  }
  return arr;
}

std::vector<Trajectory> trajectories_from_json(const nlohmann::json & j)
{
  std::vector<Trajectory> out;
  for (const auto & t : j) {
    out.push_back(trajectory_from_json(t));
  }
  return out;
}

template <typename T, typename F>
std::vector<T> read_jsonl(std::istream & in, F && from_json)
{
  std::vector<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      out.push_back(from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception & e) {
      throw ParseError(line_no, e.what());
    } catch (const ValidationError & e) {
      throw ParseError(line_no, e.what());
    }
  }
  return out;
}

}  // namespace

nlohmann::json to_json(const PredictionRecord & rec)
{
  const auto & p = rec.set;
  nlohmann::json j = {
    {"window", rec.window},
    {"K", rec.steps},
    {"stride", rec.stride},
    {"intention", {p.intention.lateral, p.intention.longitudinal}},
    {"ladder", p.ladder},
    {"conditional_evals", p.conditional_evals},
    {"unconditional_evals", p.unconditional_evals},
    {"samples", trajectories_to_json(p.samples)},
  };
  if (!p.intermediates.empty()) {
    auto inter = nlohmann::json::array();
    for (const auto & hop : p.intermediates) {
      inter.push_back(trajectories_to_json(hop));
    }
    j["intermediates"] = std::move(inter);
  }
  return j;
}

PredictionRecord prediction_record_from_json(const nlohmann::json & j)
{
  PredictionRecord rec;
  rec.window = j.at("window").get<std::uint64_t>();
  rec.steps = j.at("K").get<int>();
  rec.stride = j.at("stride").get<int>();
  auto & p = rec.set;
  const auto & in = j.at("intention");
  p.intention = {in.at(0).get<double>(), in.at(1).get<double>()};
  p.ladder = j.at("ladder").get<std::vector<int>>();
  p.conditional_evals = j.value("conditional_evals", std::size_t{0});
  p.unconditional_evals = j.value("unconditional_evals", std::size_t{0});
  p.samples = trajectories_from_json(j.at("samples"));
  if (p.samples.empty()) {
    throw ValidationError("prediction record has no samples");
  }
  if (j.contains("intermediates")) {
    for (const auto & hop : j.at("intermediates")) {
      p.intermediates.push_back(trajectories_from_json(hop));
    }
  }
  return rec;
}

std::vector<DensityRecord> read_density_jsonl(std::istream & in)
{
  return read_jsonl<DensityRecord>(in, density_record_from_json);
}

void write_predictions_jsonl(std::ostream & out, std::span<const PredictionRecord> records)
{
  for (const auto & r : records) {
    out << to_json(r).dump() << '\n';
  }
}

std::vector<PredictionRecord> read_predictions_jsonl(std::istream & in)
{
  return read_jsonl<PredictionRecord>(in, prediction_record_from_json);
}

std::vector<PredictionRecord> read_predictions_jsonl_file(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path + "' for reading");
  }
  return read_predictions_jsonl(in);
}

std::string config_digest(std::string_view text)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json metrics_to_json(const Metrics & m, const std::string & digest)
{
  return {
    {"ade", m.ade},
    {"fde", m.fde},
    {"n_windows", m.n_windows},
    {"n_samples", m.n_samples},
    {"config_digest", digest},
  };
}

void print_metrics_table(std::ostream & out, const Metrics & m, std::string_view label)
{
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-24s %10s %10s %10s %10s\n", "method", "ADE", "FDE",
                "windows", "samples");
  out << buf;
  std::snprintf(buf, sizeof(buf), "%-24.*s %10.4f %10.4f %10zu %10zu\n",
                static_cast<int>(label.size()), label.data(), m.ade, m.fde, m.n_windows,
                m.n_samples);
  out << buf;
}

}  // namespace intdiff
