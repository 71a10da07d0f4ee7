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

#include "intdiff/trajdata.hpp"

#include "intdiff/errors.hpp"
#include "intdiff/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

namespace intdiff
{

namespace
{

std::vector<std::string_view> split_fields(std::string_view line)
{
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == ',')) {
      ++i;
    }
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != ',') {
      ++i;
    }
    if (i > start) {
      fields.push_back(line.substr(start, i - start));
    }
  }
  return fields;
}

double parse_number(std::string_view field, std::size_t line_no)
{
  double value = 0.0;
  const auto * first = field.data();
  const auto * last = field.data() + field.size();
  if (first != last && *first == '+') {
    ++first;
  }
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(line_no, "non-numeric field '" + std::string(field) + "'");
  }
  if (!std::isfinite(value)) {
    throw ParseError(line_no, "non-finite field '" + std::string(field) + "'");
  }
  return value;
}

std::int64_t parse_index(std::string_view field, std::size_t line_no, const char * what)
{
  const double value = parse_number(field, line_no);
  if (value < 0.0 || value != std::floor(value) || value > 9.0e15) {
    throw ParseError(
      line_no, std::string(what) + " must be a non-negative integer, got '" + std::string(field) +
                 "'");
  }
  return static_cast<std::int64_t>(value);
}

std::int64_t detect_increment(const Scene & scene)
{
  std::int64_t best = 0;
  for (const auto & [id, records] : scene.pedestrians) {
    for (std::size_t i = 1; i < records.size(); ++i) {
      const auto d = records[i].frame_id - records[i - 1].frame_id;
      if (best == 0 || d < best) {
        best = d;
      }
    }
  }
  return best;
}

}  // namespace

std::size_t Scene::record_count() const
{
  std::size_t n = 0;
  for (const auto & [id, records] : pedestrians) {
    n += records.size();
  }
  return n;
}

void validate_window(const TrajectoryWindow & window)
{
  if (window.obs.rows() != kObsLen || window.obs.cols() != 2) {
    throw ValidationError("window obs must be 8x2");
  }
  if (window.fut.rows() != kFutLen || window.fut.cols() != 2) {
    throw ValidationError("window fut must be 12x2");
  }
  if (!window.obs.allFinite() || !window.fut.allFinite() || !window.origin.allFinite()) {
    throw ValidationError("window contains non-finite coordinates");
  }
}

void validate(const SyntheticSpec & spec)
{
  if (spec.count <= 0) {
    throw ValidationError("synthetic count must be positive");
  }
  if (spec.noise_std < 0.0 || !std::isfinite(spec.noise_std)) {
    throw ValidationError("synthetic noise_std must be finite and >= 0");
  }
  if (!(spec.dt > 0.0) || !std::isfinite(spec.speed) || !std::isfinite(spec.turn_rate)) {
    throw ValidationError("synthetic speed/turn_rate must be finite and dt > 0");
  }
  double sum = 0.0;
  for (const double p : spec.turn_probabilities) {
    if (p < 0.0 || !std::isfinite(p)) {
      throw ValidationError("turn probabilities must be non-negative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("turn probabilities must sum to 1");
  }
}

Scene parse_scene_file(std::string_view text)
{
  Scene scene;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') {
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() < 4) {
      throw ParseError(line_no, "expected at least 4 fields, got " + std::to_string(fields.size()));
    }
    RawRecord rec;
    rec.frame_id = parse_index(fields[0], line_no, "frame_id");
    rec.ped_id = parse_index(fields[1], line_no, "ped_id");
    rec.x = parse_number(fields[2], line_no);
    rec.y = parse_number(fields[3], line_no);
    scene.pedestrians[rec.ped_id].push_back(rec);
  }

  for (auto & [id, records] : scene.pedestrians) {
    std::stable_sort(records.begin(), records.end(), [](const auto & a, const auto & b) {
      return a.frame_id < b.frame_id;
    });
    for (std::size_t i = 1; i < records.size(); ++i) {
      if (records[i].frame_id == records[i - 1].frame_id) {
        throw ValidationError(
          "duplicate observation for ped_id " + std::to_string(id) + " at frame_id " +
          std::to_string(records[i].frame_id));
      }
    }
  }
  scene.frame_increment = detect_increment(scene);
  return scene;
}

Scene parse_scene_file(std::istream & in)
{
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_scene_file(std::string_view(text));
}

std::vector<TrajectoryWindow> build_windows(
  const Scene & scene, int t_obs, int t_fut, int stride)
{
  if (t_obs < 1 || t_fut < 1 || stride < 1) {
    throw ValidationError("t_obs, t_fut and stride must be >= 1");
  }
  const auto len = static_cast<std::size_t>(t_obs + t_fut);
  std::vector<TrajectoryWindow> windows;
  for (const auto & [id, records] : scene.pedestrians) {
    // Split into runs of consecutive frames.
    std::size_t run_start = 0;
    for (std::size_t i = 1; i <= records.size(); ++i) {
      const bool breaks = i == records.size() ||
                          records[i].frame_id - records[i - 1].frame_id != scene.frame_increment;
      if (!breaks) {
        continue;
      }
      const std::size_t run_len = i - run_start;
      for (std::size_t off = 0; off + len <= run_len; off += static_cast<std::size_t>(stride)) {
        TrajectoryWindow w;
        w.ped_id = id;
        w.obs.resize(t_obs, 2);
        w.fut.resize(t_fut, 2);
        for (std::size_t j = 0; j < len; ++j) {
          const auto & r = records[run_start + off + j];
          if (j < static_cast<std::size_t>(t_obs)) {
            w.obs(static_cast<Eigen::Index>(j), 0) = r.x;
            w.obs(static_cast<Eigen::Index>(j), 1) = r.y;
          } else {
            w.fut(static_cast<Eigen::Index>(j) - t_obs, 0) = r.x;
            w.fut(static_cast<Eigen::Index>(j) - t_obs, 1) = r.y;
          }
        }
        windows.push_back(std::move(w));
      }
      run_start = i;
    }
  }
  return windows;
}

TrajectoryWindow normalize(const TrajectoryWindow & window)
{
  const Point2 last = window.obs.row(window.obs.rows() - 1).transpose();
  TrajectoryWindow out = window;
  out.obs.rowwise() -= last.transpose();
  out.fut.rowwise() -= last.transpose();
  out.origin = window.origin + last;
  return out;
}

TrajectoryWindow denormalize(const TrajectoryWindow & window)
{
  TrajectoryWindow out = window;
  out.obs.rowwise() += window.origin.transpose();
  out.fut.rowwise() += window.origin.transpose();
  out.origin = Point2::Zero();
  return out;
}

std::vector<TrajectoryWindow> generate_synthetic(const SyntheticSpec & spec)
{
  validate(spec);
  Rng rng(derive_seed({spec.seed, 0x5e17ULL}));
  const double step = spec.speed * spec.dt;
  const auto & p = spec.turn_probabilities;

  std::vector<TrajectoryWindow> windows;
  windows.reserve(static_cast<std::size_t>(spec.count));
  for (int n = 0; n < spec.count; ++n) {
    const double heading0 = 2.0 * std::numbers::pi * rng.uniform();
    const Point2 start(20.0 * rng.uniform() - 10.0, 20.0 * rng.uniform() - 10.0);
    const double u = rng.uniform();
    const double turn = u < p[0] ? 1.0 : (u < p[0] + p[1] ? 0.0 : -1.0);

    TrajectoryWindow w;
    w.ped_id = n;
    Point2 pos = start;
    for (int t = 0; t < kObsLen; ++t) {
      w.obs.row(t) = pos.transpose();
      pos += step * Point2(std::cos(heading0), std::sin(heading0));
    }
    pos = w.obs.row(kObsLen - 1).transpose();
    double heading = heading0;
    for (int t = 0; t < kFutLen; ++t) {
      heading += turn * spec.turn_rate;
      pos += step * Point2(std::cos(heading), std::sin(heading));
      w.fut.row(t) = pos.transpose();
    }
    if (spec.noise_std > 0.0) {
      for (int t = 0; t < kObsLen; ++t) {
        w.obs(t, 0) += spec.noise_std * rng.normal();
        w.obs(t, 1) += spec.noise_std * rng.normal();
      }
      for (int t = 0; t < kFutLen; ++t) {
        w.fut(t, 0) += spec.noise_std * rng.normal();
        w.fut(t, 1) += spec.noise_std * rng.normal();
      }
    }
    windows.push_back(normalize(w));
  }
  return windows;
}

nlohmann::json trajectory_to_json(const Trajectory & traj)
{
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < traj.rows(); ++i) {
    arr.push_back({traj(i, 0), traj(i, 1)});
  }
  return arr;
}

Trajectory trajectory_from_json(const nlohmann::json & j)
{
  if (!j.is_array()) {
    throw ValidationError("trajectory must be an array of [x, y] pairs");
  }
  Trajectory t(static_cast<Eigen::Index>(j.size()), 2);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto & p = j[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw ValidationError("trajectory point must be [x, y]");
    }
    t(static_cast<Eigen::Index>(i), 0) = p[0].get<double>();
    t(static_cast<Eigen::Index>(i), 1) = p[1].get<double>();
  }
  return t;
}

nlohmann::json window_to_json(const TrajectoryWindow & window)
{
  return {
    {"ped_id", window.ped_id},
    {"origin", {window.origin.x(), window.origin.y()}},
    {"obs", trajectory_to_json(window.obs)},
    {"fut", trajectory_to_json(window.fut)},
  };
}

TrajectoryWindow window_from_json(const nlohmann::json & j)
{
  if (!j.is_object() || !j.contains("obs") || !j.contains("fut")) {
    throw ValidationError("window record needs 'obs' and 'fut'");
  }
  TrajectoryWindow w;
  w.ped_id = j.value("ped_id", std::int64_t{0});
  if (j.contains("origin")) {
    const auto o = trajectory_from_json(nlohmann::json::array({j.at("origin")}));
    w.origin = o.row(0).transpose();
  }
  w.obs = trajectory_from_json(j.at("obs"));
  w.fut = trajectory_from_json(j.at("fut"));
  validate_window(w);
  return w;
}

std::vector<TrajectoryWindow> read_windows_jsonl(std::istream & in)
{
  std::vector<TrajectoryWindow> windows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      windows.push_back(window_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception & e) {
      throw ParseError(line_no, e.what());
    } catch (const ValidationError & e) {
      throw ParseError(line_no, e.what());
    }
  }
  return windows;
}

std::vector<TrajectoryWindow> read_windows_jsonl_file(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path + "' for reading");
  }
  return read_windows_jsonl(in);
}

void write_windows_jsonl(std::ostream & out, const std::vector<TrajectoryWindow> & windows)
{
  for (const auto & w : windows) {
    out << window_to_json(w).dump() << '\n';
  }
}

}  // namespace intdiff
