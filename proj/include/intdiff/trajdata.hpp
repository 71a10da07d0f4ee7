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

#ifndef INTDIFF__TRAJDATA_HPP_
#define INTDIFF__TRAJDATA_HPP_

#include "intdiff/types.hpp"

#include "json.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace intdiff
{

struct RawRecord
{
  std::int64_t frame_id = 0;
  std::int64_t ped_id = 0;
  double x = 0.0;
  double y = 0.0;
};

/// Annotation records grouped per pedestrian, each group sorted by frame_id.
struct Scene
{
  std::map<std::int64_t, std::vector<RawRecord>> pedestrians;
  /// Seconds between successive records of one pedestrian.
  double frame_step = kFrameStep;
  /// Native frame-id increment between successive records; 0 when the scene
  /// has no pedestrian with two records.
  std::int64_t frame_increment = 0;

  std::size_t record_count() const;
};

/// One sample: observed history and future, plus the offset removed by
/// normalize(). Absolute positions are `obs + origin` / `fut + origin`.
struct TrajectoryWindow
{
  Trajectory obs = Trajectory::Zero(kObsLen, 2);
  Trajectory fut = Trajectory::Zero(kFutLen, 2);
  Point2 origin = Point2::Zero();
  std::int64_t ped_id = 0;
};

/// Throws ValidationError unless the window has 8 + 12 finite positions.
void validate_window(const TrajectoryWindow & window);

struct SyntheticSpec
{
  int count = 100;
  double speed = 1.0;
  /// (left, straight, right)
  std::array<double, 3> turn_probabilities{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  double turn_rate = 0.15;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
  double dt = kFrameStep;
};

void validate(const SyntheticSpec & spec);

/// Parse whitespace-separated `frame_id ped_id x y [...]` text. Blank lines
/// and lines starting with '#' are skipped; CRLF endings are accepted.
Scene parse_scene_file(std::string_view text);
Scene parse_scene_file(std::istream & in);

/// Cut every run of consecutive frames into windows of t_obs + t_fut records.
/// Positions are copied verbatim, origin is zero.
std::vector<TrajectoryWindow> build_windows(
  const Scene & scene, int t_obs = kObsLen, int t_fut = kFutLen, int stride = 1);

/// Translate so that the last observed point sits at (0, 0). The removed
/// offset is accumulated into `origin`.
TrajectoryWindow normalize(const TrajectoryWindow & window);

/// Add `origin` back and reset it to zero.
TrajectoryWindow denormalize(const TrajectoryWindow & window);

/// Straight history along a random heading, then a left / straight / right
/// arc, Gaussian position noise, emitted normalized.
std::vector<TrajectoryWindow> generate_synthetic(const SyntheticSpec & spec);

// JSON Lines serialization.
nlohmann::json window_to_json(const TrajectoryWindow & window);
TrajectoryWindow window_from_json(const nlohmann::json & j);
nlohmann::json trajectory_to_json(const Trajectory & traj);
Trajectory trajectory_from_json(const nlohmann::json & j);

std::vector<TrajectoryWindow> read_windows_jsonl(std::istream & in);
std::vector<TrajectoryWindow> read_windows_jsonl_file(const std::string & path);
void write_windows_jsonl(std::ostream & out, const std::vector<TrajectoryWindow> & windows);

}  // namespace intdiff

#endif  // INTDIFF__TRAJDATA_HPP_
