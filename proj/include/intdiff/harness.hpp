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

#ifndef INTDIFF__HARNESS_HPP_
#define INTDIFF__HARNESS_HPP_

#include "intdiff/sampler.hpp"
#include "intdiff/types.hpp"

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace intdiff
{

struct Metrics
{
  double ade = 0.0;  ///< meters
  double fde = 0.0;  ///< meters
  std::size_t n_windows = 0;
  std::size_t n_samples = 0;
};

/// Mean Euclidean distance over corresponding timesteps.
double ade(const Trajectory & pred, const Trajectory & truth);
/// Euclidean distance between the final points.
double fde(const Trajectory & pred, const Trajectory & truth);

/// Minimum ADE and minimum FDE over the samples (taken independently).
Metrics best_of_n(std::span<const Trajectory> samples, const Trajectory & truth);
Metrics best_of_n(const PredictionSet & preds, const Trajectory & truth);

/// Dataset-level means of per-window metrics. Values are summed in sorted
/// order, so the result does not depend on window order.
Metrics aggregate(std::span<const Metrics> per_window);

/// Repeats the last observed displacement for `horizon` steps.
Trajectory constant_velocity_baseline(const Trajectory & obs, int horizon = kFutLen);

/// One density record: all sample positions after one ladder hop.
struct DensityRecord
{
  std::uint64_t window = 0;
  std::size_t ladder_index = 0;
  int k = 0;  ///< step reached after the hop
  int steps = 0;
  int stride = 0;
  /// positions[t] is n_samples x 2: every sample's position at future step t.
  std::vector<Mat> positions;

  std::size_t n_samples() const { return positions.empty() ? 0 : positions[0].rows(); }
};

/// Regroup a PredictionSet's intermediates by ladder hop and timestep.
/// Throws ValidationError when intermediates were not recorded.
std::vector<DensityRecord> density_records(
  const PredictionSet & preds, std::uint64_t window, int steps, int stride);

nlohmann::json to_json(const DensityRecord & rec);
DensityRecord density_record_from_json(const nlohmann::json & j);
void write_density_jsonl(std::ostream & out, std::span<const DensityRecord> records);
std::vector<DensityRecord> read_density_jsonl(std::istream & in);

/// One PredictionSet tagged with its window index and ladder parameters.
struct PredictionRecord
{
  std::uint64_t window = 0;
  int steps = 0;
  int stride = 0;
  PredictionSet set;
};

nlohmann::json to_json(const PredictionRecord & rec);
PredictionRecord prediction_record_from_json(const nlohmann::json & j);
void write_predictions_jsonl(std::ostream & out, std::span<const PredictionRecord> records);
std::vector<PredictionRecord> read_predictions_jsonl(std::istream & in);
std::vector<PredictionRecord> read_predictions_jsonl_file(const std::string & path);

/// FNV-1a 64 of the text, as 16 hex digits.
std::string config_digest(std::string_view text);

nlohmann::json metrics_to_json(const Metrics & m, const std::string & digest);
void print_metrics_table(std::ostream & out, const Metrics & m, std::string_view label);

}  // namespace intdiff

#endif  // INTDIFF__HARNESS_HPP_
