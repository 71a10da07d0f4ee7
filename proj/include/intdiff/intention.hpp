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

#ifndef INTDIFF__INTENTION_HPP_
#define INTDIFF__INTENTION_HPP_

#include "intdiff/trajdata.hpp"
#include "intdiff/types.hpp"

#include <span>
#include <string>
#include <string_view>

namespace intdiff
{

/// Labeling thresholds, in the heading-aligned body frame.
struct IntentionThresholds
{
  double v_lt = 0.2;    ///< m/s, lateral velocity above which the label is Lt
  double v_rt = -0.2;   ///< m/s, lateral velocity below which the label is Rt
  double a_acc = 0.5;   ///< m/s^2
  double a_dec = -0.5;  ///< m/s^2
};

void validate(const IntentionThresholds & th);

enum class Lateral { Lt, Kd, Rt };
enum class Longitudinal { Acc, Nor, Dec };

struct IntentionLabel
{
  Lateral lateral = Lateral::Kd;
  Longitudinal longitudinal = Longitudinal::Nor;

  bool operator==(const IntentionLabel &) const = default;
};

/// Numeric intention fed to the networks. Labels encode to {+1, 0, -1} per
/// axis; estimator outputs are unconstrained reals.
struct IntentionVector
{
  double lateral = 0.0;
  double longitudinal = 0.0;

  bool operator==(const IntentionVector &) const = default;
};

enum class Segment { Future, Observed };

struct BodyFrameDerivatives
{
  double v_la = 0.0;  ///< mean lateral velocity, m/s (positive = left)
  double a_lo = 0.0;  ///< mean longitudinal acceleration, m/s^2
  /// True when the observed displacement was too small to define a heading
  /// and the +x axis was used instead.
  bool degenerate_heading = false;
};

/**
 * @brief Lateral velocity and longitudinal acceleration of one segment.
 *
 * The longitudinal axis is the mean heading of the observed segment
 * (direction of its total displacement); the lateral axis is that heading
 * rotated by +90 degrees. v_la is the mean first difference of the lateral
 * coordinate over dt, a_lo the mean second difference of the longitudinal
 * coordinate over dt^2.
 */
BodyFrameDerivatives body_frame_derivatives(
  const TrajectoryWindow & window, Segment segment, double dt = kFrameStep);

Lateral label_lateral(double v_la, const IntentionThresholds & th = {});
Longitudinal label_longitudinal(double a_lo, const IntentionThresholds & th = {});

struct LabeledIntention
{
  IntentionLabel label;
  BodyFrameDerivatives derivatives;
};

/// Label the future segment of a window.
LabeledIntention label_window(
  const TrajectoryWindow & window, const IntentionThresholds & th = {}, double dt = kFrameStep);

IntentionVector encode(const IntentionLabel & label);
/// Inverse of encode(); throws ValidationError unless both codes are exactly
/// one of {+1, 0, -1}.
IntentionLabel decode(const IntentionVector & vec);

/// Mean over batch and both components of the squared difference.
double intention_loss(
  std::span<const IntentionVector> predicted, std::span<const IntentionVector> target);

std::string_view to_string(Lateral v);
std::string_view to_string(Longitudinal v);

}  // namespace intdiff

#endif  // INTDIFF__INTENTION_HPP_
