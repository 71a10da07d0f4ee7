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

#include "intdiff/intention.hpp"

#include "intdiff/errors.hpp"

#include <cmath>

namespace intdiff
{

void validate(const IntentionThresholds & th)
{
  if (!(th.v_lt > th.v_rt)) {
    throw ValidationError("intention thresholds require v_lt > v_rt");
  }
  if (!(th.a_acc > th.a_dec)) {
    throw ValidationError("intention thresholds require a_acc > a_dec");
  }
}

BodyFrameDerivatives body_frame_derivatives(
  const TrajectoryWindow & window, Segment segment, double dt)
{
  if (!(dt > 0.0)) {
    throw ValidationError("dt must be positive");
  }
  const Trajectory & seg = segment == Segment::Future ? window.fut : window.obs;
  const Eigen::Index n = seg.rows();
  if (n < 3) {
    throw ValidationError("segment needs at least 3 points");
  }
  if (window.obs.rows() < 2) {
    throw ValidationError("observed segment needs at least 2 points");
  }

  BodyFrameDerivatives out;
  const Point2 disp =
    (window.obs.row(window.obs.rows() - 1) - window.obs.row(0)).transpose();
  const double norm = disp.norm();
  Point2 lon_axis(1.0, 0.0);
  if (norm < 1e-9) {
    out.degenerate_heading = true;
  } else {
    lon_axis = disp / norm;
  }
  const Point2 lat_axis(-lon_axis.y(), lon_axis.x());

  const Eigen::VectorXd lon = seg * lon_axis;
  const Eigen::VectorXd lat = seg * lat_axis;

  double sum_v = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    sum_v += lat(i) - lat(i - 1);
  }
  double sum_a = 0.0;
  for (Eigen::Index i = 2; i < n; ++i) {
    sum_a += lon(i) - 2.0 * lon(i - 1) + lon(i - 2);
  }
  out.v_la = sum_v / static_cast<double>(n - 1) / dt;
  out.a_lo = sum_a / static_cast<double>(n - 2) / (dt * dt);
  return out;
}

Lateral label_lateral(double v_la, const IntentionThresholds & th)
{
  if (v_la > th.v_lt) {
    return Lateral::Lt;
  }
  if (v_la < th.v_rt) {
    return Lateral::Rt;
  }
  return Lateral::Kd;
}

Longitudinal label_longitudinal(double a_lo, const IntentionThresholds & th)
{
  if (a_lo > th.a_acc) {
    return Longitudinal::Acc;
  }
  if (a_lo < th.a_dec) {
    return Longitudinal::Dec;
  }
  return Longitudinal::Nor;
}

LabeledIntention label_window(
  const TrajectoryWindow & window, const IntentionThresholds & th, double dt)
{
  LabeledIntention out;
  out.derivatives = body_frame_derivatives(window, Segment::Future, dt);
  out.label.lateral = label_lateral(out.derivatives.v_la, th);
  out.label.longitudinal = label_longitudinal(out.derivatives.a_lo, th);
  return out;
}

IntentionVector encode(const IntentionLabel & label)
{
  IntentionVector v;
  switch (label.lateral) {
    case Lateral::Lt: v.lateral = 1.0; break;
    case Lateral::Kd: v.lateral = 0.0; break;
    case Lateral::Rt: v.lateral = -1.0; break;
  }
  switch (label.longitudinal) {
    case Longitudinal::Acc: v.longitudinal = 1.0; break;
    case Longitudinal::Nor: v.longitudinal = 0.0; break;
    case Longitudinal::Dec: v.longitudinal = -1.0; break;
  }
  return v;
}

IntentionLabel decode(const IntentionVector & vec)
{
  IntentionLabel label;
  if (vec.lateral == 1.0) {
    label.lateral = Lateral::Lt;
  } else if (vec.lateral == 0.0) {
    label.lateral = Lateral::Kd;
  } else if (vec.lateral == -1.0) {
    label.lateral = Lateral::Rt;
  } else {
    throw ValidationError("lateral code is not one of {+1, 0, -1}");
  }
  if (vec.longitudinal == 1.0) {
    label.longitudinal = Longitudinal::Acc;
  } else if (vec.longitudinal == 0.0) {
    label.longitudinal = Longitudinal::Nor;
  } else if (vec.longitudinal == -1.0) {
    label.longitudinal = Longitudinal::Dec;
  } else {
    throw ValidationError("longitudinal code is not one of {+1, 0, -1}");
  }
  return label;
}

double intention_loss(
  std::span<const IntentionVector> predicted, std::span<const IntentionVector> target)
{
  if (predicted.size() != target.size()) {
    throw ValidationError("intention_loss: batch length mismatch");
  }
  if (predicted.empty()) {
    throw ValidationError("intention_loss: empty batch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double dl = predicted[i].lateral - target[i].lateral;
    const double dg = predicted[i].longitudinal - target[i].longitudinal;
    sum += dl * dl + dg * dg;
  }
  return sum / (2.0 * static_cast<double>(predicted.size()));
}

std::string_view to_string(Lateral v)
{
  switch (v) {
    case Lateral::Lt: return "Lt";
    case Lateral::Kd: return "Kd";
    case Lateral::Rt: return "Rt";
  }
  return "?";
}

std::string_view to_string(Longitudinal v)
{
  switch (v) {
    case Longitudinal::Acc: return "Acc";
    case Longitudinal::Nor: return "Nor";
    case Longitudinal::Dec: return "Dec";
  }
  return "?";
}

}  // namespace intdiff
