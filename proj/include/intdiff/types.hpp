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

#ifndef INTDIFF__TYPES_HPP_
#define INTDIFF__TYPES_HPP_

#include <Eigen/Dense>

namespace intdiff
{

/// Row-major dynamic matrix. All model and trajectory math is 64-bit.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A sequence of 2-D positions, one row per timestep (N x 2), in meters.
using Trajectory = Mat;

using Point2 = Eigen::Vector2d;

inline constexpr int kObsLen = 8;
inline constexpr int kFutLen = 12;
inline constexpr double kFrameStep = 0.4;

}  // namespace intdiff

#endif  // INTDIFF__TYPES_HPP_
