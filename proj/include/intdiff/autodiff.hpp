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

#ifndef INTDIFF__AUTODIFF_HPP_
#define INTDIFF__AUTODIFF_HPP_

#include "intdiff/types.hpp"

#include <functional>
#include <span>
#include <vector>

namespace intdiff::autodiff
{

/// Handle to a node on a Tape.
struct Var
{
  int id = -1;
};

/**
 * @brief Reverse-mode differentiation over dense matrices.
 *
 * Nodes are appended in evaluation order, so the tape is already
 * topologically sorted and backward() is a single reverse sweep. Parameter
 * leaves reference external storage (no copy) and add their gradient into a
 * caller-provided buffer. A tape built with `record == false` keeps values
 * only, for inference.
 */
class Tape
{
public:
  explicit Tape(bool record = true) : record_(record) {}

  Var constant(Mat value);
  /// `grad` may be null, in which case the leaf is treated as a constant.
  Var parameter(const Mat & value, Mat * grad);

  const Mat & value(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  Var matmul(Var a, Var b);
  /// a * b^T
  Var matmul_nt(Var a, Var b);
  Var add(Var a, Var b);
  /// Adds a 1 x m row to every row of a.
  Var add_row(Var a, Var row);
  Var scale(Var a, double s);
  /// tanh approximation of GELU.
  Var gelu(Var a);
  /// Per-row normalization with 1 x m gain and bias.
  Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);
  Var softmax_rows(Var a);
  Var slice_cols(Var a, int begin, int count);
  Var concat_cols(std::span<const Var> parts);
  Var slice_rows(Var a, int begin, int count);
  Var concat_rows(std::span<const Var> parts);
  /// 1 x m mean over rows.
  Var mean_rows(Var a);
  /// Scalar (1 x 1) mean of squared differences against a constant target.
  Var mse(Var a, const Mat & target);

  /// Seeds d(loss)/d(loss) = 1 and accumulates into every parameter buffer.
  void backward(Var loss);

private:
  struct Node
  {
    Mat value;
    const Mat * external = nullptr;
    Mat * grad_sink = nullptr;
    bool requires_grad = false;
    std::function<void(int)> back;
  };

  Var push(Mat value, bool requires_grad, std::function<void(int)> back);
  bool needs(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].requires_grad; }
  const Mat & grad(int id) const { return grads_[static_cast<std::size_t>(id)]; }
  void accumulate(Var v, const Mat & g);

  bool record_;
  std::vector<Node> nodes_;
  std::vector<Mat> grads_;
};

}  // namespace intdiff::autodiff

#endif  // INTDIFF__AUTODIFF_HPP_
