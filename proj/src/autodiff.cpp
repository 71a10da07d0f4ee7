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

#include "intdiff/autodiff.hpp"

#include "intdiff/errors.hpp"

#include <cmath>
#include <numbers>

namespace intdiff::autodiff
{

namespace
{

void require_same_shape(const Mat & a, const Mat & b, const char * op)
{
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ValidationError(std::string(op) + ": shape mismatch");
  }
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluK = 0.044715;

}  // namespace

Var Tape::push(Mat value, bool requires_grad, std::function<void(int)> back)
{
  Node n;
  n.value = std::move(value);
  n.requires_grad = record_ && requires_grad;
  if (n.requires_grad) {
    n.back = std::move(back);
  }
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Mat value)
{
  return push(std::move(value), false, nullptr);
}

Var Tape::parameter(const Mat & value, Mat * grad)
{
  Node n;
  n.external = &value;
  n.grad_sink = grad;
  n.requires_grad = record_ && grad != nullptr;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Mat & Tape::value(Var v) const
{
  const auto & n = nodes_[static_cast<std::size_t>(v.id)];
  return n.external != nullptr ? *n.external : n.value;
}

void Tape::accumulate(Var v, const Mat & g)
{
  if (!needs(v)) {
    return;
  }
  auto & slot = grads_[static_cast<std::size_t>(v.id)];
  if (slot.size() == 0) {
    slot = g;
  } else {
    slot += g;
  }
}

Var Tape::matmul(Var a, Var b)
{
  const Mat & av = value(a);
  const Mat & bv = value(b);
  if (av.cols() != bv.rows()) {
    throw ValidationError("matmul: inner dimension mismatch");
  }
  return push(av * bv, needs(a) || needs(b), [this, a, b](int self) {
    const Mat & g = grad(self);
    if (needs(a)) {
      accumulate(a, g * value(b).transpose());
    }
    if (needs(b)) {
      accumulate(b, value(a).transpose() * g);
    }
  });
}

Var Tape::matmul_nt(Var a, Var b)
{
  const Mat & av = value(a);
  const Mat & bv = value(b);
  if (av.cols() != bv.cols()) {
    throw ValidationError("matmul_nt: inner dimension mismatch");
  }
  return push(av * bv.transpose(), needs(a) || needs(b), [this, a, b](int self) {
    const Mat & g = grad(self);
    if (needs(a)) {
      accumulate(a, g * value(b));
    }
    if (needs(b)) {
      accumulate(b, g.transpose() * value(a));
    }
  });
}

Var Tape::add(Var a, Var b)
{
  require_same_shape(value(a), value(b), "add");
  return push(value(a) + value(b), needs(a) || needs(b), [this, a, b](int self) {
    accumulate(a, grad(self));
    accumulate(b, grad(self));
  });
}

Var Tape::add_row(Var a, Var row)
{
  const Mat & av = value(a);
  const Mat & rv = value(row);
  if (rv.rows() != 1 || rv.cols() != av.cols()) {
    throw ValidationError("add_row: row must be 1 x cols");
  }
  Mat out = av;
  out.rowwise() += rv.row(0);
  return push(std::move(out), needs(a) || needs(row), [this, a, row](int self) {
    accumulate(a, grad(self));
    if (needs(row)) {
      accumulate(row, grad(self).colwise().sum());
    }
  });
}

Var Tape::scale(Var a, double s)
{
  return push(s * value(a), needs(a), [this, a, s](int self) { accumulate(a, s * grad(self)); });
}

Var Tape::gelu(Var a)
{
  const Mat & x = value(a);
  Mat t = (kGeluC * (x.array() + kGeluK * x.array().cube())).tanh().matrix();
  Mat out = (0.5 * x.array() * (1.0 + t.array())).matrix();
  return push(std::move(out), needs(a), [this, a, t = std::move(t)](int self) {
    const auto & xa = value(a).array();
    const auto ta = t.array();
    const Mat d =
      (0.5 * (1.0 + ta) + 0.5 * xa * (1.0 - ta.square()) * kGeluC * (1.0 + 3.0 * kGeluK * xa.square()))
        .matrix();
    accumulate(a, (grad(self).array() * d.array()).matrix());
  });
}

Var Tape::layer_norm(Var x, Var gain, Var bias, double eps)
{
  const Mat & xv = value(x);
  const Mat & gv = value(gain);
  const Mat & bv = value(bias);
  const Eigen::Index n = xv.rows();
  const Eigen::Index m = xv.cols();
  if (gv.rows() != 1 || gv.cols() != m || bv.rows() != 1 || bv.cols() != m) {
    throw ValidationError("layer_norm: gain/bias must be 1 x cols");
  }
  Mat xhat(n, m);
  Eigen::VectorXd inv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = xv.row(i).mean();
    const double var = (xv.row(i).array() - mu).square().mean();
    inv(i) = 1.0 / std::sqrt(var + eps);
    xhat.row(i) = (xv.row(i).array() - mu) * inv(i);
  }
  Mat out = xhat;
  out.array().rowwise() *= gv.row(0).array();
  out.rowwise() += bv.row(0);
  const bool req = needs(x) || needs(gain) || needs(bias);
  return push(
    std::move(out), req,
    [this, x, gain, bias, xhat = std::move(xhat), inv = std::move(inv)](int self) {
      const Mat & g = grad(self);
      if (needs(gain)) {
        accumulate(gain, (g.array() * xhat.array()).colwise().sum().matrix());
      }
      if (needs(bias)) {
        accumulate(bias, g.colwise().sum());
      }
      if (needs(x)) {
        Mat dxhat = g;
        dxhat.array().rowwise() *= value(gain).row(0).array();
        Mat dx(g.rows(), g.cols());
        for (Eigen::Index i = 0; i < g.rows(); ++i) {
          const double mean_d = dxhat.row(i).mean();
          const double mean_dx = (dxhat.row(i).array() * xhat.row(i).array()).mean();
          dx.row(i) = inv(i) * (dxhat.row(i).array() - mean_d - xhat.row(i).array() * mean_dx);
        }
        accumulate(x, dx);
      }
    });
}

Var Tape::softmax_rows(Var a)
{
  const Mat & av = value(a);
  Mat out(av.rows(), av.cols());
  for (Eigen::Index i = 0; i < av.rows(); ++i) {
    const double mx = av.row(i).maxCoeff();
    out.row(i) = (av.row(i).array() - mx).exp();
    out.row(i) /= out.row(i).sum();
  }
  return push(std::move(out), needs(a), [this, a](int self) {
    const Mat & y = nodes_[static_cast<std::size_t>(self)].value;
    const Mat & g = grad(self);
    Mat dx(y.rows(), y.cols());
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      const double dot = g.row(i).dot(y.row(i));
      dx.row(i) = y.row(i).array() * (g.row(i).array() - dot);
    }
    accumulate(a, dx);
  });
}

Var Tape::slice_cols(Var a, int begin, int count)
{
  const Mat & av = value(a);
  if (begin < 0 || count < 0 || begin + count > av.cols()) {
    throw ValidationError("slice_cols: range out of bounds");
  }
  const Eigen::Index rows = av.rows();
  const Eigen::Index cols = av.cols();
  return push(av.middleCols(begin, count), needs(a), [this, a, begin, count, rows, cols](int self) {
    Mat g = Mat::Zero(rows, cols);
    g.middleCols(begin, count) = grad(self);
    accumulate(a, g);
  });
}

Var Tape::concat_cols(std::span<const Var> parts)
{
  if (parts.empty()) {
    throw ValidationError("concat_cols: no inputs");
  }
  const Eigen::Index rows = value(parts[0]).rows();
  Eigen::Index cols = 0;
  bool req = false;
  for (const auto p : parts) {
    if (value(p).rows() != rows) {
      throw ValidationError("concat_cols: row mismatch");
    }
    cols += value(p).cols();
    req = req || needs(p);
  }
  Mat out(rows, cols);
  Eigen::Index at = 0;
  for (const auto p : parts) {
    out.middleCols(at, value(p).cols()) = value(p);
    at += value(p).cols();
  }
  std::vector<Var> ps(parts.begin(), parts.end());
  return push(std::move(out), req, [this, ps = std::move(ps)](int self) {
    Eigen::Index at = 0;
    for (const auto p : ps) {
      const auto c = value(p).cols();
      if (needs(p)) {
        accumulate(p, grad(self).middleCols(at, c));
      }
      at += c;
    }
  });
}

Var Tape::slice_rows(Var a, int begin, int count)
{
  const Mat & av = value(a);
  if (begin < 0 || count < 0 || begin + count > av.rows()) {
    throw ValidationError("slice_rows: range out of bounds");
  }
  const Eigen::Index rows = av.rows();
  const Eigen::Index cols = av.cols();
  return push(av.middleRows(begin, count), needs(a), [this, a, begin, count, rows, cols](int self) {
    Mat g = Mat::Zero(rows, cols);
    g.middleRows(begin, count) = grad(self);
    accumulate(a, g);
  });
}

Var Tape::concat_rows(std::span<const Var> parts)
{
  if (parts.empty()) {
    throw ValidationError("concat_rows: no inputs");
  }
  const Eigen::Index cols = value(parts[0]).cols();
  Eigen::Index rows = 0;
  bool req = false;
  for (const auto p : parts) {
    if (value(p).cols() != cols) {
      throw ValidationError("concat_rows: column mismatch");
    }
    rows += value(p).rows();
    req = req || needs(p);
  }
  Mat out(rows, cols);
  Eigen::Index at = 0;
  for (const auto p : parts) {
    out.middleRows(at, value(p).rows()) = value(p);
    at += value(p).rows();
  }
  std::vector<Var> ps(parts.begin(), parts.end());
  return push(std::move(out), req, [this, ps = std::move(ps)](int self) {
    Eigen::Index at = 0;
    for (const auto p : ps) {
      const auto r = value(p).rows();
      if (needs(p)) {
        accumulate(p, grad(self).middleRows(at, r));
      }
      at += r;
    }
  });
}

Var Tape::mean_rows(Var a)
{
  const Mat & av = value(a);
  const Eigen::Index rows = av.rows();
  return push(av.colwise().mean(), needs(a), [this, a, rows](int self) {
    Mat g = grad(self).replicate(rows, 1) / static_cast<double>(rows);
    accumulate(a, g);
  });
}

Var Tape::mse(Var a, const Mat & target)
{
  const Mat & av = value(a);
  require_same_shape(av, target, "mse");
  Mat diff = av - target;
  const double n = static_cast<double>(diff.size());
  Mat out(1, 1);
  out(0, 0) = diff.squaredNorm() / n;
  return push(std::move(out), needs(a), [this, a, diff = std::move(diff), n](int self) {
    accumulate(a, (2.0 * grad(self)(0, 0) / n) * diff);
  });
}

void Tape::backward(Var loss)
{
  if (!record_) {
    throw ValidationError("backward() on a tape built without recording");
  }
  const Mat & lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ValidationError("backward() needs a scalar loss");
  }
  grads_.assign(nodes_.size(), Mat());
  if (!needs(loss)) {
    return;
  }
  grads_[static_cast<std::size_t>(loss.id)] = Mat::Ones(1, 1);
  for (int i = loss.id; i >= 0; --i) {
    auto & n = nodes_[static_cast<std::size_t>(i)];
    if (!n.requires_grad || grads_[static_cast<std::size_t>(i)].size() == 0) {
      continue;
    }
    if (n.back) {
      n.back(i);
    }
    if (n.grad_sink != nullptr) {
      *n.grad_sink += grads_[static_cast<std::size_t>(i)];
    }
  }
  grads_.clear();
}

}  // namespace intdiff::autodiff
