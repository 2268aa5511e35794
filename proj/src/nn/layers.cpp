// Copyright 2026 The simdrl Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "simdrl/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace simdrl::nn {

namespace {

void expect_rank(const Tensor& x, Index rank, const char* who) {
  if (x.rank() != rank) {
    throw std::invalid_argument(std::string(who) + ": expected rank " + std::to_string(rank) + ", got " +
                                shape_string(x.shape()));
  }
}

}  // namespace

// Dense ----------------------------------------------------------------------

Tensor::Shape Dense::output_shape(const Tensor::Shape& input) const {
  if (input.size() != 1 || input[0] != in_) throw std::invalid_argument("dense: input must be [" + std::to_string(in_) + "]");
  return {out_};
}

Tensor Dense::forward(const ParameterSet& params, const Tensor& x, ForwardCache& cache) const {
  expect_rank(x, 2, "dense");
  if (x.dim(1) != in_) throw std::invalid_argument("dense: input width " + std::to_string(x.dim(1)));
  const Index batch = x.dim(0);
  // Row-major [out, in] storage is the column-major (in x out) matrix W^T.
  const auto wt = params[weight_].matrix(in_, out_);
  const auto b = params[bias_].matrix(out_, 1);
  Tensor y({batch, out_});
  y.matrix(out_, batch).noalias() = wt.transpose() * x.matrix(in_, batch);
  y.matrix(out_, batch).colwise() += b.col(0);
  cache.tensors = {x};
  return y;
}

Tensor Dense::backward(const ParameterSet& params, const ForwardCache& cache, const Tensor& dy,
                       ParameterSet& grads) const {
  const Tensor& x = cache.tensors.at(0);
  const Index batch = x.dim(0);
  const auto wt = params[weight_].matrix(in_, out_);
  const auto g = dy.matrix(out_, batch);
  grads[weight_].matrix(in_, out_).noalias() += x.matrix(in_, batch) * g.transpose();
  grads[bias_].matrix(out_, 1) += g.rowwise().sum();
  Tensor dx({batch, in_});
  dx.matrix(in_, batch).noalias() = wt * g;
  return dx;
}

// Conv2d ---------------------------------------------------------------------

Conv2d::Conv2d(Index in_channels, Index out_channels, Index kernel, std::size_t weight, std::size_t bias)
    : in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_(kernel),
      pad_((kernel - 1) / 2),
      weight_(weight),
      bias_(bias) {
  if (kernel % 2 == 0) throw std::invalid_argument("conv2d: kernel size must be odd");
}

Tensor::Shape Conv2d::output_shape(const Tensor::Shape& input) const {
  if (input.size() != 3 || input[0] != in_channels_) {
    throw std::invalid_argument("conv2d: input must be [" + std::to_string(in_channels_) + ", H, W]");
  }
  return {out_channels_, input[1], input[2]};
}

namespace {

/// Receptive fields of one [C, H, W] sample as a pixels x taps column-major
/// matrix, tap index (c, ky, kx), zero outside the map.
void im2col(const double* in, Index channels, Index height, Index width, Index kernel, Index pad,
            Eigen::MatrixXd& cols) {
  for (Index ch = 0; ch < channels; ++ch) {
    for (Index ky = 0; ky < kernel; ++ky) {
      for (Index kx = 0; kx < kernel; ++kx) {
        double* column = cols.col((ch * kernel + ky) * kernel + kx).data();
        const Index shift = kx - pad;
        const Index lo = std::max<Index>(0, -shift);
        const Index hi = std::min<Index>(width, width - shift);
        for (Index py = 0; py < height; ++py) {
          double* dst = column + py * width;
          const Index iy = py + ky - pad;
          if (iy < 0 || iy >= height || lo >= hi) {
            std::fill(dst, dst + width, 0.0);
            continue;
          }
          const double* row = in + (ch * height + iy) * width;
          std::fill(dst, dst + lo, 0.0);
          std::copy(row + lo + shift, row + hi + shift, dst + lo);
          std::fill(dst + hi, dst + width, 0.0);
        }
      }
    }
  }
}

/// Adjoint of im2col: accumulates column gradients back onto the map.
void col2im(const Eigen::MatrixXd& dcols, Index channels, Index height, Index width, Index kernel, Index pad,
            double* out) {
  for (Index ch = 0; ch < channels; ++ch) {
    for (Index ky = 0; ky < kernel; ++ky) {
      for (Index kx = 0; kx < kernel; ++kx) {
        const double* column = dcols.col((ch * kernel + ky) * kernel + kx).data();
        const Index shift = kx - pad;
        const Index lo = std::max<Index>(0, -shift);
        const Index hi = std::min<Index>(width, width - shift);
        for (Index py = 0; py < height; ++py) {
          const Index iy = py + ky - pad;
          if (iy < 0 || iy >= height) continue;
          double* row = out + (ch * height + iy) * width;
          const double* src = column + py * width;
          for (Index px = lo; px < hi; ++px) row[px + shift] += src[px];
        }
      }
    }
  }
}

}  // namespace

Tensor Conv2d::forward(const ParameterSet& params, const Tensor& x, ForwardCache& cache) const {
  expect_rank(x, 4, "conv2d");
  if (x.dim(1) != in_channels_) throw std::invalid_argument("conv2d: channel mismatch");
  const Index batch = x.dim(0), height = x.dim(2), width = x.dim(3);
  const Index pixels = height * width;
  const Index taps = in_channels_ * kernel_ * kernel_;
  // Row-major [cout, cin, k, k] storage is the column-major (taps x cout) matrix W^T.
  const auto wt = params[weight_].matrix(taps, out_channels_);
  const auto bias = params[bias_].matrix(out_channels_, 1);

  Tensor y({batch, out_channels_, height, width});
  Eigen::MatrixXd cols(pixels, taps);
  for (Index b = 0; b < batch; ++b) {
    im2col(x.data() + b * in_channels_ * pixels, in_channels_, height, width, kernel_, pad_, cols);
    Eigen::Map<Eigen::MatrixXd> out(y.data() + b * out_channels_ * pixels, pixels, out_channels_);
    out.noalias() = cols * wt;
    out.rowwise() += bias.col(0).transpose();
  }
  cache.tensors = {x};
  return y;
}

Tensor Conv2d::backward(const ParameterSet& params, const ForwardCache& cache, const Tensor& dy,
                        ParameterSet& grads) const {
  const Tensor& x = cache.tensors.at(0);
  const Index batch = x.dim(0), height = x.dim(2), width = x.dim(3);
  const Index pixels = height * width;
  const Index taps = in_channels_ * kernel_ * kernel_;
  const auto wt = params[weight_].matrix(taps, out_channels_);
  auto dwt = grads[weight_].matrix(taps, out_channels_);
  auto db = grads[bias_].matrix(out_channels_, 1);

  Tensor dx({batch, in_channels_, height, width});
  Eigen::MatrixXd cols(pixels, taps);
  Eigen::MatrixXd dcols(pixels, taps);
  for (Index b = 0; b < batch; ++b) {
    Eigen::Map<const Eigen::MatrixXd> g(dy.data() + b * out_channels_ * pixels, pixels, out_channels_);
    im2col(x.data() + b * in_channels_ * pixels, in_channels_, height, width, kernel_, pad_, cols);
    dwt.noalias() += cols.transpose() * g;
    db.col(0) += g.colwise().sum().transpose();
    dcols.noalias() = g * wt.transpose();
    col2im(dcols, in_channels_, height, width, kernel_, pad_, dx.data() + b * in_channels_ * pixels);
  }
  return dx;
}

// MaxPool2d ------------------------------------------------------------------

Tensor::Shape MaxPool2d::output_shape(const Tensor::Shape& input) const {
  if (input.size() != 3 || input[1] < 2 || input[2] < 2) {
    throw std::invalid_argument("maxpool2d: input must be [C, H>=2, W>=2]");
  }
  return {input[0], input[1] / 2, input[2] / 2};
}

Tensor MaxPool2d::forward(const ParameterSet&, const Tensor& x, ForwardCache& cache) const {
  expect_rank(x, 4, "maxpool2d");
  const Index batch = x.dim(0), channels = x.dim(1), height = x.dim(2), width = x.dim(3);
  const Index oh = height / 2, ow = width / 2;
  Tensor y({batch, channels, oh, ow});
  cache.indices.assign(static_cast<std::size_t>(y.size()), 0);
  cache.indices.push_back(height);
  cache.indices.push_back(width);
  Index o = 0;
  for (Index plane = 0; plane < batch * channels; ++plane) {
    const Index base = plane * height * width;
    for (Index py = 0; py < oh; ++py) {
      for (Index px = 0; px < ow; ++px, ++o) {
        Index best = base + (2 * py) * width + 2 * px;
        for (Index dy = 0; dy < 2; ++dy) {
          for (Index dx = 0; dx < 2; ++dx) {
            const Index idx = base + (2 * py + dy) * width + 2 * px + dx;
            if (x[idx] > x[best]) best = idx;
          }
        }
        y[o] = x[best];
        cache.indices[static_cast<std::size_t>(o)] = best;
      }
    }
  }
  cache.tensors = {};
  cache.indices.push_back(channels);
  cache.indices.push_back(batch);
  return y;
}

Tensor MaxPool2d::backward(const ParameterSet&, const ForwardCache& cache, const Tensor& dy, ParameterSet&) const {
  const std::size_t n = cache.indices.size();
  const Index batch = cache.indices[n - 1], channels = cache.indices[n - 2];
  const Index width = cache.indices[n - 3], height = cache.indices[n - 4];
  Tensor dx({batch, channels, height, width});
  for (Index o = 0; o < dy.size(); ++o) dx[cache.indices[static_cast<std::size_t>(o)]] += dy[o];
  return dx;
}

// LayerNorm ------------------------------------------------------------------

Tensor::Shape LayerNorm::output_shape(const Tensor::Shape& input) const {
  if (input.size() != 1 || input[0] != features_) throw std::invalid_argument("layernorm: feature mismatch");
  return input;
}

Tensor LayerNorm::forward(const ParameterSet& params, const Tensor& x, ForwardCache& cache) const {
  expect_rank(x, 2, "layernorm");
  if (x.dim(1) != features_) throw std::invalid_argument("layernorm: feature mismatch");
  const Index batch = x.dim(0);
  const auto in = x.matrix(features_, batch);
  const auto scale = params[scale_].matrix(features_, 1).col(0);
  const auto shift = params[shift_].matrix(features_, 1).col(0);

  Tensor normalised({batch, features_});
  Tensor inv_std({batch});
  Tensor y({batch, features_});
  auto xhat = normalised.matrix(features_, batch);
  auto out = y.matrix(features_, batch);
  for (Index b = 0; b < batch; ++b) {
    // Second pass corrects the rounding of the first, so a constant input
    // centres to exactly zero.
    double mean = in.col(b).mean();
    mean += (in.col(b).array() - mean).mean();
    const double var = (in.col(b).array() - mean).square().mean();
    inv_std[b] = 1.0 / std::sqrt(var + kEpsilon);
    xhat.col(b) = (in.col(b).array() - mean) * inv_std[b];
    out.col(b) = xhat.col(b).cwiseProduct(scale) + shift;
  }
  cache.tensors = {std::move(normalised), std::move(inv_std)};
  return y;
}

Tensor LayerNorm::backward(const ParameterSet& params, const ForwardCache& cache, const Tensor& dy,
                           ParameterSet& grads) const {
  const Tensor& normalised = cache.tensors.at(0);
  const Tensor& inv_std = cache.tensors.at(1);
  const Index batch = normalised.dim(0);
  const auto xhat = normalised.matrix(features_, batch);
  const auto g = dy.matrix(features_, batch);
  const auto scale = params[scale_].matrix(features_, 1).col(0);
  grads[scale_].matrix(features_, 1).col(0) += g.cwiseProduct(xhat).rowwise().sum();
  grads[shift_].matrix(features_, 1).col(0) += g.rowwise().sum();

  Tensor dx({batch, features_});
  auto out = dx.matrix(features_, batch);
  for (Index b = 0; b < batch; ++b) {
    const Eigen::VectorXd dxhat = g.col(b).cwiseProduct(scale);
    const double mean_d = dxhat.mean();
    const double mean_dx = dxhat.cwiseProduct(xhat.col(b)).mean();
    out.col(b) = inv_std[b] * (dxhat.array() - mean_d - xhat.col(b).array() * mean_dx);
  }
  return dx;
}

// Activations ----------------------------------------------------------------

Tensor LeakyRelu::forward(const ParameterSet&, const Tensor& x, ForwardCache& cache) const {
  Tensor y = x;
  y.values() = x.values().unaryExpr([s = slope_](double v) { return v >= 0.0 ? v : s * v; });
  cache.tensors = {x};
  return y;
}

Tensor LeakyRelu::backward(const ParameterSet&, const ForwardCache& cache, const Tensor& dy, ParameterSet&) const {
  const Tensor& x = cache.tensors.at(0);
  Tensor dx = dy;
  dx.values() = dy.values().binaryExpr(x.values(), [s = slope_](double g, double v) { return v >= 0.0 ? g : s * g; });
  return dx;
}

Tensor Tanh::forward(const ParameterSet&, const Tensor& x, ForwardCache& cache) const {
  Tensor y = x;
  y.values() = x.values().array().tanh();
  cache.tensors = {y};
  return y;
}

Tensor Tanh::backward(const ParameterSet&, const ForwardCache& cache, const Tensor& dy, ParameterSet&) const {
  const Tensor& y = cache.tensors.at(0);
  Tensor dx = dy;
  dx.values() = dy.values().array() * (1.0 - y.values().array().square());
  return dx;
}

// Reshapes -------------------------------------------------------------------

SquareImage::SquareImage(Index length) : length_(length), side_(side_for(length)) {}

Index SquareImage::side_for(Index length) {
  Index side = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(length))));
  while (side * side < length) ++side;
  while (side > 1 && (side - 1) * (side - 1) >= length) --side;
  return side;
}

Tensor::Shape SquareImage::output_shape(const Tensor::Shape& input) const {
  if (input.size() != 1 || input[0] != length_) throw std::invalid_argument("square_image: length mismatch");
  return {1, side_, side_};
}

Tensor SquareImage::forward(const ParameterSet&, const Tensor& x, ForwardCache&) const {
  expect_rank(x, 2, "square_image");
  if (x.dim(1) != length_) throw std::invalid_argument("square_image: length mismatch");
  const Index batch = x.dim(0);
  const Index area = side_ * side_;
  Tensor y({batch, 1, side_, side_});
  y.matrix(area, batch).topRows(length_) = x.matrix(length_, batch);
  return y;
}

Tensor SquareImage::backward(const ParameterSet&, const ForwardCache&, const Tensor& dy, ParameterSet&) const {
  const Index batch = dy.dim(0);
  Tensor dx({batch, length_});
  dx.matrix(length_, batch) = dy.matrix(side_ * side_, batch).topRows(length_);
  return dx;
}

Tensor::Shape Flatten::output_shape(const Tensor::Shape& input) const { return {Tensor::count(input)}; }

Tensor Flatten::forward(const ParameterSet&, const Tensor& x, ForwardCache& cache) const {
  cache.indices = x.shape();
  const Index batch = x.dim(0);
  return x.reshaped({batch, x.size() / batch});
}

Tensor Flatten::backward(const ParameterSet&, const ForwardCache& cache, const Tensor& dy, ParameterSet&) const {
  return dy.reshaped(cache.indices);
}

// ResidualBlock --------------------------------------------------------------

Tensor::Shape ResidualBlock::output_shape(const Tensor::Shape& input) const {
  return second_.output_shape(first_.output_shape(input));
}

Tensor ResidualBlock::forward(const ParameterSet& params, const Tensor& x, ForwardCache& cache) const {
  cache.children.assign(5, {});
  Tensor h = first_.forward(params, x, cache.children[0]);
  h = act_.forward(params, h, cache.children[1]);
  h = second_.forward(params, h, cache.children[2]);
  const Tensor shortcut = shortcut_.forward(params, x, cache.children[3]);
  h.values() += shortcut.values();
  return act_.forward(params, h, cache.children[4]);
}

Tensor ResidualBlock::backward(const ParameterSet& params, const ForwardCache& cache, const Tensor& dy,
                               ParameterSet& grads) const {
  const Tensor dsum = act_.backward(params, cache.children.at(4), dy, grads);
  Tensor dx = shortcut_.backward(params, cache.children.at(3), dsum, grads);
  Tensor dh = second_.backward(params, cache.children.at(2), dsum, grads);
  dh = act_.backward(params, cache.children.at(1), dh, grads);
  dx.values() += first_.backward(params, cache.children.at(0), dh, grads).values();
  return dx;
}

}  // namespace simdrl::nn
