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

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "simdrl/nn/tensor.hpp"

namespace simdrl::nn {

/// Intermediates a module keeps between forward and backward.
struct ForwardCache {
  std::vector<Tensor> tensors;
  std::vector<Index> indices;
  std::vector<ForwardCache> children;
};

/// A differentiable map over batched tensors. Modules hold no parameter
/// values, only indices into the owning network's ParameterSet, so a network
/// and its copies share the module graph.
class Module {
 public:
  virtual ~Module() = default;

  virtual std::string kind() const = 0;
  /// Per-sample output shape for a per-sample input shape.
  virtual Tensor::Shape output_shape(const Tensor::Shape& input) const = 0;
  virtual Tensor forward(const ParameterSet& params, const Tensor& x, ForwardCache& cache) const = 0;
  /// Returns d loss / d x and accumulates parameter gradients into `grads`.
  virtual Tensor backward(const ParameterSet& params, const ForwardCache& cache, const Tensor& dy,
                          ParameterSet& grads) const = 0;
};

using ModulePtr = std::shared_ptr<const Module>;

/// y = W x + b with W stored column-major as out x in.
class Dense final : public Module {
 public:
  Dense(Index in, Index out, std::size_t weight, std::size_t bias)
      : in_(in), out_(out), weight_(weight), bias_(bias) {}
  std::string kind() const override { return "dense"; }
  Tensor::Shape output_shape(const Tensor::Shape& input) const override;
  Tensor forward(const ParameterSet& params, const Tensor& x, ForwardCache& cache) const override;
  Tensor backward(const ParameterSet& params, const ForwardCache& cache, const Tensor& dy,
                  ParameterSet& grads) const override;

 private:
  Index in_, out_;
  std::size_t weight_, bias_;
};

/// Stride-1 convolution with zero "same" padding over [C, H, W] maps and an
/// odd square kernel. The weight is stored column-major as
/// out_channels x (in_channels * k * k), inner index (c, ky, kx).
class Conv2d final : public Module {
 public:
  Conv2d(Index in_channels, Index out_channels, Index kernel, std::size_t weight, std::size_t bias);
  std::string kind() const override { return "conv2d"; }
  Tensor::Shape output_shape(const Tensor::Shape& input) const override;
  Tensor forward(const ParameterSet& params, const Tensor& x, ForwardCache& cache) const override;
  Tensor backward(const ParameterSet& params, const ForwardCache& cache, const Tensor& dy,
                  ParameterSet& grads) const override;

 private:
  Index in_channels_, out_channels_, kernel_, pad_;
  std::size_t weight_, bias_;
};

/// 2x2 max pooling with stride 2 (odd trailing rows/columns dropped).
/// Gradient goes to the first maximal element in (row, column) scan order.
class MaxPool2d final : public Module {
 public:
  std::string kind() const override { return "maxpool2d"; }
  Tensor::Shape output_shape(const Tensor::Shape& input) const override;
  Tensor forward(const ParameterSet& params, const Tensor& x, ForwardCache& cache) const override;
  Tensor backward(const ParameterSet& params, const ForwardCache& cache, const Tensor& dy,
                  ParameterSet& grads) const override;
};

/// Per-sample normalisation over features, then scale and shift.
class LayerNorm final : public Module {
 public:
  static constexpr double kEpsilon = 1e-5;
  LayerNorm(Index features, std::size_t scale, std::size_t shift) : features_(features), scale_(scale), shift_(shift) {}
  std::string kind() const override { return "layernorm"; }
  Tensor::Shape output_shape(const Tensor::Shape& input) const override;
  Tensor forward(const ParameterSet& params, const Tensor& x, ForwardCache& cache) const override;
  Tensor backward(const ParameterSet& params, const ForwardCache& cache, const Tensor& dy,
                  ParameterSet& grads) const override;

 private:
  Index features_;
  std::size_t scale_, shift_;
};

class LeakyRelu final : public Module {
 public:
  explicit LeakyRelu(double slope = 0.01) : slope_(slope) {}
  std::string kind() const override { return "leaky_relu"; }
  Tensor::Shape output_shape(const Tensor::Shape& input) const override { return input; }
  Tensor forward(const ParameterSet& params, const Tensor& x, ForwardCache& cache) const override;
  Tensor backward(const ParameterSet& params, const ForwardCache& cache, const Tensor& dy,
                  ParameterSet& grads) const override;
  double slope() const { return slope_; }

 private:
  double slope_;
};

class Tanh final : public Module {
 public:
  std::string kind() const override { return "tanh"; }
  Tensor::Shape output_shape(const Tensor::Shape& input) const override { return input; }
  Tensor forward(const ParameterSet& params, const Tensor& x, ForwardCache& cache) const override;
  Tensor backward(const ParameterSet& params, const ForwardCache& cache, const Tensor& dy,
                  ParameterSet& grads) const override;
};

/// Zero-pads a length-n vector to side^2 and views it as a 1 x side x side
/// map, side = ceil(sqrt(n)).
class SquareImage final : public Module {
 public:
  explicit SquareImage(Index length);
  static Index side_for(Index length);
  std::string kind() const override { return "square_image"; }
  Tensor::Shape output_shape(const Tensor::Shape& input) const override;
  Tensor forward(const ParameterSet& params, const Tensor& x, ForwardCache& cache) const override;
  Tensor backward(const ParameterSet& params, const ForwardCache& cache, const Tensor& dy,
                  ParameterSet& grads) const override;

 private:
  Index length_, side_;
};

class Flatten final : public Module {
 public:
  std::string kind() const override { return "flatten"; }
  Tensor::Shape output_shape(const Tensor::Shape& input) const override;
  Tensor forward(const ParameterSet& params, const Tensor& x, ForwardCache& cache) const override;
  Tensor backward(const ParameterSet& params, const ForwardCache& cache, const Tensor& dy,
                  ParameterSet& grads) const override;
};

/// act(conv3x3(act(conv3x3(x))) + conv1x1(x)).
class ResidualBlock final : public Module {
 public:
  ResidualBlock(Conv2d first, Conv2d second, Conv2d shortcut, double slope)
      : first_(std::move(first)), second_(std::move(second)), shortcut_(std::move(shortcut)), act_(slope) {}
  std::string kind() const override { return "residual_block"; }
  Tensor::Shape output_shape(const Tensor::Shape& input) const override;
  Tensor forward(const ParameterSet& params, const Tensor& x, ForwardCache& cache) const override;
  Tensor backward(const ParameterSet& params, const ForwardCache& cache, const Tensor& dy,
                  ParameterSet& grads) const override;

 private:
  Conv2d first_, second_, shortcut_;
  LeakyRelu act_;
};

}  // namespace simdrl::nn
