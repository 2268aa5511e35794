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

#include <cstdint>
#include <string>
#include <vector>

#include "simdrl/nn/layers.hpp"
#include "simdrl/nn/tensor.hpp"
#include "simdrl/random.hpp"

namespace simdrl::nn {

/// A feed-forward chain of modules plus the parameters it reads.
///
/// Copies share the (immutable) module graph and own their parameters. Each
/// instance carries an identity and a generation counter; any mutable access
/// to the parameters bumps the generation so caches from an earlier forward
/// are rejected by backward.
class Network {
 public:
  Network(std::string name, Tensor::Shape input_shape, std::vector<ModulePtr> modules, ParameterSet params);
  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  const std::string& name() const { return name_; }
  const Tensor::Shape& input_shape() const { return input_shape_; }
  const Tensor::Shape& output_shape() const { return output_shape_; }
  Index input_size() const { return Tensor::count(input_shape_); }
  Index output_size() const { return Tensor::count(output_shape_); }
  const std::vector<ModulePtr>& modules() const { return modules_; }

  const ParameterSet& parameters() const { return params_; }
  /// Invalidates every outstanding cache of this network.
  ParameterSet& mutable_parameters() {
    ++generation_;
    return params_;
  }

  std::uint64_t id() const { return id_; }
  std::uint64_t generation() const { return generation_; }

 private:
  std::string name_;
  Tensor::Shape input_shape_;
  Tensor::Shape output_shape_;
  std::vector<ModulePtr> modules_;
  ParameterSet params_;
  std::uint64_t id_ = 0;
  std::uint64_t generation_ = 0;
};

struct NetworkCache {
  std::uint64_t network_id = 0;
  std::uint64_t generation = 0;
  std::vector<ForwardCache> modules;
};

struct ForwardResult {
  Tensor output;
  NetworkCache cache;
};

struct BackwardResult {
  ParameterSet param_grads;
  Tensor input_grad;
};

/// `input` is [B, ...input_shape] or [B, input_size]; the latter is viewed in
/// the declared input shape. Throws std::invalid_argument on a mismatch.
ForwardResult forward(const Network& net, const Tensor& input);

/// Forward without keeping the cache.
Tensor predict(const Network& net, const Tensor& input);

/// Gradients of sum(upstream * output) with respect to the parameters and
/// the input. Throws std::logic_error if `cache` did not come from the
/// current parameters of `net`.
BackwardResult backward(const Network& net, const NetworkCache& cache, const Tensor& upstream);

struct LossResult {
  double loss = 0.0;
  Tensor grad;  // d loss / d pred
};

/// Mean of squared differences over all elements.
LossResult mse_loss(const Tensor& pred, const Tensor& target);

/// Assembles a network layer by layer, tracking the running shape and
/// initialising parameters uniformly in +-1/sqrt(fan_in) (layer norm: scale
/// 1, shift 0).
class NetworkBuilder {
 public:
  NetworkBuilder(std::string name, Tensor::Shape input_shape, Rng& rng);

  NetworkBuilder& dense(Index out);
  NetworkBuilder& conv(Index out_channels, Index kernel);
  NetworkBuilder& residual_block(Index out_channels, double slope);
  NetworkBuilder& max_pool();
  NetworkBuilder& layer_norm();
  NetworkBuilder& leaky_relu(double slope);
  NetworkBuilder& tanh();
  NetworkBuilder& square_image();
  NetworkBuilder& flatten();

  const Tensor::Shape& shape() const { return shape_; }
  Network build() const;

 private:
  std::size_t add_uniform(const std::string& name, Tensor::Shape shape, Index fan_in);
  Conv2d make_conv(const std::string& prefix, Index in_channels, Index out_channels, Index kernel);
  void push(ModulePtr module);

  std::string name_;
  Tensor::Shape input_shape_;
  Tensor::Shape shape_;
  Rng& rng_;
  std::vector<ModulePtr> modules_;
  ParameterSet params_;
  int counter_ = 0;
};

struct ActorSpec {
  Index state_size = 0;
  Index action_size = 0;
  Index conv_channels = 16;
  Index fc_width = 256;
  double slope = 0.01;
};

struct CriticSpec {
  Index state_size = 0;
  Index action_size = 0;
  Index fc_width = 256;
  double slope = 0.01;
};

/// State vector -> square single-channel map -> 2 residual blocks -> 2x2
/// max pool -> FC -> LeakyReLU -> FC -> tanh.
Network build_actor(const ActorSpec& spec, Rng& rng);

/// [state, action] -> FC -> LN -> LeakyReLU -> FC -> LN -> LeakyReLU -> FC
/// -> scalar Q.
Network build_critic(const CriticSpec& spec, Rng& rng);

}  // namespace simdrl::nn
