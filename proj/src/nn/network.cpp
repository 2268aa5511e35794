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

#include "simdrl/nn/network.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

namespace simdrl::nn {

namespace {

std::uint64_t next_network_id() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

}  // namespace

Network::Network(std::string name, Tensor::Shape input_shape, std::vector<ModulePtr> modules, ParameterSet params)
    : name_(std::move(name)),
      input_shape_(std::move(input_shape)),
      modules_(std::move(modules)),
      params_(std::move(params)),
      id_(next_network_id()) {
  output_shape_ = input_shape_;
  for (const auto& m : modules_) output_shape_ = m->output_shape(output_shape_);
}

Network::Network(const Network& other)
    : name_(other.name_),
      input_shape_(other.input_shape_),
      output_shape_(other.output_shape_),
      modules_(other.modules_),
      params_(other.params_),
      id_(next_network_id()) {}

Network& Network::operator=(const Network& other) {
  if (this != &other) {
    name_ = other.name_;
    input_shape_ = other.input_shape_;
    output_shape_ = other.output_shape_;
    modules_ = other.modules_;
    params_ = other.params_;
    id_ = next_network_id();
    generation_ = 0;
  }
  return *this;
}

ForwardResult forward(const Network& net, const Tensor& input) {
  if (input.rank() < 2) throw std::invalid_argument("forward: input needs a batch dimension");
  const Index batch = input.dim(0);
  if (input.size() != batch * net.input_size()) {
    throw std::invalid_argument("forward(" + net.name() + "): input " + shape_string(input.shape()) +
                                " does not match " + shape_string(net.input_shape()));
  }
  Tensor::Shape shape{batch};
  shape.insert(shape.end(), net.input_shape().begin(), net.input_shape().end());

  ForwardResult result;
  result.cache.network_id = net.id();
  result.cache.generation = net.generation();
  result.cache.modules.resize(net.modules().size());
  Tensor x = input.reshaped(shape);
  for (std::size_t i = 0; i < net.modules().size(); ++i) {
    x = net.modules()[i]->forward(net.parameters(), x, result.cache.modules[i]);
  }
  result.output = std::move(x);
  return result;
}

Tensor predict(const Network& net, const Tensor& input) { return forward(net, input).output; }

BackwardResult backward(const Network& net, const NetworkCache& cache, const Tensor& upstream) {
  if (cache.network_id != net.id() || cache.generation != net.generation() ||
      cache.modules.size() != net.modules().size()) {
    throw std::logic_error("backward(" + net.name() + "): stale or foreign forward cache");
  }
  BackwardResult result;
  result.param_grads = net.parameters().zeros_like();
  Tensor g = upstream;
  for (std::size_t i = net.modules().size(); i-- > 0;) {
    g = net.modules()[i]->backward(net.parameters(), cache.modules[i], g, result.param_grads);
  }
  result.input_grad = std::move(g);
  return result;
}

LossResult mse_loss(const Tensor& pred, const Tensor& target) {
  if (pred.shape() != target.shape()) {
    throw std::invalid_argument("mse_loss: shapes " + shape_string(pred.shape()) + " and " +
                                shape_string(target.shape()) + " differ");
  }
  const Eigen::VectorXd diff = pred.values() - target.values();
  const double count = static_cast<double>(diff.size());
  LossResult result;
  result.loss = diff.squaredNorm() / count;
  result.grad = Tensor(pred.shape(), 2.0 * diff / count);
  return result;
}

// NetworkBuilder -------------------------------------------------------------

NetworkBuilder::NetworkBuilder(std::string name, Tensor::Shape input_shape, Rng& rng)
    : name_(std::move(name)), input_shape_(input_shape), shape_(std::move(input_shape)), rng_(rng) {}

std::size_t NetworkBuilder::add_uniform(const std::string& name, Tensor::Shape shape, Index fan_in) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(std::move(shape));
  for (Index i = 0; i < t.size(); ++i) t[i] = dist(rng_);
  return params_.add(name, std::move(t));
}

void NetworkBuilder::push(ModulePtr module) {
  shape_ = module->output_shape(shape_);
  modules_.push_back(std::move(module));
  ++counter_;
}

NetworkBuilder& NetworkBuilder::dense(Index out) {
  if (shape_.size() != 1) throw std::invalid_argument("dense needs a flat input; call flatten() first");
  const Index in = shape_[0];
  const std::string prefix = "fc" + std::to_string(counter_);
  const auto w = add_uniform(prefix + ".weight", {out, in}, in);
  const auto b = add_uniform(prefix + ".bias", {out}, in);
  push(std::make_shared<Dense>(in, out, w, b));
  return *this;
}

Conv2d NetworkBuilder::make_conv(const std::string& prefix, Index in_channels, Index out_channels, Index kernel) {
  const Index fan_in = in_channels * kernel * kernel;
  const auto w = add_uniform(prefix + ".weight", {out_channels, in_channels, kernel, kernel}, fan_in);
  const auto b = add_uniform(prefix + ".bias", {out_channels}, fan_in);
  return Conv2d(in_channels, out_channels, kernel, w, b);
}

NetworkBuilder& NetworkBuilder::conv(Index out_channels, Index kernel) {
  if (shape_.size() != 3) throw std::invalid_argument("conv needs a [C, H, W] input");
  push(std::make_shared<Conv2d>(make_conv("conv" + std::to_string(counter_), shape_[0], out_channels, kernel)));
  return *this;
}

NetworkBuilder& NetworkBuilder::residual_block(Index out_channels, double slope) {
  if (shape_.size() != 3) throw std::invalid_argument("residual_block needs a [C, H, W] input");
  const std::string prefix = "res" + std::to_string(counter_);
  const Index in = shape_[0];
  Conv2d first = make_conv(prefix + ".conv1", in, out_channels, 3);
  Conv2d second = make_conv(prefix + ".conv2", out_channels, out_channels, 3);
  Conv2d shortcut = make_conv(prefix + ".shortcut", in, out_channels, 1);
  push(std::make_shared<ResidualBlock>(std::move(first), std::move(second), std::move(shortcut), slope));
  return *this;
}

NetworkBuilder& NetworkBuilder::max_pool() {
  push(std::make_shared<MaxPool2d>());
  return *this;
}

NetworkBuilder& NetworkBuilder::layer_norm() {
  if (shape_.size() != 1) throw std::invalid_argument("layer_norm needs a flat input");
  const Index features = shape_[0];
  const std::string prefix = "ln" + std::to_string(counter_);
  Tensor scale({features});
  scale.values().setOnes();
  const auto s = params_.add(prefix + ".scale", std::move(scale));
  const auto b = params_.add(prefix + ".shift", Tensor({features}));
  push(std::make_shared<LayerNorm>(features, s, b));
  return *this;
}

NetworkBuilder& NetworkBuilder::leaky_relu(double slope) {
  push(std::make_shared<LeakyRelu>(slope));
  return *this;
}

NetworkBuilder& NetworkBuilder::tanh() {
  push(std::make_shared<Tanh>());
  return *this;
}

NetworkBuilder& NetworkBuilder::square_image() {
  if (shape_.size() != 1) throw std::invalid_argument("square_image needs a flat input");
  push(std::make_shared<SquareImage>(shape_[0]));
  return *this;
}

NetworkBuilder& NetworkBuilder::flatten() {
  push(std::make_shared<Flatten>());
  return *this;
}

Network NetworkBuilder::build() const { return Network(name_, input_shape_, modules_, params_); }

Network build_actor(const ActorSpec& spec, Rng& rng) {
  NetworkBuilder b("actor", {spec.state_size}, rng);
  b.square_image()
      .residual_block(spec.conv_channels, spec.slope)
      .residual_block(spec.conv_channels, spec.slope)
      .max_pool()
      .flatten()
      .dense(spec.fc_width)
      .leaky_relu(spec.slope)
      .dense(spec.action_size)
      .tanh();
  return b.build();
}

Network build_critic(const CriticSpec& spec, Rng& rng) {
  NetworkBuilder b("critic", {spec.state_size + spec.action_size}, rng);
  b.dense(spec.fc_width)
      .layer_norm()
      .leaky_relu(spec.slope)
      .dense(spec.fc_width)
      .layer_norm()
      .leaky_relu(spec.slope)
      .dense(1);
  return b.build();
}

}  // namespace simdrl::nn
