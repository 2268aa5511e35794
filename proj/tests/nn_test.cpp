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

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "simdrl/nn/adam.hpp"
#include "simdrl/nn/checkpoint.hpp"
#include "simdrl/nn/network.hpp"
#include "simdrl/random.hpp"
#include "simdrl/validation.hpp"

namespace simdrl::nn {
namespace {

Tensor random_tensor(Rng& rng, Tensor::Shape shape) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Tensor t(std::move(shape));
  for (Index i = 0; i < t.size(); ++i) t[i] = dist(rng);
  return t;
}

ParameterSet random_tensor_like(const ParameterSet& like, Rng& rng) {
  ParameterSet out = like.zeros_like();
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd flat(out.total_size());
  for (auto& v : flat) v = dist(rng);
  out.assign(flat);
  return out;
}

Tensor& param(Network& net, const std::string& name) { return net.mutable_parameters()[*net.parameters().find(name)]; }

TEST(TensorTest, ShapeAndLayout) {
  Tensor t({2, 3}, Eigen::VectorXd::LinSpaced(6, 0, 5));
  EXPECT_EQ(t.size(), 6);
  EXPECT_EQ(t.rank(), 2);
  // Last extent fastest: sample b is column b of the (3 x 2) view.
  EXPECT_EQ(t.matrix(3, 2)(2, 1), 5.0);
  EXPECT_THROW(Tensor({2, 2}, Eigen::VectorXd::Zero(3)), std::invalid_argument);
  EXPECT_THROW(t.reshaped({4, 2}), std::invalid_argument);
  EXPECT_EQ(t.reshaped({6}).values(), t.values());
}

TEST(DenseTest, IdentityWeightsPassInputThrough) {
  Rng rng(1);
  NetworkBuilder b("fc", {4}, rng);
  Network net = b.dense(4).build();
  param(net, "fc0.weight").matrix(4, 4).setIdentity();
  param(net, "fc0.bias").values().setZero();
  const Tensor x = random_tensor(rng, {3, 4});
  EXPECT_EQ(predict(net, x).values(), x.values());
}

TEST(DenseTest, InputGradientIsTransposedWeightProduct) {
  Rng rng(2);
  NetworkBuilder b("fc", {5}, rng);
  const Network net = b.dense(3).build();
  const Tensor x = random_tensor(rng, {2, 5});
  const auto fwd = forward(net, x);
  const Tensor dy = random_tensor(rng, {2, 3});
  const auto grads = backward(net, fwd.cache, dy);
  const Tensor& w = net.parameters()[*net.parameters().find("fc0.weight")];
  for (Index s = 0; s < 2; ++s) {
    for (Index i = 0; i < 5; ++i) {
      double expected = 0.0;
      for (Index o = 0; o < 3; ++o) expected += w[o * 5 + i] * dy[s * 3 + o];
      EXPECT_NEAR(grads.input_grad[s * 5 + i], expected, 1e-15);
    }
  }
}

TEST(LeakyReluTest, Definition) {
  Rng rng(3);
  NetworkBuilder b("act", {4}, rng);
  const Network net = b.leaky_relu(0.01).build();
  const Tensor x({1, 4}, Eigen::Vector4d(2.0, -3.0, 0.0, -0.5));
  EXPECT_EQ(predict(net, x).values(), Eigen::Vector4d(2.0, -0.03, 0.0, -0.005));
}

TEST(LayerNormTest, ConstantInputNormalisesToZero) {
  Rng rng(4);
  NetworkBuilder b("ln", {6}, rng);
  const Network net = b.layer_norm().build();
  const Tensor x({2, 6}, Eigen::VectorXd::Constant(12, 3.7));
  const Tensor y = predict(net, x);
  EXPECT_TRUE(y.all_finite());
  EXPECT_EQ(y.values(), Eigen::VectorXd::Zero(12));
}

TEST(BackwardTest, ZeroUpstreamGivesZeroGradients) {
  Rng rng(5);
  const Network net = build_actor({35, 18, 4, 16, 0.01}, rng);
  const auto fwd = forward(net, random_tensor(rng, {3, 35}));
  const auto grads = backward(net, fwd.cache, Tensor(fwd.output.shape()));
  EXPECT_EQ(grads.param_grads.flatten().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(grads.input_grad.values().cwiseAbs().maxCoeff(), 0.0);
}

TEST(BackwardTest, StaleOrForeignCacheThrows) {
  Rng rng(6);
  NetworkBuilder b("fc", {3}, rng);
  Network net = b.dense(2).build();
  Network other = net;
  const Tensor x = random_tensor(rng, {1, 3});
  const auto fwd = forward(net, x);
  const Tensor dy({1, 2}, Eigen::Vector2d(1.0, 1.0));
  EXPECT_THROW(backward(other, fwd.cache, dy), std::logic_error);
  net.mutable_parameters()[0][0] += 1.0;
  EXPECT_THROW(backward(net, fwd.cache, dy), std::logic_error);
  EXPECT_NO_THROW(backward(net, forward(net, x).cache, dy));
}

TEST(ForwardTest, ShapeMismatchThrows) {
  Rng rng(7);
  NetworkBuilder b("fc", {3}, rng);
  const Network net = b.dense(2).build();
  EXPECT_THROW(forward(net, Tensor({1, 4})), std::invalid_argument);
  EXPECT_THROW(forward(net, Tensor({3})), std::invalid_argument);
}

TEST(ForwardTest, PureAndBitIdentical) {
  Rng rng(8);
  const Network net = build_actor({35, 18, 4, 16, 0.01}, rng);
  const Tensor x = random_tensor(rng, {4, 35});
  const Tensor a = predict(net, x), b = predict(net, x);
  EXPECT_EQ(std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())), 0);
}

TEST(MaxPoolTest, TiesRouteToFirstIndex) {
  Rng rng(9);
  NetworkBuilder b("pool", {1, 2, 4}, rng);
  const Network net = b.max_pool().build();
  Tensor x({1, 1, 2, 4});
  x.values() << 1, 1, 0, 5,  //
      1, 0, 5, 5;
  const auto fwd = forward(net, x);
  EXPECT_EQ(fwd.output.values(), Eigen::Vector2d(1.0, 5.0));
  const auto grads = backward(net, fwd.cache, Tensor({1, 1, 1, 2}, Eigen::Vector2d(2.0, 3.0)));
  Eigen::VectorXd expected(8);
  expected << 2, 0, 0, 3,  //
      0, 0, 0, 0;
  EXPECT_EQ(grads.input_grad.values(), expected);
}

TEST(ResidualBlockTest, ZeroConvWeightsLeaveShortcutPath) {
  Rng rng(10);
  NetworkBuilder rb("res", {2, 4, 4}, rng);
  Network block = rb.residual_block(3, 0.01).build();
  for (const char* name : {"res0.conv1.weight", "res0.conv1.bias", "res0.conv2.weight", "res0.conv2.bias"}) {
    param(block, name).values().setZero();
  }
  NetworkBuilder sb("shortcut", {2, 4, 4}, rng);
  Network path = sb.conv(3, 1).leaky_relu(0.01).build();
  param(path, "conv0.weight") = block.parameters()[*block.parameters().find("res0.shortcut.weight")];
  param(path, "conv0.bias") = block.parameters()[*block.parameters().find("res0.shortcut.bias")];
  const Tensor x = random_tensor(rng, {2, 2, 4, 4});
  EXPECT_EQ(predict(block, x).values(), predict(path, x).values());
}

TEST(MseLossTest, Examples) {
  const Tensor a({1, 1}, Eigen::VectorXd::Constant(1, 3.0));
  const auto zero = mse_loss(a, a);
  EXPECT_EQ(zero.loss, 0.0);
  EXPECT_EQ(zero.grad.values()[0], 0.0);
  const auto two = mse_loss(a, Tensor({1, 1}, Eigen::VectorXd::Constant(1, 1.0)));
  EXPECT_EQ(two.loss, 4.0);
  EXPECT_EQ(two.grad.values()[0], 4.0);
  EXPECT_THROW(mse_loss(a, Tensor({1, 2})), std::invalid_argument);
}

TEST(MseLossTest, MatchesScalarLoop) {
  Rng rng(11);
  const Tensor p = random_tensor(rng, {4, 3}), t = random_tensor(rng, {4, 3});
  const auto result = mse_loss(p, t);
  double loss = 0.0;
  for (Index i = 0; i < 12; ++i) loss += (p[i] - t[i]) * (p[i] - t[i]);
  EXPECT_NEAR(result.loss, loss / 12, 1e-15);
  for (Index i = 0; i < 12; ++i) EXPECT_NEAR(result.grad[i], 2 * (p[i] - t[i]) / 12, 1e-16);
}

TEST(AdamTest, ZeroGradientLeavesParametersUnchanged) {
  Rng rng(12);
  NetworkBuilder b("fc", {3}, rng);
  Network net = b.dense(2).build();
  auto state = AdamState::for_parameters(net.parameters(), 1e-2);
  const Eigen::VectorXd before = net.parameters().flatten();
  adam_step(net.mutable_parameters(), net.parameters().zeros_like(), state);
  EXPECT_EQ(net.parameters().flatten(), before);
  EXPECT_EQ(state.first_moment.flatten().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(state.step, 1);
}

TEST(AdamTest, ZeroGradientDecaysMoments) {
  Rng rng(12);
  NetworkBuilder b("fc", {3}, rng);
  Network net = b.dense(2).build();
  auto state = AdamState::for_parameters(net.parameters(), 1e-2);
  adam_step(net.mutable_parameters(), random_tensor_like(net.parameters(), rng), state);
  const Eigen::VectorXd m = state.first_moment.flatten(), v = state.second_moment.flatten();
  adam_step(net.mutable_parameters(), net.parameters().zeros_like(), state);
  EXPECT_EQ(state.first_moment.flatten(), (0.9 * m).eval());
  EXPECT_EQ(state.second_moment.flatten(), (0.999 * v).eval());
  EXPECT_EQ(state.step, 2);
}

TEST(AdamTest, ConstantGradientStepTendsToLearningRate) {
  ParameterSet params;
  params.add("w", Tensor({3}, Eigen::Vector3d(0.0, 1.0, -1.0)));
  ParameterSet grads;
  grads.add("w", Tensor({3}, Eigen::Vector3d(0.5, -2.0, 1e-3)));
  auto state = AdamState::for_parameters(params, 1e-3);
  Eigen::VectorXd previous = params.flatten();
  for (int t = 0; t < 10000; ++t) {
    previous = params.flatten();
    adam_step(params, grads, state);
  }
  const Eigen::VectorXd step = (params.flatten() - previous).cwiseAbs();
  for (Index i = 0; i < 3; ++i) EXPECT_NEAR(step[i], 1e-3, 1e-3 * 1e-4) << i;
}

TEST(AdamTest, MatchesScalarReference) {
  Rng rng(13);
  ParameterSet params;
  params.add("a", random_tensor(rng, {2, 3}));
  params.add("b", random_tensor(rng, {4}));
  auto state = AdamState::for_parameters(params, 3e-3, 0.8, 0.99, 1e-6);
  Eigen::VectorXd theta = params.flatten();
  std::vector<validation::ScalarAdam> reference(static_cast<std::size_t>(theta.size()));
  for (int t = 0; t < 200; ++t) {
    ParameterSet grads = params.zeros_like();
    Eigen::VectorXd g = Eigen::VectorXd::Random(theta.size());
    if (t % 7 == 0) g.setZero();
    grads.assign(g);
    adam_step(params, grads, state);
    for (Index i = 0; i < theta.size(); ++i) {
      reference[static_cast<std::size_t>(i)].update(theta[i], g[i], 3e-3, 0.8, 0.99, 1e-6);
    }
  }
  EXPECT_LE((params.flatten() - theta).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(AdamTest, LayoutMismatchThrows) {
  ParameterSet a, b;
  a.add("w", Tensor({2}));
  b.add("w", Tensor({3}));
  auto state = AdamState::for_parameters(a, 1e-3);
  EXPECT_THROW(adam_step(a, b, state), std::invalid_argument);
}

TEST(BuilderTest, ActorAndCriticShapes) {
  Rng rng(14);
  // M=2, N=4, L=2: state 2*4*(2+2)+2+1 = 35, action 2*4*2+2 = 18.
  const Network actor = build_actor({35, 18, 4, 16, 0.01}, rng);
  const Network critic = build_critic({35, 18, 16, 0.01}, rng);
  EXPECT_EQ(actor.output_size(), 18);
  EXPECT_EQ(critic.output_size(), 1);
  EXPECT_EQ(critic.input_size(), 53);
  const Tensor a = predict(actor, random_tensor(rng, {5, 35}));
  EXPECT_EQ(a.shape(), (Tensor::Shape{5, 18}));
  EXPECT_LE(a.values().cwiseAbs().maxCoeff(), 1.0);
  EXPECT_EQ(predict(critic, random_tensor(rng, {5, 53})).shape(), (Tensor::Shape{5, 1}));
}

TEST(BuilderTest, SameSeedSameParameters) {
  Rng a(15), b(15);
  const Network x = build_actor({35, 18, 4, 16, 0.01}, a);
  const Network y = build_actor({35, 18, 4, 16, 0.01}, b);
  EXPECT_EQ(x.parameters().flatten(), y.parameters().flatten());
  for (std::size_t i = 0; i < x.parameters().size(); ++i) EXPECT_EQ(x.parameters().name(i), y.parameters().name(i));
}

TEST(BuilderTest, InitialisationBounds) {
  Rng rng(16);
  const Network critic = build_critic({35, 18, 16, 0.01}, rng);
  const auto& p = critic.parameters();
  EXPECT_LE(p[*p.find("fc0.weight")].values().cwiseAbs().maxCoeff(), 1.0 / std::sqrt(53.0));
  EXPECT_EQ(p[*p.find("ln1.scale")].values(), Eigen::VectorXd::Ones(16));
  EXPECT_EQ(p[*p.find("ln1.shift")].values(), Eigen::VectorXd::Zero(16));
}

TEST(GradcheckTest, EveryLayerPasses) {
  validation::GradcheckOptions options;
  options.instances = 3;
  for (const auto& r : validation::run_gradcheck_suite(21, options)) {
    EXPECT_TRUE(r.passed(options.tolerance)) << r.name << " max_rel_error=" << r.max_rel_error;
    EXPECT_GT(r.coordinates, 10 * r.skipped) << r.name;
  }
}

TEST(CheckpointTest, RoundTripIsBitExact) {
  Rng rng(17);
  const Network actor = build_actor({35, 18, 4, 16, 0.01}, rng);
  Checkpoint ck;
  ck.metadata["note"] = "x=1";
  ck.add_parameters("actor.", actor.parameters());
  Tensor special({4});
  special.values() << 0.1, -0.0, std::numeric_limits<double>::denorm_min(), 1e308;
  ck.tensors.push_back({"special", special});
  std::stringstream buffer;
  write_checkpoint(buffer, ck);
  const Checkpoint back = read_checkpoint(buffer);
  EXPECT_EQ(back.metadata, ck.metadata);
  ASSERT_EQ(back.tensors.size(), ck.tensors.size());
  for (std::size_t i = 0; i < ck.tensors.size(); ++i) {
    EXPECT_EQ(back.tensors[i].name, ck.tensors[i].name);
    EXPECT_EQ(back.tensors[i].value.shape(), ck.tensors[i].value.shape());
    EXPECT_EQ(std::memcmp(back.tensors[i].value.data(), ck.tensors[i].value.data(),
                          sizeof(double) * static_cast<std::size_t>(ck.tensors[i].value.size())),
              0);
  }
  Rng other(99);
  Network restored = build_actor({35, 18, 4, 16, 0.01}, other);
  back.load_parameters("actor.", restored.mutable_parameters());
  EXPECT_EQ(restored.parameters().flatten(), actor.parameters().flatten());
}

TEST(CheckpointTest, LittleEndianHeader) {
  Checkpoint ck;
  std::stringstream buffer;
  write_checkpoint(buffer, ck);
  const std::string bytes = buffer.str();
  ASSERT_GE(bytes.size(), 12u);
  EXPECT_EQ(bytes.substr(0, 8), "SIMDRLCK");
  EXPECT_EQ(bytes[8], '\x01');
  EXPECT_EQ(bytes[9], '\0');
}

TEST(CheckpointTest, CorruptionIsDetected) {
  Rng rng(18);
  NetworkBuilder b("fc", {3}, rng);
  Checkpoint ck;
  ck.add_parameters("", b.dense(2).build().parameters());
  std::stringstream buffer;
  write_checkpoint(buffer, ck);
  std::string bytes = buffer.str();

  std::string flipped = bytes;
  flipped[flipped.size() / 2] ^= 0x10;
  std::istringstream corrupt(flipped);
  EXPECT_THROW(read_checkpoint(corrupt), std::runtime_error);

  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(read_checkpoint(truncated), std::runtime_error);

  std::string magic = bytes;
  magic[0] = 'X';
  std::istringstream bad_magic(magic);
  EXPECT_THROW(read_checkpoint(bad_magic), std::runtime_error);
}

TEST(CheckpointTest, LoadRejectsMissingOrMisshapen) {
  Rng rng(19);
  NetworkBuilder b("fc", {3}, rng);
  Network net = b.dense(2).build();
  Checkpoint ck;
  ck.add_parameters("net.", net.parameters());
  EXPECT_THROW(ck.load_parameters("other.", net.mutable_parameters()), std::runtime_error);
  NetworkBuilder wide("fc", {4}, rng);
  Network other = wide.dense(2).build();
  EXPECT_THROW(ck.load_parameters("net.", other.mutable_parameters()), std::runtime_error);
}

}  // namespace
}  // namespace simdrl::nn
