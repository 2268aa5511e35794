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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "simdrl/baselines.hpp"
#include "simdrl/config.hpp"
#include "simdrl/metrics.hpp"
#include "simdrl/random.hpp"
#include "simdrl/rl/ddpg.hpp"
#include "simdrl/scenario.hpp"

namespace simdrl::rl {
namespace {

using nn::Tensor;

constexpr Dimensions kSmall{2, 4, 2};  // M=2, N=4, L=2

SimConfig small_sim() {
  SimConfig cfg = reference_config().sim;
  cfg.num_users = 2;
  cfg.atoms_per_layer = 4;
  cfg.num_layers = 2;
  return cfg;
}

AgentConfig tiny_agent() {
  AgentConfig cfg;
  cfg.conv_channels = 2;
  cfg.fc_width = 8;
  cfg.batch_size = 4;
  cfg.replay_capacity = 16;
  cfg.episodes = 1;
  cfg.steps = 10;
  cfg.diagnostics_interval = 1;
  return cfg;
}

Eigen::VectorXd uniform_vector(Rng& rng, Index size, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Eigen::VectorXd v(size);
  for (auto& x : v) x = dist(rng);
  return v;
}

Eigen::MatrixXcd random_channel(Rng& rng, Index users, Index atoms) {
  Eigen::MatrixXcd g(users, atoms);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (auto& v : g.reshaped()) v = {dist(rng), dist(rng)};
  return g;
}

ReplayBuffer filled_buffer(Rng& rng, std::size_t capacity) {
  ReplayBuffer buffer(capacity);
  for (std::size_t i = 0; i < capacity; ++i) {
    buffer.push({uniform_vector(rng, kSmall.state_size(), -1, 1), uniform_vector(rng, kSmall.action_size(), -1, 1),
                 uniform_vector(rng, 1, 0, 2)[0], uniform_vector(rng, kSmall.state_size(), -1, 1)});
  }
  return buffer;
}

// State and action encoding ---------------------------------------------------

TEST(DimensionsTest, StateAndActionLengths) {
  EXPECT_EQ(kSmall.state_size(), 35);
  EXPECT_EQ(kSmall.action_size(), 18);
  const Dimensions full = Dimensions::from(reference_config().sim);
  EXPECT_EQ(full.state_size(), 2 * 49 * (4 + 4) + 4 + 1);
  EXPECT_EQ(full.action_size(), 2 * 49 * 4 + 4);
}

TEST(StateTest, ZeroInputsGiveZeroState) {
  const Eigen::VectorXd s = build_state(0.0, Eigen::VectorXd::Zero(18), Eigen::MatrixXcd::Zero(2, 4), kSmall);
  EXPECT_EQ(s, Eigen::VectorXd::Zero(35));
}

TEST(StateTest, LayoutAndRoundTrip) {
  Rng rng(1);
  const Eigen::VectorXd a = uniform_vector(rng, 18, -1, 1);
  const Eigen::MatrixXcd g = random_channel(rng, 2, 4);
  const Eigen::VectorXd s = build_state(3.5, a, g, kSmall);
  ASSERT_EQ(s.size(), 35);
  EXPECT_EQ(s[0], 3.5);
  EXPECT_EQ(s.segment(1, 18), a);
  // Row g_1 as Re then Im, then g_2.
  EXPECT_EQ(s[19], g(0, 0).real());
  EXPECT_EQ(s[23], g(0, 0).imag());
  EXPECT_EQ(s[27], g(1, 0).real());
  const StateParts parts = unpack_state(s, kSmall);
  EXPECT_EQ(parts.reward, 3.5);
  EXPECT_EQ(parts.action, a);
  EXPECT_EQ(parts.channel, g);
}

TEST(StateTest, DimensionMismatchThrows) {
  EXPECT_THROW(build_state(0.0, Eigen::VectorXd::Zero(17), Eigen::MatrixXcd::Zero(2, 4), kSmall),
               std::invalid_argument);
  EXPECT_THROW(build_state(0.0, Eigen::VectorXd::Zero(18), Eigen::MatrixXcd::Zero(3, 4), kSmall),
               std::invalid_argument);
}

TEST(ActionTest, PhasesFromAtan2) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(18);
  a[0] = 1.0;  // layer 1 atom 1: Re
  a[5] = 1.0;  // layer 1 atom 2: Im
  a[8 + 2] = -1.0;
  a[8 + 4 + 2] = -1e-300;
  const Controls c = action_to_controls(a, kSmall, 1.0);
  EXPECT_EQ(c.phases.phases(0, 0), 0.0);
  EXPECT_EQ(c.phases.phases(1, 0), std::numbers::pi / 2);
  EXPECT_EQ(c.phases.phases(2, 0), 0.0);  // zero vector
  EXPECT_NEAR(std::abs(c.phases.phases(2, 1)), std::numbers::pi, 1e-15);
}

TEST(ActionTest, EqualPowerEntriesGiveUniformAllocation) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(18);
  a.tail(2).setConstant(0.9);
  const Controls c = action_to_controls(a, kSmall, 0.01);
  EXPECT_EQ(c.power[0], c.power[1]);
  EXPECT_LE(c.power.sum(), 0.01);
  EXPECT_NEAR(c.power.sum(), 0.01, 1e-17);
}

TEST(ActionTest, SmallEntriesAreNotRescaled) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(18);
  a.tail(2) << 0.3, -0.4;
  const Controls c = action_to_controls(a, kSmall, 2.0);
  EXPECT_NEAR(c.power[0], 2.0 * 0.09, 1e-16);
  EXPECT_NEAR(c.power[1], 2.0 * 0.16, 1e-16);
}

TEST(ActionTest, RandomActionsAreAlwaysFeasible) {
  Rng rng(2);
  for (int i = 0; i < 100000; ++i) {
    const Eigen::VectorXd a = uniform_vector(rng, 18, -3.0, 3.0);
    const Controls c = action_to_controls(a, kSmall, 0.01);
    ASSERT_TRUE(is_feasible(c.power, 0.01)) << "draw " << i;
    ASSERT_TRUE(c.phases.phases.allFinite());
  }
}

TEST(ActionTest, ControlsRoundTrip) {
  Rng rng(3);
  const PhaseConfiguration phases = PhaseConfiguration::random(rng, 4, 2);
  const PowerAllocation power = Eigen::Vector2d(0.003, 0.006);
  const Controls back = action_to_controls(controls_to_action(phases, power, 0.01), kSmall, 0.01);
  const Eigen::MatrixXcd diff = back.phases.coefficients() - phases.coefficients();
  EXPECT_LE(diff.cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(back.power[0], 0.003, 1e-17);
  EXPECT_NEAR(back.power[1], 0.006, 1e-17);
}

// Exploration -----------------------------------------------------------------

TEST(WhiteningTest, ScheduleValues) {
  const WhiteningSchedule sched;
  EXPECT_EQ(noise_variance(0, sched), 2.0);
  EXPECT_EQ(noise_variance(100, sched), 1.9);
  EXPECT_EQ(noise_variance(1000, sched), 2.0 * std::pow(0.95, 10.0));
  for (int t = 1; t < 2000; ++t) EXPECT_LT(noise_variance(t, sched), noise_variance(t - 1, sched));
}

TEST(WhiteningTest, ValidationRejectsBadSchedules) {
  WhiteningSchedule bad;
  bad.zeta = 1.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = WhiteningSchedule{};
  bad.t_gap = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  EXPECT_NO_THROW(WhiteningSchedule{}.validate());
}

TEST(WhiteningTest, NoiseIsTruncatedGaussian) {
  const int samples = 1000000;
  Rng rng(4), replay(4);
  const Eigen::VectorXd noise = whitening_noise(rng, samples, 2.0, 2.0);
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0));
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double raw = normal(replay);
    ASSERT_EQ(noise[i], std::clamp(raw, -2.0, 2.0));
    sum += raw;
    sum_sq += raw * raw;
  }
  EXPECT_GE(noise.minCoeff(), -2.0);
  EXPECT_LE(noise.maxCoeff(), 2.0);
  const double variance = sum_sq / samples - (sum / samples) * (sum / samples);
  EXPECT_NEAR(variance, 2.0, 0.02 * 2.0);
}

TEST(WhiteningTest, VanishingVarianceReturnsActorOutput) {
  Rng rng(5);
  const Agent agent = make_agent(kSmall, tiny_agent(), rng);
  const Eigen::VectorXd state = uniform_vector(rng, 35, -1, 1);
  WhiteningSchedule sched;
  sched.v0 = 1e-300;
  const Eigen::VectorXd action = select_action(agent.actor, state, rng, sched, 0);
  EXPECT_EQ(action, nn::predict(agent.actor, Tensor({1, 35}, state)).values());
}

// Replay ----------------------------------------------------------------------

TEST(ReplayTest, RingOrderAndValidation) {
  ReplayBuffer buffer(3);
  auto item = [](double r) { return Transition{Eigen::VectorXd::Constant(2, r), Eigen::VectorXd::Zero(1), r, {}}; };
  EXPECT_THROW(buffer.push(item(-1.0)), std::invalid_argument);
  EXPECT_THROW(buffer.push(item(std::nan(""))), std::invalid_argument);
  for (int i = 0; i < 5; ++i) buffer.push(item(i));
  EXPECT_TRUE(buffer.full());
  EXPECT_EQ(buffer.at(0).reward, 2.0);
  EXPECT_EQ(buffer.at(2).reward, 4.0);
  buffer.clear();
  EXPECT_TRUE(buffer.empty());
}

TEST(ReplayTest, SamplingRequiresFullBufferAndIsWithoutReplacement) {
  Rng rng(6);
  ReplayBuffer buffer(10);
  buffer.push({Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), 0.0, Eigen::VectorXd::Zero(1)});
  EXPECT_THROW(buffer.sample(rng, 4), std::logic_error);
  const ReplayBuffer full = filled_buffer(rng, 10);
  EXPECT_THROW(full.sample(rng, 11), std::invalid_argument);
  std::vector<int> counts(10, 0);
  const int rounds = 20000;
  for (int i = 0; i < rounds; ++i) {
    const auto picks = full.sample(rng, 4);
    ASSERT_EQ(std::set<std::size_t>(picks.begin(), picks.end()).size(), 4u);
    for (auto p : picks) ++counts[p];
  }
  // Each slot is picked with probability 4/10 per round.
  for (int c : counts) EXPECT_NEAR(c, rounds * 0.4, 5 * std::sqrt(rounds * 0.4 * 0.6));
}

TEST(ReplayTest, CheckpointRoundTrip) {
  Rng rng(7);
  ReplayBuffer buffer = filled_buffer(rng, 6);
  buffer.push(buffer.at(0));  // wrap the ring
  std::stringstream bytes;
  nn::write_checkpoint(bytes, buffer.to_checkpoint());
  const ReplayBuffer back = ReplayBuffer::from_checkpoint(nn::read_checkpoint(bytes));
  ASSERT_EQ(back.size(), buffer.size());
  EXPECT_EQ(back.capacity(), buffer.capacity());
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    EXPECT_EQ(back.at(i).state, buffer.at(i).state);
    EXPECT_EQ(back.at(i).action, buffer.at(i).action);
    EXPECT_EQ(back.at(i).reward, buffer.at(i).reward);
    EXPECT_EQ(back.at(i).next_state, buffer.at(i).next_state);
  }
}

// Networks and updates --------------------------------------------------------

TEST(AgentTest, TargetsEqualTrainingNetworksAfterInit) {
  Rng rng(8);
  const Agent agent = make_agent(kSmall, tiny_agent(), rng);
  EXPECT_EQ(agent.actor.parameters().flatten(), agent.actor_target.parameters().flatten());
  EXPECT_EQ(agent.critic.parameters().flatten(), agent.critic_target.parameters().flatten());
  EXPECT_EQ(agent.actor.output_size(), 18);
  EXPECT_EQ(agent.critic.output_size(), 1);
}

TEST(CriticTargetTest, MyopicAndZeroCriticLimits) {
  Rng rng(9);
  Agent agent = make_agent(kSmall, tiny_agent(), rng);
  const Eigen::VectorXd next = uniform_vector(rng, 35, -1, 1);
  EXPECT_EQ(critic_target(1.25, next, agent.actor_target, agent.critic_target, 0.0), 1.25);
  auto& params = agent.critic_target.mutable_parameters();
  params[params.size() - 2].values().setZero();  // output weight
  params[params.size() - 1].values().setZero();  // output bias
  EXPECT_EQ(critic_target(1.25, next, agent.actor_target, agent.critic_target, 0.99), 1.25);
}

TEST(CriticTargetTest, MatchesHandComposition) {
  Rng rng(10);
  const Agent agent = make_agent(kSmall, tiny_agent(), rng);
  const Eigen::VectorXd next = uniform_vector(rng, 35, -1, 1);
  const Eigen::VectorXd action = nn::predict(agent.actor_target, Tensor({1, 35}, next)).values();
  Eigen::VectorXd joint(53);
  joint << next, action;
  const double q = nn::predict(agent.critic_target, Tensor({1, 53}, joint))[0];
  EXPECT_EQ(critic_target(0.5, next, agent.actor_target, agent.critic_target, 0.9), 0.5 + 0.9 * q);

  Tensor batch({3, 35});
  for (Index b = 0; b < 3; ++b) batch.matrix(35, 3).col(b) = b == 1 ? next : uniform_vector(rng, 35, -1, 1);
  const Eigen::VectorXd labels =
      critic_targets(Eigen::Vector3d(0.0, 0.5, 1.0), batch, agent.actor_target, agent.critic_target, 0.9);
  EXPECT_NEAR(labels[1], 0.5 + 0.9 * q, 1e-15);
}

TEST(TrainStepTest, NoOpUntilBufferIsFull) {
  Rng rng(11);
  Agent agent = make_agent(kSmall, tiny_agent(), rng);
  ReplayBuffer buffer(8);
  buffer.push(filled_buffer(rng, 1).at(0));
  const Eigen::VectorXd before = agent.actor.parameters().flatten();
  EXPECT_FALSE(train_step(agent, buffer, rng, TrainHyper{0.99, 4, 0.01, 0.01}).trained);
  EXPECT_EQ(agent.actor.parameters().flatten(), before);
}

TEST(TrainStepTest, ZeroLearningRatesLeaveNetworksUnchanged) {
  Rng rng(12);
  AgentConfig cfg = tiny_agent();
  cfg.lr_actor = 0.0;
  cfg.lr_critic = 0.0;
  Agent agent = make_agent(kSmall, cfg, rng);
  const Eigen::VectorXd actor = agent.actor.parameters().flatten();
  const Eigen::VectorXd critic = agent.critic.parameters().flatten();
  const ReplayBuffer buffer = filled_buffer(rng, 8);
  const auto diag = train_step(agent, buffer, rng, TrainHyper{0.99, 4, 0.01, 0.01});
  EXPECT_TRUE(diag.trained);
  EXPECT_TRUE(std::isfinite(diag.critic_loss));
  EXPECT_EQ(agent.actor.parameters().flatten(), actor);
  EXPECT_EQ(agent.critic.parameters().flatten(), critic);
  EXPECT_EQ(agent.actor_target.parameters().flatten(), actor);
  EXPECT_EQ(agent.critic_target.parameters().flatten(), critic);
}

TEST(TrainStepTest, CriticStepLowersLossOnFixedBatch) {
  Rng rng(13);
  Agent agent = make_agent(kSmall, tiny_agent(), rng);
  Tensor states({4, 35}, uniform_vector(rng, 4 * 35, -1, 1));
  Tensor actions({4, 18}, uniform_vector(rng, 4 * 18, -1, 1));
  const Eigen::VectorXd targets = uniform_vector(rng, 4, 0, 2);
  const auto first = critic_loss_gradient(agent.critic, states, actions, targets);
  auto opt = nn::AdamState::for_parameters(agent.critic.parameters(), 1e-4);
  nn::adam_step(agent.critic.mutable_parameters(), first.grads, opt);
  const auto second = critic_loss_gradient(agent.critic, states, actions, targets);
  EXPECT_LT(second.loss, first.loss);
}

TEST(TrainStepTest, ActorGradientMatchesFiniteDifferenceDirection) {
  Rng rng(14);
  Agent agent = make_agent(kSmall, tiny_agent(), rng);
  const Tensor states({4, 35}, uniform_vector(rng, 4 * 35, -1, 1));
  const ActorGradient analytic = actor_ascent_gradient(agent.actor, agent.critic, states);
  auto mean_q = [&](const nn::Network& actor) {
    const Tensor joint = concat_state_action(states, nn::predict(actor, states));
    return nn::predict(agent.critic, joint).values().mean();
  };
  EXPECT_NEAR(analytic.mean_q, mean_q(agent.actor), 1e-14);
  const Eigen::VectorXd theta = agent.actor.parameters().flatten();
  Eigen::VectorXd numeric(theta.size());
  const double h = 1e-6;
  nn::Network probe = agent.actor;
  for (Index i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd shifted = theta;
    shifted[i] += h;
    probe.mutable_parameters().assign(shifted);
    const double plus = mean_q(probe);
    shifted[i] -= 2 * h;
    probe.mutable_parameters().assign(shifted);
    numeric[i] = (plus - mean_q(probe)) / (2 * h);
  }
  const Eigen::VectorXd exact = analytic.ascent.flatten();
  const double cosine = exact.dot(numeric) / (exact.norm() * numeric.norm());
  EXPECT_LT(std::acos(std::min(1.0, cosine)), 1e-3);
}

TEST(SoftUpdateTest, LimitsAndGeometricDecay) {
  nn::ParameterSet train, target;
  train.add("w", Tensor({3}, Eigen::Vector3d(1.0, -2.0, 0.5)));
  target.add("w", Tensor({3}, Eigen::Vector3d(0.0, 0.0, 4.0)));
  nn::ParameterSet copy = target;
  soft_update(train, copy, 0.0);
  EXPECT_EQ(copy.flatten(), target.flatten());
  soft_update(train, copy, 1.0);
  EXPECT_EQ(copy.flatten(), train.flatten());

  copy = target;
  const Eigen::VectorXd initial = target.flatten() - train.flatten();
  for (int k = 1; k <= 200; ++k) {
    soft_update(train, copy, 0.01);
    const Eigen::VectorXd expected = std::pow(0.99, k) * initial;
    EXPECT_LE((copy.flatten() - train.flatten() - expected).norm(), 1e-13) << "k = " << k;
  }
  nn::ParameterSet wrong;
  wrong.add("w", Tensor({2}));
  EXPECT_THROW(soft_update(train, wrong, 0.5), std::invalid_argument);
}

TEST(PlateauTest, DecayRule) {
  std::vector<double> improving(200), flat(200, 1.0);
  for (int i = 0; i < 200; ++i) improving[static_cast<std::size_t>(i)] = i;
  EXPECT_EQ(lr_plateau_decay(improving, 1e-3, 200, 0.8), 1e-3);
  EXPECT_EQ(lr_plateau_decay(flat, 1e-3, 200, 0.8), 1e-3 * 0.8);
  EXPECT_EQ(lr_plateau_decay(std::span<const double>(flat).first(199), 1e-3, 200, 0.8), 1e-3);

  PlateauTracker tracker(200, 0.8);
  double lr = 1.0;
  for (int i = 0; i < 400; ++i) lr *= tracker.observe(5.0);
  EXPECT_NEAR(lr, 0.64, 1e-15);
  for (int i = 0; i < 400; ++i) lr *= tracker.observe(6.0 + i);
  EXPECT_NEAR(lr, 0.64, 1e-15);
}

// Training --------------------------------------------------------------------

TEST(TrainingTest, RunningMaximumBookkeeping) {
  const Scenario scenario(small_sim());
  Rng rng(15);
  const TrainingResult result = run_training(scenario, tiny_agent(), rng);
  ASSERT_EQ(result.trace.size(), 10u);
  ASSERT_EQ(result.episodes.size(), 1u);
  EXPECT_EQ(result.episodes[0].train_steps, 0);
  double best = -1.0;
  for (const auto& row : result.trace) {
    best = std::max(best, row.reward);
    EXPECT_EQ(row.best_reward, best);
  }
  EXPECT_EQ(result.best_reward, best);
  EXPECT_TRUE(is_feasible(result.best.power, scenario.config.max_power));
  EXPECT_EQ(result.trace.front().noise_variance, 2.0);
}

TEST(TrainingTest, BestControlsReproduceBestReward) {
  const Scenario scenario(small_sim());
  Rng rng(16), replay(16);
  AgentConfig cfg = tiny_agent();
  cfg.episodes = 2;
  const TrainingResult result = run_training(scenario, cfg, rng);
  // Replay the episode channels from the same streams.
  make_agent(Dimensions::from(scenario.config), cfg, replay);
  const std::uint64_t episode_seed = replay();
  Rng ep = make_stream(episode_seed, static_cast<std::uint64_t>(result.best_episode), "episode");
  const ChannelRealization channel = scenario.draw_channel(ep);
  EXPECT_EQ(channel_checksum(channel.G), result.episodes[static_cast<std::size_t>(result.best_episode)].channel_checksum);
  EXPECT_EQ(scenario.evaluate(result.best.phases, result.best.power, channel), result.best_reward);
}

TEST(TrainingTest, SameSeedIsBitIdentical) {
  const Scenario scenario(small_sim());
  AgentConfig cfg = tiny_agent();
  cfg.episodes = 2;
  cfg.steps = 40;
  Rng a(17), b(17);
  const TrainingResult x = run_training(scenario, cfg, a);
  const TrainingResult y = run_training(scenario, cfg, b);
  EXPECT_GT(x.episodes[0].train_steps, 0);
  ASSERT_EQ(x.trace.size(), y.trace.size());
  std::ostringstream tx, ty;
  write_trace_csv(tx, x.trace);
  write_trace_csv(ty, y.trace);
  EXPECT_EQ(tx.str(), ty.str());
  EXPECT_EQ(x.agent.actor.parameters().flatten(), y.agent.actor.parameters().flatten());
  EXPECT_EQ(x.agent.critic_target.parameters().flatten(), y.agent.critic_target.parameters().flatten());
}

TEST(TrainingTest, WhiteningRestartsEachEpisode) {
  const Scenario scenario(small_sim());
  AgentConfig cfg = tiny_agent();
  cfg.episodes = 3;
  Rng rng(18);
  const TrainingResult result = run_training(scenario, cfg, rng);
  for (const auto& row : result.trace) {
    if (row.step == 0) {
      EXPECT_EQ(row.noise_variance, cfg.noise_v0);
    }
  }
}

TEST(TrainingTest, UniformPowerOption) {
  const Scenario scenario(small_sim());
  Rng rng(19);
  TrainingOptions options;
  options.uniform_power = true;
  const TrainingResult result = run_training(scenario, tiny_agent(), rng, options);
  EXPECT_EQ(result.best.power, uniform_power(scenario.config.max_power, 2));
}

TEST(TrainingTest, TraceCsvHeader) {
  std::ostringstream out;
  write_trace_csv(out, std::vector<TraceRow>{TraceRow{}});
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')),
            "episode,step,reward,best_reward,critic_loss,lr_actor,lr_critic,noise_variance");
}

TEST(TrainingTest, AgentCheckpointRoundTrip) {
  const Scenario scenario(small_sim());
  AgentConfig cfg = tiny_agent();
  cfg.steps = 30;
  Rng rng(20);
  const TrainingResult result = run_training(scenario, cfg, rng);
  std::stringstream bytes;
  nn::write_checkpoint(bytes, agent_checkpoint(result.agent));
  Rng other(21);
  Agent restored = make_agent(kSmall, cfg, other);
  load_agent_checkpoint(nn::read_checkpoint(bytes), restored);
  EXPECT_EQ(restored.actor.parameters().flatten(), result.agent.actor.parameters().flatten());
  EXPECT_EQ(restored.critic.parameters().flatten(), result.agent.critic.parameters().flatten());
  EXPECT_EQ(restored.actor_target.parameters().flatten(), result.agent.actor_target.parameters().flatten());
  EXPECT_EQ(restored.critic_target.parameters().flatten(), result.agent.critic_target.parameters().flatten());
  EXPECT_EQ(restored.actor_optimizer.first_moment.flatten(), result.agent.actor_optimizer.first_moment.flatten());
  EXPECT_EQ(restored.critic_optimizer.second_moment.flatten(), result.agent.critic_optimizer.second_moment.flatten());
  EXPECT_EQ(restored.actor_optimizer.step, result.agent.actor_optimizer.step);
  EXPECT_EQ(restored.critic_optimizer.learning_rate, result.agent.critic_optimizer.learning_rate);
}

}  // namespace
}  // namespace simdrl::rl
