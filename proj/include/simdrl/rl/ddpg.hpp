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
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "simdrl/config.hpp"
#include "simdrl/geometry.hpp"
#include "simdrl/metrics.hpp"
#include "simdrl/nn/adam.hpp"
#include "simdrl/nn/checkpoint.hpp"
#include "simdrl/nn/network.hpp"
#include "simdrl/random.hpp"
#include "simdrl/scenario.hpp"

namespace simdrl::rl {

using Eigen::Index;

/// Sizes of the state and action vectors for M users, N atoms per layer and
/// L layers.
struct Dimensions {
  Index users = 0;
  Index atoms = 0;
  Index layers = 0;

  static Dimensions from(const SimConfig& config);
  /// 2N(L+M) + M + 1.
  Index state_size() const { return 2 * atoms * (layers + users) + users + 1; }
  /// 2NL + M.
  Index action_size() const { return 2 * atoms * layers + users; }
};

// State and action encoding ---------------------------------------------------

/// [r, a, Re(g_1), Im(g_1), ..., Re(g_M), Im(g_M)] where g_m is row m of the
/// M x N channel. Throws std::invalid_argument if a_prev and G disagree with
/// `dims`.
Eigen::VectorXd build_state(double reward, const Eigen::VectorXd& action, const Eigen::MatrixXcd& g,
                            const Dimensions& dims);

struct StateParts {
  double reward = 0.0;
  Eigen::VectorXd action;
  Eigen::MatrixXcd channel;  // M x N
};

/// Inverse of build_state.
StateParts unpack_state(const Eigen::VectorXd& state, const Dimensions& dims);

struct Controls {
  PhaseConfiguration phases;
  PowerAllocation power;
};

/// Action layout: [Re(phi^1), Im(phi^1), ..., Re(phi^L), Im(phi^L), x_1..x_M].
/// Phase = atan2(Im, Re); power p_m = P x_m^2, rescaled by 1/sum(x^2) only
/// when sum(x^2) > 1, so the budget holds as an inequality.
Controls action_to_controls(const Eigen::VectorXd& action, const Dimensions& dims, double max_power);

/// An action that maps back to (phases, power): (cos, sin) per atom and
/// x_m = sqrt(p_m / P).
Eigen::VectorXd controls_to_action(const PhaseConfiguration& phases, const PowerAllocation& power,
                                   double max_power);

// Exploration -----------------------------------------------------------------

struct WhiteningSchedule {
  double v0 = 2.0;
  double zeta = 0.95;
  double t_gap = 100.0;
  double bound = 2.0;  // w_a

  static WhiteningSchedule from(const AgentConfig& agent);
  /// Throws std::invalid_argument unless every field is positive and zeta < 1.
  void validate() const;
};

/// v0 * zeta^(t / t_gap).
double noise_variance(std::int64_t step, const WhiteningSchedule& schedule);

/// One draw of N(0, variance) per entry, clamped to [-bound, bound].
Eigen::VectorXd whitening_noise(Rng& rng, Index size, double variance, double bound);

/// actor(state) plus whitening noise at the schedule's variance for `step`.
Eigen::VectorXd select_action(const nn::Network& actor, const Eigen::VectorXd& state, Rng& rng,
                              const WhiteningSchedule& schedule, std::int64_t step);

// Experience replay -----------------------------------------------------------

struct Transition {
  Eigen::VectorXd state;
  Eigen::VectorXd action;
  double reward = 0.0;
  Eigen::VectorXd next_state;
};

/// Fixed-capacity ring buffer. Sampling is allowed only once full.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return items_.size(); }
  bool full() const { return items_.size() == capacity_; }
  bool empty() const { return items_.empty(); }

  /// Overwrites the oldest transition once full. Throws std::invalid_argument
  /// on a non-finite or negative reward.
  void push(Transition transition);
  void clear();
  /// i-th transition in insertion order (0 = oldest).
  const Transition& at(std::size_t i) const;

  /// `batch` distinct slots chosen uniformly. Throws std::logic_error if the
  /// buffer is not full and std::invalid_argument if batch > capacity.
  std::vector<std::size_t> sample(Rng& rng, std::size_t batch) const;

  nn::Checkpoint to_checkpoint() const;
  static ReplayBuffer from_checkpoint(const nn::Checkpoint& checkpoint);

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // slot of the oldest transition once full
  std::vector<Transition> items_;
};

// Networks and updates --------------------------------------------------------

struct Agent {
  nn::Network actor;
  nn::Network critic;
  nn::Network actor_target;
  nn::Network critic_target;
  nn::AdamState actor_optimizer;
  nn::AdamState critic_optimizer;
};

/// Fresh actor and critic with target copies equal to them.
Agent make_agent(const Dimensions& dims, const AgentConfig& config, Rng& rng);

/// Row-wise [states, actions] as a [B, ds + da] tensor.
nn::Tensor concat_state_action(const nn::Tensor& states, const nn::Tensor& actions);

/// r + mu * Q'(s', pi'(s')) for each row of the batch.
Eigen::VectorXd critic_targets(const Eigen::VectorXd& rewards, const nn::Tensor& next_states,
                               const nn::Network& actor_target, const nn::Network& critic_target, double discount);

/// Scalar form for a single transition.
double critic_target(double reward, const Eigen::VectorXd& next_state, const nn::Network& actor_target,
                     const nn::Network& critic_target, double discount);

struct CriticGradient {
  nn::ParameterSet grads;
  double loss = 0.0;
  double mean_q = 0.0;
};

/// Gradient of mean (y - Q(s, a))^2 with respect to the critic parameters.
CriticGradient critic_loss_gradient(const nn::Network& critic, const nn::Tensor& states, const nn::Tensor& actions,
                                    const Eigen::VectorXd& targets);

struct ActorGradient {
  nn::ParameterSet ascent;  // d mean_b Q(s_b, pi(s_b)) / d theta_pi
  double mean_q = 0.0;
};

ActorGradient actor_ascent_gradient(const nn::Network& actor, const nn::Network& critic, const nn::Tensor& states);

/// target <- eta * train + (1 - eta) * target. Throws std::invalid_argument
/// on a layout mismatch.
void soft_update(const nn::ParameterSet& train, nn::ParameterSet& target, double eta);

struct TrainHyper {
  double discount = 0.99;
  std::size_t batch_size = 32;
  double tau_actor = 0.01;
  double tau_critic = 0.01;

  static TrainHyper from(const AgentConfig& agent);
};

struct TrainDiagnostics {
  bool trained = false;
  double critic_loss = 0.0;
  double mean_q = 0.0;
};

/// One critic step, one actor ascent step and the soft target updates on a
/// uniformly sampled mini-batch. A no-op unless the buffer is full.
TrainDiagnostics train_step(Agent& agent, const ReplayBuffer& buffer, Rng& rng, const TrainHyper& hyper);

/// lr * factor when the last `patience` entries of `history` show no
/// improvement over the entry `patience` steps back, otherwise lr.
double lr_plateau_decay(std::span<const double> history, double lr, int patience, double factor);

/// Stateful form of lr_plateau_decay: keeps the best-reward window, applies
/// the decay and restarts the window after every decay.
class PlateauTracker {
 public:
  PlateauTracker(int patience, double factor) : patience_(patience), factor_(factor) {}
  /// Records one best-reward value; returns the multiplier (1 or factor).
  double observe(double best_reward);
  void reset() { history_.clear(); }

 private:
  int patience_;
  double factor_;
  std::vector<double> history_;
};

// Training --------------------------------------------------------------------

struct TraceRow {
  int episode = 0;
  std::int64_t step = 0;
  double reward = 0.0;
  double best_reward = 0.0;
  double critic_loss = 0.0;
  double mean_q = 0.0;
  double lr_actor = 0.0;
  double lr_critic = 0.0;
  double noise_variance = 0.0;
};

struct EpisodeSummary {
  double best_reward = 0.0;
  Controls best;
  std::uint64_t channel_checksum = 0;
  std::int64_t train_steps = 0;
};

struct TrainingResult {
  Controls best;
  double best_reward = 0.0;
  int best_episode = 0;
  std::vector<EpisodeSummary> episodes;
  std::vector<TraceRow> trace;  // every diagnostics_interval steps and each episode's last step
  Agent agent;
};

/// Supplies the channel of an episode from the episode's RNG stream.
using ChannelSource = std::function<ChannelRealization(int episode, Rng& rng)>;

struct TrainingOptions {
  ChannelSource channel_source;  // empty: a fresh draw per episode
  bool uniform_power = false;    // ignore the power entries of the action
};

/// The episodic DDPG procedure. Each episode empties the replay buffer,
/// restarts the whitening clock, starts from random phases and uniform power,
/// fixes the channel for the episode and runs T steps. The learning-rate
/// plateau rule is applied on steps that train.
TrainingResult run_training(const Scenario& scenario, const AgentConfig& config, Rng& rng,
                            const TrainingOptions& options = {});

void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace);
void write_trace_csv(const std::filesystem::path& path, std::span<const TraceRow> trace);

/// Networks, optimizer moments and learning rates.
nn::Checkpoint agent_checkpoint(const Agent& agent);
/// Restores into an agent of the same architecture.
void load_agent_checkpoint(const nn::Checkpoint& checkpoint, Agent& agent);

}  // namespace simdrl::rl
