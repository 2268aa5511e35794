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

#include "simdrl/rl/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "simdrl/baselines.hpp"
#include "simdrl/text.hpp"

namespace simdrl::rl {

using nn::Network;
using nn::ParameterSet;
using nn::Tensor;

Dimensions Dimensions::from(const SimConfig& config) {
  return {config.num_users, config.atoms_per_layer, config.num_layers};
}

// State and action encoding ---------------------------------------------------

Eigen::VectorXd build_state(double reward, const Eigen::VectorXd& action, const Eigen::MatrixXcd& g,
                            const Dimensions& dims) {
  if (action.size() != dims.action_size()) {
    throw std::invalid_argument("build_state: action has " + std::to_string(action.size()) + " entries, expected " +
                                std::to_string(dims.action_size()));
  }
  if (g.rows() != dims.users || g.cols() != dims.atoms) {
    throw std::invalid_argument("build_state: channel is " + std::to_string(g.rows()) + "x" +
                                std::to_string(g.cols()) + ", expected " + std::to_string(dims.users) + "x" +
                                std::to_string(dims.atoms));
  }
  Eigen::VectorXd state(dims.state_size());
  state[0] = reward;
  state.segment(1, action.size()) = action;
  Index offset = 1 + action.size();
  for (Index m = 0; m < dims.users; ++m) {
    state.segment(offset, dims.atoms) = g.row(m).real().transpose();
    state.segment(offset + dims.atoms, dims.atoms) = g.row(m).imag().transpose();
    offset += 2 * dims.atoms;
  }
  return state;
}

StateParts unpack_state(const Eigen::VectorXd& state, const Dimensions& dims) {
  if (state.size() != dims.state_size()) {
    throw std::invalid_argument("unpack_state: state has " + std::to_string(state.size()) + " entries, expected " +
                                std::to_string(dims.state_size()));
  }
  StateParts parts;
  parts.reward = state[0];
  parts.action = state.segment(1, dims.action_size());
  parts.channel.resize(dims.users, dims.atoms);
  Index offset = 1 + dims.action_size();
  for (Index m = 0; m < dims.users; ++m) {
    for (Index n = 0; n < dims.atoms; ++n) {
      parts.channel(m, n) = {state[offset + n], state[offset + dims.atoms + n]};
    }
    offset += 2 * dims.atoms;
  }
  return parts;
}

Controls action_to_controls(const Eigen::VectorXd& action, const Dimensions& dims, double max_power) {
  if (action.size() != dims.action_size()) {
    throw std::invalid_argument("action_to_controls: action has " + std::to_string(action.size()) +
                                " entries, expected " + std::to_string(dims.action_size()));
  }
  Controls controls;
  controls.phases.phases.resize(dims.atoms, dims.layers);
  for (Index l = 0; l < dims.layers; ++l) {
    const Index re = 2 * l * dims.atoms;
    const Index im = re + dims.atoms;
    for (Index n = 0; n < dims.atoms; ++n) controls.phases.phases(n, l) = std::atan2(action[im + n], action[re + n]);
  }
  const Eigen::VectorXd x2 = action.tail(dims.users).cwiseAbs2();
  const double total = x2.sum();
  controls.power = max_power * (total > 1.0 ? Eigen::VectorXd(x2 / total) : x2);
  while (controls.power.sum() > max_power) {
    controls.power *= std::nextafter(max_power / controls.power.sum(), 0.0);
  }
  return controls;
}

Eigen::VectorXd controls_to_action(const PhaseConfiguration& phases, const PowerAllocation& power,
                                   double max_power) {
  const Index atoms = phases.num_atoms();
  const Index layers = phases.num_layers();
  Eigen::VectorXd action(2 * atoms * layers + power.size());
  for (Index l = 0; l < layers; ++l) {
    action.segment(2 * l * atoms, atoms) = phases.phases.col(l).array().cos().matrix();
    action.segment(2 * l * atoms + atoms, atoms) = phases.phases.col(l).array().sin().matrix();
  }
  action.tail(power.size()) = (power.array() / max_power).sqrt().matrix();
  return action;
}

// Exploration -----------------------------------------------------------------

WhiteningSchedule WhiteningSchedule::from(const AgentConfig& agent) {
  return {agent.noise_v0, agent.noise_decay, agent.noise_gap, agent.noise_bound};
}

void WhiteningSchedule::validate() const {
  if (!(v0 > 0) || !(zeta > 0) || !(zeta < 1) || !(t_gap > 0) || !(bound > 0)) {
    throw std::invalid_argument("WhiteningSchedule: need v0, t_gap, bound > 0 and 0 < zeta < 1");
  }
}

double noise_variance(std::int64_t step, const WhiteningSchedule& schedule) {
  if (step < 0) throw std::invalid_argument("noise_variance: negative step");
  return schedule.v0 * std::pow(schedule.zeta, static_cast<double>(step) / schedule.t_gap);
}

Eigen::VectorXd whitening_noise(Rng& rng, Index size, double variance, double bound) {
  Eigen::VectorXd noise(size);
  if (variance <= 0.0) return noise.setZero();
  std::normal_distribution<double> normal(0.0, std::sqrt(variance));
  for (Index i = 0; i < size; ++i) noise[i] = std::clamp(normal(rng), -bound, bound);
  return noise;
}

Eigen::VectorXd select_action(const Network& actor, const Eigen::VectorXd& state, Rng& rng,
                              const WhiteningSchedule& schedule, std::int64_t step) {
  const Tensor out = nn::predict(actor, Tensor({1, state.size()}, state));
  return out.values() + whitening_noise(rng, out.size(), noise_variance(step, schedule), schedule.bound);
}

// Experience replay -----------------------------------------------------------

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  items_.reserve(capacity);
}

void ReplayBuffer::push(Transition transition) {
  if (!std::isfinite(transition.reward) || transition.reward < 0.0) {
    throw std::invalid_argument("ReplayBuffer: reward must be finite and nonnegative");
  }
  if (!full()) {
    items_.push_back(std::move(transition));
    return;
  }
  items_[head_] = std::move(transition);
  head_ = (head_ + 1) % capacity_;
}

void ReplayBuffer::clear() {
  items_.clear();
  head_ = 0;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw std::out_of_range("ReplayBuffer::at");
  return items_[(head_ + i) % items_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample(Rng& rng, std::size_t batch) const {
  if (!full()) throw std::logic_error("ReplayBuffer::sample: buffer is not full");
  if (batch > capacity_) throw std::invalid_argument("ReplayBuffer::sample: batch exceeds capacity");
  // Floyd's algorithm: uniform subset of size `batch` without replacement.
  std::vector<std::size_t> chosen;
  chosen.reserve(batch);
  for (std::size_t j = capacity_ - batch; j < capacity_; ++j) {
    std::uniform_int_distribution<std::size_t> pick(0, j);
    const std::size_t t = pick(rng);
    const bool seen = std::find(chosen.begin(), chosen.end(), t) != chosen.end();
    chosen.push_back(seen ? j : t);
  }
  return chosen;
}

nn::Checkpoint ReplayBuffer::to_checkpoint() const {
  nn::Checkpoint ck;
  ck.metadata["kind"] = "replay";
  ck.metadata["capacity"] = std::to_string(capacity_);
  const Index n = static_cast<Index>(items_.size());
  const Index ds = n ? items_.front().state.size() : 0;
  const Index da = n ? items_.front().action.size() : 0;
  Tensor states({n, ds}), actions({n, da}), rewards({n}), next({n, ds});
  for (Index i = 0; i < n; ++i) {
    const Transition& t = at(static_cast<std::size_t>(i));
    states.matrix(ds, n).col(i) = t.state;
    actions.matrix(da, n).col(i) = t.action;
    rewards[i] = t.reward;
    next.matrix(ds, n).col(i) = t.next_state;
  }
  ck.tensors = {{"state", states}, {"action", actions}, {"reward", rewards}, {"next_state", next}};
  return ck;
}

ReplayBuffer ReplayBuffer::from_checkpoint(const nn::Checkpoint& ck) {
  const auto it = ck.metadata.find("capacity");
  if (it == ck.metadata.end()) throw std::runtime_error("replay checkpoint: missing capacity");
  ReplayBuffer buffer(static_cast<std::size_t>(parse_u64(it->second)));
  const Tensor* states = ck.find("state");
  const Tensor* actions = ck.find("action");
  const Tensor* rewards = ck.find("reward");
  const Tensor* next = ck.find("next_state");
  if (!states || !actions || !rewards || !next) throw std::runtime_error("replay checkpoint: missing tensor");
  const Index n = rewards->size();
  const Index ds = states->dim(1);
  const Index da = actions->dim(1);
  for (Index i = 0; i < n; ++i) {
    buffer.push({states->matrix(ds, n).col(i), actions->matrix(da, n).col(i), (*rewards)[i],
                 next->matrix(ds, n).col(i)});
  }
  return buffer;
}

// Networks and updates --------------------------------------------------------

Agent make_agent(const Dimensions& dims, const AgentConfig& config, Rng& rng) {
  const Index width = config.resolved_fc_width(static_cast<int>(dims.atoms));
  Network actor = nn::build_actor({dims.state_size(), dims.action_size(), config.conv_channels, width,
                                   config.leaky_slope},
                                  rng);
  Network critic = nn::build_critic({dims.state_size(), dims.action_size(), width, config.leaky_slope}, rng);
  auto actor_opt = nn::AdamState::for_parameters(actor.parameters(), config.lr_actor, config.adam_beta1,
                                                 config.adam_beta2, config.adam_epsilon);
  auto critic_opt = nn::AdamState::for_parameters(critic.parameters(), config.lr_critic, config.adam_beta1,
                                                  config.adam_beta2, config.adam_epsilon);
  Network actor_target = actor;
  Network critic_target = critic;
  return Agent{std::move(actor),        std::move(critic),    std::move(actor_target),
               std::move(critic_target), std::move(actor_opt), std::move(critic_opt)};
}

Tensor concat_state_action(const Tensor& states, const Tensor& actions) {
  const Index batch = states.dim(0);
  if (actions.dim(0) != batch) throw std::invalid_argument("concat_state_action: batch sizes differ");
  const Index ds = states.size() / batch;
  const Index da = actions.size() / batch;
  Tensor joined({batch, ds + da});
  auto m = joined.matrix(ds + da, batch);
  m.topRows(ds) = states.matrix(ds, batch);
  m.bottomRows(da) = actions.matrix(da, batch);
  return joined;
}

Eigen::VectorXd critic_targets(const Eigen::VectorXd& rewards, const Tensor& next_states,
                               const Network& actor_target, const Network& critic_target, double discount) {
  const Tensor next_actions = nn::predict(actor_target, next_states);
  const Tensor q = nn::predict(critic_target, concat_state_action(next_states, next_actions));
  return rewards + discount * q.values();
}

double critic_target(double reward, const Eigen::VectorXd& next_state, const Network& actor_target,
                     const Network& critic_target_net, double discount) {
  return critic_targets(Eigen::VectorXd::Constant(1, reward), Tensor({1, next_state.size()}, next_state),
                        actor_target, critic_target_net, discount)[0];
}

CriticGradient critic_loss_gradient(const Network& critic, const Tensor& states, const Tensor& actions,
                                    const Eigen::VectorXd& targets) {
  const auto fwd = nn::forward(critic, concat_state_action(states, actions));
  const auto loss = nn::mse_loss(fwd.output, Tensor(fwd.output.shape(), targets));
  CriticGradient result;
  result.grads = nn::backward(critic, fwd.cache, loss.grad).param_grads;
  result.loss = loss.loss;
  result.mean_q = fwd.output.values().mean();
  return result;
}

ActorGradient actor_ascent_gradient(const Network& actor, const Network& critic, const Tensor& states) {
  const Index batch = states.dim(0);
  const auto actor_fwd = nn::forward(actor, states);
  const auto critic_fwd = nn::forward(critic, concat_state_action(states, actor_fwd.output));
  const Tensor upstream(critic_fwd.output.shape(),
                        Eigen::VectorXd::Constant(batch, 1.0 / static_cast<double>(batch)));
  const Tensor dq_dinput = nn::backward(critic, critic_fwd.cache, upstream).input_grad;
  const Index ds = states.size() / batch;
  const Index da = actor_fwd.output.size() / batch;
  Tensor dq_daction(actor_fwd.output.shape());
  dq_daction.matrix(da, batch) = dq_dinput.matrix(ds + da, batch).bottomRows(da);
  ActorGradient result;
  result.ascent = nn::backward(actor, actor_fwd.cache, dq_daction).param_grads;
  result.mean_q = critic_fwd.output.values().mean();
  return result;
}

void soft_update(const ParameterSet& train, ParameterSet& target, double eta) {
  if (!train.same_layout(target)) throw std::invalid_argument("soft_update: parameter layouts differ");
  for (std::size_t i = 0; i < train.size(); ++i) {
    target[i].values() = eta * train[i].values() + (1.0 - eta) * target[i].values();
  }
}

TrainHyper TrainHyper::from(const AgentConfig& agent) {
  return {agent.discount, static_cast<std::size_t>(agent.batch_size), agent.tau_actor, agent.tau_critic};
}

TrainDiagnostics train_step(Agent& agent, const ReplayBuffer& buffer, Rng& rng, const TrainHyper& hyper) {
  TrainDiagnostics diag;
  if (!buffer.full()) return diag;
  const auto picks = buffer.sample(rng, hyper.batch_size);
  const Index batch = static_cast<Index>(picks.size());
  const Index ds = buffer.at(0).state.size();
  const Index da = buffer.at(0).action.size();
  Tensor states({batch, ds}), actions({batch, da}), next({batch, ds});
  Eigen::VectorXd rewards(batch);
  for (Index b = 0; b < batch; ++b) {
    const Transition& t = buffer.at(picks[static_cast<std::size_t>(b)]);
    states.matrix(ds, batch).col(b) = t.state;
    actions.matrix(da, batch).col(b) = t.action;
    next.matrix(ds, batch).col(b) = t.next_state;
    rewards[b] = t.reward;
  }

  const Eigen::VectorXd targets = critic_targets(rewards, next, agent.actor_target, agent.critic_target, hyper.discount);
  const CriticGradient critic_grad = critic_loss_gradient(agent.critic, states, actions, targets);
  nn::adam_step(agent.critic.mutable_parameters(), critic_grad.grads, agent.critic_optimizer);

  ActorGradient actor_grad = actor_ascent_gradient(agent.actor, agent.critic, states);
  for (std::size_t i = 0; i < actor_grad.ascent.size(); ++i) actor_grad.ascent[i].values() *= -1.0;
  nn::adam_step(agent.actor.mutable_parameters(), actor_grad.ascent, agent.actor_optimizer);

  soft_update(agent.critic.parameters(), agent.critic_target.mutable_parameters(), hyper.tau_critic);
  soft_update(agent.actor.parameters(), agent.actor_target.mutable_parameters(), hyper.tau_actor);

  diag.trained = true;
  diag.critic_loss = critic_grad.loss;
  diag.mean_q = critic_grad.mean_q;
  return diag;
}

double lr_plateau_decay(std::span<const double> history, double lr, int patience, double factor) {
  if (patience < 1) throw std::invalid_argument("lr_plateau_decay: patience must be positive");
  const auto window = static_cast<std::size_t>(patience);
  if (history.size() < window) return lr;
  return history.back() <= history[history.size() - window] ? lr * factor : lr;
}

double PlateauTracker::observe(double best_reward) {
  history_.push_back(best_reward);
  if (lr_plateau_decay(history_, 1.0, patience_, factor_) == 1.0) return 1.0;
  history_.clear();
  return factor_;
}

// Training --------------------------------------------------------------------

TrainingResult run_training(const Scenario& scenario, const AgentConfig& config, Rng& rng,
                            const TrainingOptions& options) {
  const Dimensions dims = Dimensions::from(scenario.config);
  const WhiteningSchedule schedule = WhiteningSchedule::from(config);
  schedule.validate();
  if (config.episodes < 1 || config.steps < 1) throw std::invalid_argument("run_training: need E, T >= 1");
  if (config.batch_size < 1 || config.batch_size > config.replay_capacity) {
    throw std::invalid_argument("run_training: need 1 <= N_B <= C_er");
  }
  const TrainHyper hyper = TrainHyper::from(config);
  const double max_power = scenario.config.max_power;
  const PowerAllocation uniform = uniform_power(max_power, static_cast<int>(dims.users));

  TrainingResult result{Controls{}, -1.0, 0, {}, {}, make_agent(dims, config, rng)};
  Agent& agent = result.agent;
  const std::uint64_t episode_seed = rng();
  ReplayBuffer buffer(static_cast<std::size_t>(config.replay_capacity));
  PlateauTracker plateau(config.plateau_patience, config.plateau_factor);
  const int interval = std::max(1, config.diagnostics_interval);

  for (int episode = 0; episode < config.episodes; ++episode) {
    Rng ep_rng = make_stream(episode_seed, static_cast<std::uint64_t>(episode), "episode");
    const ChannelRealization channel = options.channel_source ? options.channel_source(episode, ep_rng) : scenario.draw_channel(ep_rng);
    buffer.clear();
    plateau.reset();

    Controls controls{PhaseConfiguration::random(ep_rng, dims.atoms, dims.layers), uniform};
    double reward = scenario.evaluate(controls.phases, controls.power, channel);
    Eigen::VectorXd state = build_state(reward, controls_to_action(controls.phases, controls.power, max_power),
                                        channel.G, dims);

    EpisodeSummary summary;
    summary.channel_checksum = channel_checksum(channel.G);
    summary.best_reward = -1.0;
    TrainDiagnostics last_diag;

    for (std::int64_t t = 0; t < config.steps; ++t) {
      const Eigen::VectorXd action = select_action(agent.actor, state, ep_rng, schedule, t);
      controls = action_to_controls(action, dims, max_power);
      if (options.uniform_power) controls.power = uniform;
      if (!is_feasible(controls.power, max_power) || !controls.phases.phases.allFinite()) {
        throw std::logic_error("run_training: infeasible controls produced");
      }
      reward = scenario.evaluate(controls.phases, controls.power, channel);
      Eigen::VectorXd next_state = build_state(reward, action, channel.G, dims);
      buffer.push({state, action, reward, next_state});
      state = std::move(next_state);

      if (reward > summary.best_reward) {
        summary.best_reward = reward;
        summary.best = controls;
      }

      const TrainDiagnostics diag = train_step(agent, buffer, ep_rng, hyper);
      if (diag.trained) {
        last_diag = diag;
        ++summary.train_steps;
        const double multiplier = plateau.observe(summary.best_reward);
        agent.actor_optimizer.learning_rate *= multiplier;
        agent.critic_optimizer.learning_rate *= multiplier;
      }

      if ((t + 1) % interval == 0 || t + 1 == config.steps) {
        result.trace.push_back({episode, t, reward, summary.best_reward, last_diag.critic_loss, last_diag.mean_q,
                                agent.actor_optimizer.learning_rate, agent.critic_optimizer.learning_rate,
                                noise_variance(t, schedule)});
      }
    }

    if (summary.best_reward > result.best_reward) {
      result.best_reward = summary.best_reward;
      result.best = summary.best;
      result.best_episode = episode;
    }
    result.episodes.push_back(std::move(summary));
  }
  return result;
}

void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace) {
  out << "episode,step,reward,best_reward,critic_loss,lr_actor,lr_critic,noise_variance\n";
  for (const TraceRow& row : trace) {
    out << row.episode << ',' << row.step << ',' << format_double(row.reward) << ','
        << format_double(row.best_reward) << ',' << format_double(row.critic_loss) << ','
        << format_double(row.lr_actor) << ',' << format_double(row.lr_critic) << ','
        << format_double(row.noise_variance) << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, std::span<const TraceRow> trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_trace_csv(out, trace);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

namespace {

constexpr const char* kNetworkPrefixes[] = {"actor.", "critic.", "actor_target.", "critic_target."};

void add_optimizer(nn::Checkpoint& ck, const std::string& prefix, const nn::AdamState& state) {
  ck.add_parameters(prefix + "m.", state.first_moment);
  ck.add_parameters(prefix + "v.", state.second_moment);
  ck.metadata[prefix + "step"] = std::to_string(state.step);
  ck.metadata[prefix + "lr"] = format_double(state.learning_rate);
  ck.metadata[prefix + "beta1"] = format_double(state.beta1);
  ck.metadata[prefix + "beta2"] = format_double(state.beta2);
  ck.metadata[prefix + "epsilon"] = format_double(state.epsilon);
}

const std::string& meta(const nn::Checkpoint& ck, const std::string& key) {
  const auto it = ck.metadata.find(key);
  if (it == ck.metadata.end()) throw std::runtime_error("agent checkpoint: missing '" + key + "'");
  return it->second;
}

void load_optimizer(const nn::Checkpoint& ck, const std::string& prefix, nn::AdamState& state) {
  ck.load_parameters(prefix + "m.", state.first_moment);
  ck.load_parameters(prefix + "v.", state.second_moment);
  state.step = parse_int(meta(ck, prefix + "step"));
  state.learning_rate = parse_double(meta(ck, prefix + "lr"));
  state.beta1 = parse_double(meta(ck, prefix + "beta1"));
  state.beta2 = parse_double(meta(ck, prefix + "beta2"));
  state.epsilon = parse_double(meta(ck, prefix + "epsilon"));
}

}  // namespace

nn::Checkpoint agent_checkpoint(const Agent& agent) {
  nn::Checkpoint ck;
  ck.metadata["kind"] = "ddpg-agent";
  const Network* nets[] = {&agent.actor, &agent.critic, &agent.actor_target, &agent.critic_target};
  for (int i = 0; i < 4; ++i) ck.add_parameters(kNetworkPrefixes[i], nets[i]->parameters());
  add_optimizer(ck, "adam.actor.", agent.actor_optimizer);
  add_optimizer(ck, "adam.critic.", agent.critic_optimizer);
  return ck;
}

void load_agent_checkpoint(const nn::Checkpoint& ck, Agent& agent) {
  Network* nets[] = {&agent.actor, &agent.critic, &agent.actor_target, &agent.critic_target};
  for (int i = 0; i < 4; ++i) ck.load_parameters(kNetworkPrefixes[i], nets[i]->mutable_parameters());
  load_optimizer(ck, "adam.actor.", agent.actor_optimizer);
  load_optimizer(ck, "adam.critic.", agent.critic_optimizer);
}

}  // namespace simdrl::rl
