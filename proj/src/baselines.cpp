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

#include "simdrl/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <Eigen/SVD>

namespace simdrl {

WaterFillingResult water_filling(const Eigen::VectorXd& gains, const Eigen::VectorXd& noise, double max_power) {
  const Eigen::Index m = gains.size();
  if (noise.size() != m) throw std::invalid_argument("water_filling: dimension mismatch");
  if (!(max_power > 0)) throw std::invalid_argument("water_filling: power budget must be positive");
  if ((gains.array() < 0).any() || !gains.allFinite()) {
    throw std::invalid_argument("water_filling: gains must be finite and non-negative");
  }

  // floor_m = sigma_m^2 / g_m; users are filled in increasing floor order.
  std::vector<Eigen::Index> order;
  Eigen::VectorXd floor(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    floor(i) = gains(i) > 0 ? noise(i) / gains(i) : std::numeric_limits<double>::infinity();
    if (gains(i) > 0) order.push_back(i);
  }
  if (order.empty()) throw std::invalid_argument("water_filling: all gains are zero");
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return floor(a) < floor(b); });

  double level = 0.0;
  double floor_sum = 0.0;
  std::size_t active = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    floor_sum += floor(order[k]);
    const double candidate = (max_power + floor_sum) / static_cast<double>(k + 1);
    if (candidate <= floor(order[k])) break;
    level = candidate;
    active = k + 1;
  }

  auto allocate = [&](double mu) {
    PowerAllocation p = PowerAllocation::Zero(m);
    for (std::size_t k = 0; k < active; ++k) p(order[k]) = std::max(0.0, mu - floor(order[k]));
    return p;
  };
  PowerAllocation p = allocate(level);
  // Rounding can push the total a few ulps over budget; lower the level
  // until the allocation is feasible.
  while (p.sum() > max_power) {
    level = std::nextafter(level, 0.0);
    p = allocate(level);
  }
  return {p, level};
}

PowerAllocation uniform_power(double max_power, int users) {
  if (users < 1) throw std::invalid_argument("uniform_power: need at least one user");
  return PowerAllocation::Constant(users, max_power / users);
}

LinkBudget link_budget(const Eigen::MatrixXcd& g, const Eigen::MatrixXcd& b, const PowerAllocation& power,
                       const Eigen::VectorXd& noise) {
  Eigen::MatrixXd received = (g * b).cwiseAbs2();
  LinkBudget budget;
  budget.direct_gain = received.diagonal();
  received = received * power.asDiagonal();
  received.diagonal().setZero();
  budget.interference_plus_noise = received.rowwise().sum() + noise;
  return budget;
}

PowerAllocation iterative_water_filling(const Eigen::MatrixXcd& g, const Eigen::MatrixXcd& b,
                                        const Eigen::VectorXd& noise, double max_power, int rounds) {
  PowerAllocation p = uniform_power(max_power, static_cast<int>(g.rows()));
  for (int round = 0; round < rounds; ++round) {
    const LinkBudget budget = link_budget(g, b, p, noise);
    if ((budget.direct_gain.array() <= 0).all()) break;
    p = water_filling(budget.direct_gain, budget.interference_plus_noise, max_power).power;
  }
  return p;
}

double condition_number(const Eigen::MatrixXcd& h) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(h);
  const auto& s = svd.singularValues();
  if (s(s.size() - 1) == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / s(s.size() - 1);
}

namespace {

PrecoderResult finish_precoder(const Eigen::MatrixXcd& h, Eigen::MatrixXcd w, double max_power,
                               const Eigen::VectorXd& noise, int wf_rounds) {
  w = w.colwise().normalized().eval();
  PrecoderResult result;
  result.power = iterative_water_filling(h, w, noise, max_power, wf_rounds);
  result.sum_rate = sum_rate(sinr(h, w, result.power, noise));
  result.precoder = std::move(w);
  return result;
}

}  // namespace

PrecoderResult zf_precoder(const Eigen::MatrixXcd& h, double max_power, const Eigen::VectorXd& noise,
                           double max_condition, int wf_rounds) {
  if (h.rows() != h.cols()) throw std::invalid_argument("zf_precoder: channel must be square");
  if (!(condition_number(h) <= max_condition)) throw std::domain_error("zf_precoder: channel is singular");
  return finish_precoder(h, h.fullPivLu().inverse(), max_power, noise, wf_rounds);
}

PrecoderResult mmse_precoder(const Eigen::MatrixXcd& h, double max_power, const Eigen::VectorXd& noise,
                             int wf_rounds) {
  if (h.rows() != h.cols()) throw std::invalid_argument("mmse_precoder: channel must be square");
  const Eigen::Index m = h.rows();
  const double regulariser = static_cast<double>(m) * noise.mean() / max_power;
  const Eigen::MatrixXcd gram = h * h.adjoint() + regulariser * Eigen::MatrixXcd::Identity(m, m);
  // W = H^H gram^{-1} = (gram^{-1} H)^H since gram is Hermitian.
  const Eigen::MatrixXcd w = gram.ldlt().solve(h).adjoint();
  return finish_precoder(h, w, max_power, noise, wf_rounds);
}

CorrelationModel bs_array_correlation(const SimConfig& config) {
  return correlation_matrix(build_geometry(config).antennas, config.wavelength);
}

ChannelRealization draw_direct_channel(Rng& rng, const CorrelationModel& bs_corr,
                                       const ChannelRealization& sim_channel) {
  ChannelRealization direct = sample_channel(rng, bs_corr, sim_channel.path_loss);
  direct.ue_distances = sim_channel.ue_distances;
  return direct;
}

SimSchemeResult random_phase_baseline(Rng& rng, const Scenario& scenario, const ChannelRealization& channel,
                                      int wf_rounds) {
  const SimConfig& config = scenario.config;
  SimSchemeResult result;
  result.phases = PhaseConfiguration::random(rng, config.atoms_per_layer, config.num_layers);
  const Eigen::MatrixXcd b = sim_response(result.phases, scenario.mats);
  result.power = iterative_water_filling(channel.G, b, scenario.noise, config.max_power, wf_rounds);
  result.sum_rate = sum_rate(sinr(channel.G, b, result.power, scenario.noise));
  return result;
}

CodebookResult codebook_baseline(Rng& rng, const Scenario& scenario, std::span<const ChannelRealization> channels,
                                 int codebook_size, int wf_rounds) {
  if (codebook_size < 1) throw std::invalid_argument("codebook_baseline: codebook size must be at least 1");
  if (channels.empty()) throw std::invalid_argument("codebook_baseline: empty channel set");
  const SimConfig& config = scenario.config;
  CodebookResult result;
  result.average_rates.reserve(static_cast<std::size_t>(codebook_size));
  for (int k = 0; k < codebook_size; ++k) {
    PhaseConfiguration codeword = PhaseConfiguration::random(rng, config.atoms_per_layer, config.num_layers);
    const Eigen::MatrixXcd b = sim_response(codeword, scenario.mats);
    double total = 0.0;
    for (const auto& channel : channels) {
      const PowerAllocation p = iterative_water_filling(channel.G, b, scenario.noise, config.max_power, wf_rounds);
      total += sum_rate(sinr(channel.G, b, p, scenario.noise));
    }
    const double average = total / static_cast<double>(channels.size());
    result.average_rates.push_back(average);
    if (k == 0 || average > result.best_average) {
      result.best_average = average;
      result.best_index = static_cast<std::size_t>(k);
      result.best = std::move(codeword);
    }
  }
  return result;
}

AoOptions AoOptions::from(const BaselineConfig& config) {
  AoOptions options;
  options.iterations = config.ao_iterations;
  options.gradient_steps = config.ao_gradient_steps;
  options.initial_step = config.ao_initial_step;
  options.armijo = config.ao_armijo;
  options.max_halvings = config.ao_max_halvings;
  options.wf_rounds = config.water_filling_rounds;
  return options;
}

Eigen::MatrixXd sum_rate_phase_gradient(const PropagationMatrices& mats, const Eigen::MatrixXd& phases,
                                        const PowerAllocation& power, const Eigen::MatrixXcd& g,
                                        const Eigen::VectorXd& noise) {
  const Eigen::Index layers = phases.cols();
  if (layers != mats.num_layers() || phases.rows() != mats.num_atoms()) {
    throw std::invalid_argument("sum_rate_phase_gradient: phase configuration does not match propagation matrices");
  }
  const Eigen::MatrixXcd coeff = phases.unaryExpr([](double a) { return std::polar(1.0, a); });

  // Forward: z[l] is the field arriving at layer l, before its phase shifts.
  std::vector<Eigen::MatrixXcd> z(static_cast<std::size_t>(layers));
  z[0] = mats.input;
  Eigen::MatrixXcd y = coeff.col(0).asDiagonal() * z[0];
  for (Eigen::Index l = 1; l < layers; ++l) {
    z[static_cast<std::size_t>(l)] = mats.interlayer[static_cast<std::size_t>(l - 1)] * y;
    y = coeff.col(l).asDiagonal() * z[static_cast<std::size_t>(l)];
  }
  const Eigen::MatrixXcd a = g * y;  // a(m, k) = g_m^T b_k

  // d C / d |a(m,k)|^2 = (p_k / S_m - [k != m] p_k / I_m) / ln 2
  const Eigen::MatrixXd received = a.cwiseAbs2() * power.asDiagonal();
  const Eigen::VectorXd total = received.rowwise().sum() + noise;
  const Eigen::VectorXd interference = total - received.diagonal();
  Eigen::MatrixXd d = total.cwiseInverse().asDiagonal() * Eigen::MatrixXd::Ones(a.rows(), a.cols()) *
                      power.asDiagonal();
  Eigen::MatrixXd d_interference = interference.cwiseInverse().asDiagonal() *
                                   Eigen::MatrixXd::Ones(a.rows(), a.cols()) * power.asDiagonal();
  d_interference.diagonal().setZero();
  d = (d - d_interference) / std::numbers::ln2;
  const Eigen::MatrixXcd e = d.cast<std::complex<double>>().cwiseProduct(a.conjugate());

  // Backward: u is the M x N map from layer-l output to the UEs, so that
  // a = u diag(coeff_l) z[l].
  Eigen::MatrixXd grad(phases.rows(), layers);
  Eigen::MatrixXcd u = g;
  for (Eigen::Index l = layers - 1; l >= 0; --l) {
    const Eigen::MatrixXcd ze = z[static_cast<std::size_t>(l)] * e.transpose();  // N x M
    const Eigen::VectorXcd inner = u.transpose().cwiseProduct(ze).rowwise().sum();
    grad.col(l) = -2.0 * coeff.col(l).cwiseProduct(inner).imag();
    if (l > 0) u = u * coeff.col(l).asDiagonal() * mats.interlayer[static_cast<std::size_t>(l - 1)];
  }
  return grad;
}

AoResult ao_optimize(Rng& rng, const PropagationMatrices& mats, const Eigen::MatrixXcd& g,
                     const Eigen::VectorXd& noise, double max_power, const AoOptions& options) {
  if (options.iterations < 1) throw std::invalid_argument("ao_optimize: need at least one iteration");
  auto rate = [&](const Eigen::MatrixXd& phases, const PowerAllocation& p) {
    return evaluate(mats, phases, p, g, noise);
  };

  AoResult result;
  result.phases = PhaseConfiguration::random(rng, mats.num_atoms(), mats.num_layers());
  result.power =
      iterative_water_filling(g, sim_response(result.phases, mats), noise, max_power, options.wf_rounds);
  result.sum_rate = rate(result.phases.phases, result.power);
  result.trace.push_back(result.sum_rate);

  for (int iter = 0; iter < options.iterations; ++iter) {
    bool moved = false;
    for (int step = 0; step < options.gradient_steps; ++step) {
      const Eigen::MatrixXd grad = sum_rate_phase_gradient(mats, result.phases.phases, result.power, g, noise);
      if (!grad.allFinite()) throw std::domain_error("ao_optimize: non-finite phase gradient");
      const double scale = grad.cwiseAbs().maxCoeff();
      if (scale == 0.0) break;
      const Eigen::MatrixXd direction = grad / scale;
      const double slope = grad.cwiseProduct(direction).sum();
      double length = options.initial_step;
      bool accepted = false;
      for (int halving = 0; halving <= options.max_halvings; ++halving, length *= 0.5) {
        Eigen::MatrixXd candidate = result.phases.phases + length * direction;
        const double candidate_rate = rate(candidate, result.power);
        if (candidate_rate >= result.sum_rate + options.armijo * length * slope) {
          result.phases.phases = std::move(candidate);
          result.sum_rate = candidate_rate;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
      moved = true;
    }

    bool repowered = false;
    if (moved) {
      PowerAllocation p =
          iterative_water_filling(g, sim_response(result.phases, mats), noise, max_power, options.wf_rounds);
      const double candidate_rate = rate(result.phases.phases, p);
      if (candidate_rate >= result.sum_rate) {
        repowered = candidate_rate > result.sum_rate || p != result.power;
        result.power = std::move(p);
        result.sum_rate = candidate_rate;
      }
    }
    result.trace.push_back(result.sum_rate);
    if (!moved && !repowered) break;
  }
  return result;
}

}  // namespace simdrl
