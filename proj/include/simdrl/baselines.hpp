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

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "simdrl/channel.hpp"
#include "simdrl/config.hpp"
#include "simdrl/geometry.hpp"
#include "simdrl/metrics.hpp"
#include "simdrl/random.hpp"
#include "simdrl/scenario.hpp"

namespace simdrl {

struct WaterFillingResult {
  PowerAllocation power;
  double water_level = 0.0;  // mu
};

/// Maximises sum_m log(1 + p_m g_m / sigma_m^2) subject to sum p = P_max,
/// p >= 0: p_m = max(0, mu - sigma_m^2 / g_m). Entries with zero gain get no
/// power. The returned p satisfies p_m == mu - sigma_m^2/g_m bit-exactly on
/// the active set and sum(p) <= P_max. Throws std::invalid_argument if no
/// gain is positive.
WaterFillingResult water_filling(const Eigen::VectorXd& gains, const Eigen::VectorXd& noise, double max_power);

/// p_m = P_max / M.
PowerAllocation uniform_power(double max_power, int users);

/// Direct-link gain |g_m^T b_m|^2 and interference-plus-noise
/// sum_{k != m} p_k |g_m^T b_k|^2 + sigma_m^2 of every UE.
struct LinkBudget {
  Eigen::VectorXd direct_gain;
  Eigen::VectorXd interference_plus_noise;
};
LinkBudget link_budget(const Eigen::MatrixXcd& g, const Eigen::MatrixXcd& b, const PowerAllocation& power,
                       const Eigen::VectorXd& noise);

/// `rounds` passes of water-filling over the direct gains, treating the
/// interference at the previous pass's powers as noise. Starts from the
/// uniform allocation.
PowerAllocation iterative_water_filling(const Eigen::MatrixXcd& g, const Eigen::MatrixXcd& b,
                                        const Eigen::VectorXd& noise, double max_power, int rounds);

// Digital precoding without a SIM --------------------------------------------

struct PrecoderResult {
  Eigen::MatrixXcd precoder;  // M x M, unit-norm columns
  PowerAllocation power;
  double sum_rate = 0.0;
};

/// 2-norm condition number from the singular values.
double condition_number(const Eigen::MatrixXcd& h);

/// Zero forcing: columns of H^{-1} normalised to unit norm, water-filled
/// powers. Throws std::domain_error when cond(H) exceeds `max_condition`.
PrecoderResult zf_precoder(const Eigen::MatrixXcd& h, double max_power, const Eigen::VectorXd& noise,
                           double max_condition = 1e8, int wf_rounds = 1);

/// Regularised inverse H^H (H H^H + (M sigma^2 / P_max) I)^{-1} with
/// unit-norm columns; sigma^2 is the mean noise power. Sum rate uses the full
/// interference-aware SINR.
PrecoderResult mmse_precoder(const Eigen::MatrixXcd& h, double max_power, const Eigen::VectorXd& noise,
                             int wf_rounds = 1);

/// Correlation of the M-antenna lambda/2 BS array.
CorrelationModel bs_array_correlation(const SimConfig& config);

/// BS-to-UE channel of the digital benchmark: the correlated Rayleigh model
/// over the BS array with the same per-UE path loss as the SIM channel.
ChannelRealization draw_direct_channel(Rng& rng, const CorrelationModel& bs_corr,
                                       const ChannelRealization& sim_channel);

// SIM-assisted baselines ------------------------------------------------------

struct SimSchemeResult {
  PhaseConfiguration phases;
  PowerAllocation power;
  double sum_rate = 0.0;
};

/// Random phases on [0, 2 pi) with iterative water-filling.
SimSchemeResult random_phase_baseline(Rng& rng, const Scenario& scenario, const ChannelRealization& channel,
                                      int wf_rounds = 1);

struct CodebookResult {
  std::vector<double> average_rates;  // per codeword, over the channel set
  std::size_t best_index = 0;
  double best_average = 0.0;
  PhaseConfiguration best;
};

/// K random codewords, each scored by its average water-filled sum rate over
/// `channels`; reports the best average. Codeword k is the k-th draw from
/// `rng`, so codebooks from equal seeds are nested in K.
CodebookResult codebook_baseline(Rng& rng, const Scenario& scenario, std::span<const ChannelRealization> channels,
                                 int codebook_size, int wf_rounds = 1);

struct AoOptions {
  int iterations = 50;
  int gradient_steps = 5;
  double initial_step = 0.1;
  double armijo = 1e-4;
  int max_halvings = 30;
  int wf_rounds = 1;

  static AoOptions from(const BaselineConfig& config);
};

struct AoResult {
  PhaseConfiguration phases;
  PowerAllocation power;
  double sum_rate = 0.0;
  std::vector<double> trace;  // sum rate after initialisation and each round
};

/// Gradient of the sum rate with respect to every phase angle (N x L), by
/// back-propagating through the layer cascade.
Eigen::MatrixXd sum_rate_phase_gradient(const PropagationMatrices& mats, const Eigen::MatrixXd& phases,
                                        const PowerAllocation& power, const Eigen::MatrixXcd& g,
                                        const Eigen::VectorXd& noise);

/// Alternating optimisation. Starts at the random-phase baseline (same draw
/// from `rng`), then alternates backtracking gradient ascent on the phases
/// with water-filling on the powers. A power update is kept only if it does
/// not lower the sum rate, so the trace is nondecreasing. The ascent
/// direction is the gradient scaled to unit max-norm, so the step is the
/// largest per-atom phase move in radians. Throws std::domain_error on a
/// non-finite gradient.
AoResult ao_optimize(Rng& rng, const PropagationMatrices& mats, const Eigen::MatrixXcd& g,
                     const Eigen::VectorXd& noise, double max_power, const AoOptions& options);

inline AoResult ao_optimize(Rng& rng, const Scenario& scenario, const ChannelRealization& channel,
                            const AoOptions& options) {
  return ao_optimize(rng, scenario.mats, channel.G, scenario.noise, scenario.config.max_power, options);
}

}  // namespace simdrl
