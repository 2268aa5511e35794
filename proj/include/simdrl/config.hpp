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
#include <iosfwd>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace simdrl {

/// Physical scenario: SIM layout, propagation and link budget. SI units,
/// linear power units throughout.
struct SimConfig {
  int num_users = 4;          // M
  int atoms_per_layer = 49;   // N, perfect square
  int num_layers = 4;         // L
  double wavelength = 10.7e-3;
  double thickness = 5 * 10.7e-3;                    // D
  double atom_area = 10.7e-3 * 10.7e-3 / 4;          // s_a
  double atom_spacing = 10.7e-3 / 2;                 // r_e
  double max_power = 1e-2;                           // P_max [W]
  Eigen::VectorXd noise_power = Eigen::VectorXd::Constant(1, 3.981071705534985e-14);
  double ref_path_loss = 3.1622776601683794e-4;      // C0, linear
  double path_loss_exponent = 3.5;                   // alpha
  double bs_height = 10.0;                           // H_b
  double inner_radius = 100.0;
  double outer_radius = 250.0;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;

  /// d_s = D/(L-1); a single-layer SIM uses the full thickness.
  double interlayer_spacing() const;

  int grid_side() const;

  /// Noise power of every UE; a single stored value is broadcast to M.
  Eigen::VectorXd noise_vector() const;
};

/// DDPG hyperparameters.
struct AgentConfig {
  double discount = 0.99;            // mu
  double lr_actor = 4e-4;            // gamma_a
  double lr_critic = 4e-4;           // gamma_c
  int plateau_patience = 200;        // iota_p
  double plateau_factor = 0.8;       // iota_f
  double tau_actor = 0.01;           // eta_a
  double tau_critic = 0.01;          // eta_c
  int episodes = 50;                 // E
  int steps = 26000;                 // T
  int batch_size = 32;               // N_B
  int replay_capacity = 5000;        // C_er
  double noise_bound = 2.0;          // w_a
  double noise_v0 = 2.0;
  double noise_decay = 0.95;         // zeta
  double noise_gap = 100.0;          // t_gap
  int conv_channels = 16;            // c
  int fc_width = 0;                  // 0 selects max(256, 4N)
  double leaky_slope = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int diagnostics_interval = 100;

  int resolved_fc_width(int atoms_per_layer) const;
};

/// Knobs of the comparison schemes.
struct BaselineConfig {
  int water_filling_rounds = 1;
  int ao_iterations = 50;
  int ao_gradient_steps = 5;        // phase ascent steps per AO round
  double ao_initial_step = 0.1;     // rad, largest per-atom move
  double ao_armijo = 1e-4;
  int ao_max_halvings = 30;
  int codebook_size = 0;            // 0 selects the DRL step count T
  double max_condition_number = 1e8;

  int resolved_codebook_size(const AgentConfig& agent) const;
};

struct ScenarioConfig {
  SimConfig sim;
  AgentConfig agent;
  BaselineConfig baselines;
  std::string sweep_values;  // optional comma list consumed by the harness
};

double db_to_linear(double db);
double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

/// Full parameter set of the reference scenario (28 GHz, M=4, L=4, N=49).
ScenarioConfig reference_config();

/// Applies one `key = value` assignment. Throws std::invalid_argument on an
/// unknown key or a malformed value.
void apply_setting(ScenarioConfig& config, std::string_view key, std::string_view value);

/// Parses `key = value` lines on top of `base`. '#' starts a comment.
ScenarioConfig parse_config(std::istream& in, ScenarioConfig base = reference_config());
ScenarioConfig load_config(const std::filesystem::path& path);

/// Writes every key so that parse_config reproduces `config` exactly.
void write_config(std::ostream& out, const ScenarioConfig& config);

}  // namespace simdrl
