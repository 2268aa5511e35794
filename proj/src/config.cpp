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

#include "simdrl/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include "simdrl/text.hpp"

namespace simdrl {

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument("SimConfig: " + message);
}

int as_int(std::string_view value) { return static_cast<int>(parse_int(value)); }

Eigen::VectorXd as_vector(std::string_view value) {
  const auto list = parse_double_list(value);
  if (list.empty()) throw std::invalid_argument("empty list");
  return Eigen::Map<const Eigen::VectorXd>(list.data(), static_cast<Eigen::Index>(list.size()));
}

using Setter = std::function<void(ScenarioConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& absolute_setters() {
  static const std::map<std::string, Setter, std::less<>> setters = {
      {"M", [](ScenarioConfig& c, std::string_view v) { c.sim.num_users = as_int(v); }},
      {"N", [](ScenarioConfig& c, std::string_view v) { c.sim.atoms_per_layer = as_int(v); }},
      {"L", [](ScenarioConfig& c, std::string_view v) { c.sim.num_layers = as_int(v); }},
      {"lambda", [](ScenarioConfig& c, std::string_view v) { c.sim.wavelength = parse_double(v); }},
      {"D", [](ScenarioConfig& c, std::string_view v) { c.sim.thickness = parse_double(v); }},
      {"s_a", [](ScenarioConfig& c, std::string_view v) { c.sim.atom_area = parse_double(v); }},
      {"r_e", [](ScenarioConfig& c, std::string_view v) { c.sim.atom_spacing = parse_double(v); }},
      {"P_max", [](ScenarioConfig& c, std::string_view v) { c.sim.max_power = parse_double(v); }},
      {"P_max_dbm",
       [](ScenarioConfig& c, std::string_view v) { c.sim.max_power = dbm_to_watts(parse_double(v)); }},
      {"sigma_sq", [](ScenarioConfig& c, std::string_view v) { c.sim.noise_power = as_vector(v); }},
      {"sigma_sq_dbm",
       [](ScenarioConfig& c, std::string_view v) {
         c.sim.noise_power = as_vector(v).unaryExpr([](double x) { return dbm_to_watts(x); });
       }},
      {"C0", [](ScenarioConfig& c, std::string_view v) { c.sim.ref_path_loss = parse_double(v); }},
      {"C0_db",
       [](ScenarioConfig& c, std::string_view v) { c.sim.ref_path_loss = db_to_linear(parse_double(v)); }},
      {"alpha", [](ScenarioConfig& c, std::string_view v) { c.sim.path_loss_exponent = parse_double(v); }},
      {"H_b", [](ScenarioConfig& c, std::string_view v) { c.sim.bs_height = parse_double(v); }},
      {"R_inner", [](ScenarioConfig& c, std::string_view v) { c.sim.inner_radius = parse_double(v); }},
      {"R_outer", [](ScenarioConfig& c, std::string_view v) { c.sim.outer_radius = parse_double(v); }},

      {"mu", [](ScenarioConfig& c, std::string_view v) { c.agent.discount = parse_double(v); }},
      {"lr_actor", [](ScenarioConfig& c, std::string_view v) { c.agent.lr_actor = parse_double(v); }},
      {"lr_critic", [](ScenarioConfig& c, std::string_view v) { c.agent.lr_critic = parse_double(v); }},
      {"iota_p", [](ScenarioConfig& c, std::string_view v) { c.agent.plateau_patience = as_int(v); }},
      {"iota_f", [](ScenarioConfig& c, std::string_view v) { c.agent.plateau_factor = parse_double(v); }},
      {"eta_actor", [](ScenarioConfig& c, std::string_view v) { c.agent.tau_actor = parse_double(v); }},
      {"eta_critic", [](ScenarioConfig& c, std::string_view v) { c.agent.tau_critic = parse_double(v); }},
      {"E", [](ScenarioConfig& c, std::string_view v) { c.agent.episodes = as_int(v); }},
      {"T", [](ScenarioConfig& c, std::string_view v) { c.agent.steps = as_int(v); }},
      {"N_B", [](ScenarioConfig& c, std::string_view v) { c.agent.batch_size = as_int(v); }},
      {"C_er", [](ScenarioConfig& c, std::string_view v) { c.agent.replay_capacity = as_int(v); }},
      {"w_a", [](ScenarioConfig& c, std::string_view v) { c.agent.noise_bound = parse_double(v); }},
      {"v0", [](ScenarioConfig& c, std::string_view v) { c.agent.noise_v0 = parse_double(v); }},
      {"zeta", [](ScenarioConfig& c, std::string_view v) { c.agent.noise_decay = parse_double(v); }},
      {"t_gap", [](ScenarioConfig& c, std::string_view v) { c.agent.noise_gap = parse_double(v); }},
      {"conv_channels", [](ScenarioConfig& c, std::string_view v) { c.agent.conv_channels = as_int(v); }},
      {"fc_width", [](ScenarioConfig& c, std::string_view v) { c.agent.fc_width = as_int(v); }},
      {"leaky_slope", [](ScenarioConfig& c, std::string_view v) { c.agent.leaky_slope = parse_double(v); }},
      {"adam_beta1", [](ScenarioConfig& c, std::string_view v) { c.agent.adam_beta1 = parse_double(v); }},
      {"adam_beta2", [](ScenarioConfig& c, std::string_view v) { c.agent.adam_beta2 = parse_double(v); }},
      {"adam_epsilon", [](ScenarioConfig& c, std::string_view v) { c.agent.adam_epsilon = parse_double(v); }},
      {"diagnostics_interval",
       [](ScenarioConfig& c, std::string_view v) { c.agent.diagnostics_interval = as_int(v); }},

      {"wf_rounds", [](ScenarioConfig& c, std::string_view v) { c.baselines.water_filling_rounds = as_int(v); }},
      {"ao_iterations", [](ScenarioConfig& c, std::string_view v) { c.baselines.ao_iterations = as_int(v); }},
      {"ao_gradient_steps",
       [](ScenarioConfig& c, std::string_view v) { c.baselines.ao_gradient_steps = as_int(v); }},
      {"ao_initial_step",
       [](ScenarioConfig& c, std::string_view v) { c.baselines.ao_initial_step = parse_double(v); }},
      {"ao_armijo", [](ScenarioConfig& c, std::string_view v) { c.baselines.ao_armijo = parse_double(v); }},
      {"ao_max_halvings",
       [](ScenarioConfig& c, std::string_view v) { c.baselines.ao_max_halvings = as_int(v); }},
      {"codebook_size", [](ScenarioConfig& c, std::string_view v) { c.baselines.codebook_size = as_int(v); }},
      {"max_condition_number",
       [](ScenarioConfig& c, std::string_view v) { c.baselines.max_condition_number = parse_double(v); }},

      {"sweep_values", [](ScenarioConfig& c, std::string_view v) { c.sweep_values = std::string(trim(v)); }},
  };
  return setters;
}

// Lengths expressed in wavelengths; applied after every absolute key so the
// result does not depend on the order of lines in a file.
const std::map<std::string, Setter, std::less<>>& relative_setters() {
  static const std::map<std::string, Setter, std::less<>> setters = {
      {"D_lambda",
       [](ScenarioConfig& c, std::string_view v) { c.sim.thickness = parse_double(v) * c.sim.wavelength; }},
      {"s_a_lambda2",
       [](ScenarioConfig& c, std::string_view v) {
         c.sim.atom_area = parse_double(v) * c.sim.wavelength * c.sim.wavelength;
       }},
      {"r_e_lambda",
       [](ScenarioConfig& c, std::string_view v) { c.sim.atom_spacing = parse_double(v) * c.sim.wavelength; }},
  };
  return setters;
}

}  // namespace

void SimConfig::validate() const {
  require(num_users >= 1, "M must be at least 1");
  require(num_layers >= 1, "L must be at least 1");
  require(atoms_per_layer >= num_users, "N must be at least M");
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(atoms_per_layer))));
  require(side * side == atoms_per_layer, "N must be a perfect square");
  require(wavelength > 0 && thickness > 0 && atom_area > 0 && atom_spacing > 0,
          "lengths must be strictly positive");
  require(bs_height > 0, "H_b must be positive");
  require(inner_radius > 0 && inner_radius < outer_radius, "annulus needs 0 < R_inner < R_outer");
  require(max_power > 0, "P_max must be positive");
  require(ref_path_loss > 0, "C0 must be positive");
  require(noise_power.size() == 1 || noise_power.size() == num_users,
          "sigma_sq must hold one value or M values");
  require((noise_power.array() > 0).all(), "noise powers must be positive");
}

double SimConfig::interlayer_spacing() const {
  return num_layers >= 2 ? thickness / (num_layers - 1) : thickness;
}

int SimConfig::grid_side() const {
  return static_cast<int>(std::lround(std::sqrt(static_cast<double>(atoms_per_layer))));
}

Eigen::VectorXd SimConfig::noise_vector() const {
  if (noise_power.size() == 1) return Eigen::VectorXd::Constant(num_users, noise_power(0));
  return noise_power;
}

int AgentConfig::resolved_fc_width(int atoms_per_layer) const {
  return fc_width > 0 ? fc_width : std::max(256, 4 * atoms_per_layer);
}

int BaselineConfig::resolved_codebook_size(const AgentConfig& agent) const {
  return codebook_size > 0 ? codebook_size : agent.steps;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts * 1e3); }

ScenarioConfig reference_config() {
  ScenarioConfig config;
  SimConfig& sim = config.sim;
  sim.num_users = 4;
  sim.atoms_per_layer = 49;
  sim.num_layers = 4;
  sim.wavelength = 10.7e-3;
  sim.thickness = 5 * sim.wavelength;
  sim.atom_area = sim.wavelength * sim.wavelength / 4;
  sim.atom_spacing = sim.wavelength / 2;
  sim.bs_height = 10.0;
  sim.inner_radius = 100.0;
  sim.outer_radius = 250.0;
  sim.ref_path_loss = db_to_linear(-35.0);
  sim.path_loss_exponent = 3.5;
  sim.max_power = dbm_to_watts(10.0);
  sim.noise_power = Eigen::VectorXd::Constant(1, dbm_to_watts(-104.0));
  config.agent = AgentConfig{};
  config.baselines = BaselineConfig{};
  return config;
}

void apply_setting(ScenarioConfig& config, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  try {
    if (auto it = absolute_setters().find(key); it != absolute_setters().end()) {
      it->second(config, value);
      return;
    }
    if (auto it = relative_setters().find(key); it != relative_setters().end()) {
      it->second(config, value);
      return;
    }
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("config key '" + std::string(key) + "': " + e.what());
  }
  throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
}

ScenarioConfig parse_config(std::istream& in, ScenarioConfig base) {
  std::vector<std::pair<std::string, std::string>> relative;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::string_view view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_number) + ": expected key = value");
    }
    const auto key = trim(view.substr(0, eq));
    const auto value = trim(view.substr(eq + 1));
    if (relative_setters().contains(key)) {
      relative.emplace_back(std::string(key), std::string(value));
      continue;
    }
    apply_setting(base, key, value);
  }
  for (const auto& [key, value] : relative) apply_setting(base, key, value);
  return base;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  try {
    return parse_config(in);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void write_config(std::ostream& out, const ScenarioConfig& c) {
  auto put = [&out](const char* key, auto value) {
    if constexpr (std::is_integral_v<decltype(value)>) {
      out << key << " = " << value << '\n';
    } else {
      out << key << " = " << format_double(value) << '\n';
    }
  };
  const SimConfig& s = c.sim;
  put("M", s.num_users);
  put("N", s.atoms_per_layer);
  put("L", s.num_layers);
  put("lambda", s.wavelength);
  put("D", s.thickness);
  put("s_a", s.atom_area);
  put("r_e", s.atom_spacing);
  put("P_max", s.max_power);
  out << "sigma_sq = ";
  for (Eigen::Index i = 0; i < s.noise_power.size(); ++i) {
    out << (i ? "," : "") << format_double(s.noise_power(i));
  }
  out << '\n';
  put("C0", s.ref_path_loss);
  put("alpha", s.path_loss_exponent);
  put("H_b", s.bs_height);
  put("R_inner", s.inner_radius);
  put("R_outer", s.outer_radius);

  const AgentConfig& a = c.agent;
  put("mu", a.discount);
  put("lr_actor", a.lr_actor);
  put("lr_critic", a.lr_critic);
  put("iota_p", a.plateau_patience);
  put("iota_f", a.plateau_factor);
  put("eta_actor", a.tau_actor);
  put("eta_critic", a.tau_critic);
  put("E", a.episodes);
  put("T", a.steps);
  put("N_B", a.batch_size);
  put("C_er", a.replay_capacity);
  put("w_a", a.noise_bound);
  put("v0", a.noise_v0);
  put("zeta", a.noise_decay);
  put("t_gap", a.noise_gap);
  put("conv_channels", a.conv_channels);
  put("fc_width", a.fc_width);
  put("leaky_slope", a.leaky_slope);
  put("adam_beta1", a.adam_beta1);
  put("adam_beta2", a.adam_beta2);
  put("adam_epsilon", a.adam_epsilon);
  put("diagnostics_interval", a.diagnostics_interval);

  const BaselineConfig& b = c.baselines;
  put("wf_rounds", b.water_filling_rounds);
  put("ao_iterations", b.ao_iterations);
  put("ao_gradient_steps", b.ao_gradient_steps);
  put("ao_initial_step", b.ao_initial_step);
  put("ao_armijo", b.ao_armijo);
  put("ao_max_halvings", b.ao_max_halvings);
  put("codebook_size", b.codebook_size);
  put("max_condition_number", b.max_condition_number);
  if (!c.sweep_values.empty()) out << "sweep_values = " << c.sweep_values << '\n';
}

}  // namespace simdrl
