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

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "simdrl/geometry.hpp"
#include "simdrl/nn/network.hpp"
#include "simdrl/random.hpp"

namespace simdrl::validation {

// Scalar reference implementations ---------------------------------------------
//
// Each oracle is written with plain loops and std::complex so that it shares
// no code path with the vectorised library routines it checks.

/// (spacing * area / r) * (1 / (2 pi r) - j / lambda) * exp(j 2 pi r / lambda).
std::complex<double> scalar_propagation_coefficient(double distance, double spacing, double area,
                                                    double wavelength);

/// B = Phi^L W^L ... Phi^1 W^1 by explicit triple loops.
Eigen::MatrixXcd scalar_sim_response(const Eigen::MatrixXd& phases, const PropagationMatrices& mats);

/// Per-user SINR by explicit sums over users and atoms.
std::vector<double> scalar_sinr(const Eigen::MatrixXcd& g, const Eigen::MatrixXcd& b, const Eigen::VectorXd& power,
                                const Eigen::VectorXd& noise);

double scalar_sum_rate(const std::vector<double>& sinr);

/// sum_m log2(1 + p_m g_m / sigma_m^2) for parallel interference-free links.
double parallel_sum_rate(const Eigen::VectorXd& gains, const Eigen::VectorXd& noise, const Eigen::VectorXd& power);

struct GridSearchResult {
  Eigen::VectorXd power;
  double sum_rate = 0.0;
};

/// Brute-force maximiser of parallel_sum_rate over the full-budget simplex
/// for two or three users: a uniform grid of `resolution` steps per axis,
/// then `refinements` zoomed grids around the incumbent.
GridSearchResult simplex_grid_search(const Eigen::VectorXd& gains, const Eigen::VectorXd& noise, double max_power,
                                     int resolution = 200, int refinements = 6);

/// Single-parameter Adam with bias correction.
struct ScalarAdam {
  double m = 0.0;
  double v = 0.0;
  long step = 0;

  /// Updates `theta` in place with gradient `grad`.
  void update(double& theta, double grad, double lr, double beta1, double beta2, double epsilon);
};

// Finite-difference gradient checks --------------------------------------------

struct GradcheckOptions {
  int instances = 20;
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Relative error is |a - n| / max(|a|, |n|, floor).
  double floor = 1e-6;
  /// Coordinates per instance beyond which a random subset is checked.
  std::size_t max_coordinates = 1500;
};

struct GradcheckResult {
  std::string name;
  double max_rel_error = 0.0;
  int instances = 0;
  std::size_t coordinates = 0;  // checked parameter and input entries
  std::size_t skipped = 0;      // entries whose +-h probes changed an activation pattern
  double seconds = 0.0;

  bool passed(double tolerance) const { return max_rel_error <= tolerance && coordinates > 0; }
};

/// Produces a fresh network with random parameters for one instance.
using NetworkFactory = std::function<nn::Network(Rng&)>;

/// Compares backward() against central differences of sum(u * f(x)) for
/// random inputs x of batch size `batch` and random upstream u. Entries whose
/// probes flip a LeakyReLU sign or a max-pool winner are skipped.
GradcheckResult gradcheck_network(const std::string& name, const NetworkFactory& factory, Eigen::Index batch,
                                  Rng& rng, const GradcheckOptions& options = {});

/// Every layer type, the residual block and end-to-end actor and critic.
std::vector<GradcheckResult> run_gradcheck_suite(std::uint64_t seed, const GradcheckOptions& options = {});

/// Sign of every LeakyReLU input and every max-pool winner, in module order.
std::vector<std::int64_t> activation_pattern(const nn::Network& net, const nn::NetworkCache& cache);

}  // namespace simdrl::validation
