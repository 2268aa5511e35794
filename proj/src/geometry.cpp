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

#include "simdrl/geometry.hpp"

namespace simdrl {

PhaseConfiguration PhaseConfiguration::random(Rng& rng, Eigen::Index atoms, Eigen::Index layers) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  PhaseConfiguration config{Eigen::MatrixXd(atoms, layers)};
  for (Eigen::Index l = 0; l < layers; ++l) {
    for (Eigen::Index n = 0; n < atoms; ++n) config.phases(n, l) = angle(rng);
  }
  return config;
}

Eigen::MatrixXcd PhaseConfiguration::coefficients() const {
  return phases.unaryExpr([](double a) { return std::polar(1.0, a); });
}

SimGeometry build_geometry(const SimConfig& config) {
  config.validate();
  const int side = config.grid_side();
  const int n = config.atoms_per_layer;
  const double ds = config.interlayer_spacing();
  const double centre = (side - 1) / 2.0;

  SimGeometry geom;
  geom.grid_side = side;
  geom.interlayer_spacing = ds;
  geom.layers.reserve(static_cast<std::size_t>(config.num_layers));
  for (int l = 0; l < config.num_layers; ++l) {
    Points3<double> layer(3, n);
    for (int idx = 0; idx < n; ++idx) {
      const int row = idx / side;
      const int col = idx % side;
      layer.col(idx) << (col - centre) * config.atom_spacing, (row - centre) * config.atom_spacing, l * ds;
    }
    geom.layers.push_back(std::move(layer));
  }

  const int m = config.num_users;
  const double antenna_spacing = config.wavelength / 2;
  const double antenna_centre = (m - 1) / 2.0;
  geom.antennas.resize(3, m);
  for (int idx = 0; idx < m; ++idx) {
    geom.antennas.col(idx) << (idx - antenna_centre) * antenna_spacing, 0.0, -ds;
  }
  return geom;
}

}  // namespace simdrl
