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

#include "simdrl/channel.hpp"
#include "simdrl/config.hpp"
#include "simdrl/geometry.hpp"
#include "simdrl/metrics.hpp"

namespace simdrl {

/// Everything about a scenario that does not change between channel draws.
/// Immutable after construction; share freely across threads.
struct Scenario {
  SimConfig config;
  SimGeometry geometry;
  PropagationMatrices mats;
  CorrelationModel correlation;
  Eigen::VectorXd noise;

  explicit Scenario(const SimConfig& cfg)
      : config(cfg),
        geometry(build_geometry(cfg)),
        mats(propagation_matrices(geometry, cfg)),
        correlation(correlation_matrix(geometry, cfg.wavelength)),
        noise(cfg.noise_vector()) {}

  double evaluate(const PhaseConfiguration& phases, const PowerAllocation& power,
                  const ChannelRealization& channel) const {
    return simdrl::evaluate(mats, phases.phases, power, channel.G, noise);
  }

  ChannelRealization draw_channel(Rng& rng) const { return simdrl::draw_channel(rng, config, correlation); }
};

}  // namespace simdrl
