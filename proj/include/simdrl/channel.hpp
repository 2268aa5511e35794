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
#include <iosfwd>
#include <filesystem>

#include <Eigen/Dense>

#include "simdrl/config.hpp"
#include "simdrl/geometry.hpp"
#include "simdrl/random.hpp"

namespace simdrl {

/// Spatial correlation of an array and its symmetric square root.
struct CorrelationModel {
  Eigen::MatrixXd correlation;  // R, unit diagonal
  Eigen::MatrixXd sqrt;         // R^{1/2}, symmetric PSD
  Eigen::VectorXd eigenvalues;  // of R before clamping, ascending
};

/// One fading draw from the SIM output layer (or the BS array) to the UEs.
struct ChannelRealization {
  Eigen::MatrixXcd G;            // M x N
  Eigen::VectorXd path_loss;     // rho_m^2
  Eigen::VectorXd ue_distances;  // d_{c,m} [m]
};

/// sinc(x) = sin(pi x) / (pi x), sinc(0) = 1.
double sinc(double x);

/// R[n, k] = sinc(2 r_{n,k} / lambda) over the given array positions, with
/// R^{1/2} from a symmetric eigendecomposition whose negative eigenvalues
/// are clamped to zero. Throws std::runtime_error if an eigenvalue is below
/// -1e-8.
CorrelationModel correlation_matrix(const Points3<double>& positions, double wavelength);

/// Correlation over the output (last) SIM layer.
inline CorrelationModel correlation_matrix(const SimGeometry& geom, double wavelength) {
  return correlation_matrix(geom.layers.back(), wavelength);
}

/// rho^2 = C0 d^-alpha. Throws std::domain_error for d < 1 m.
double path_loss(double distance, double ref_path_loss, double exponent);

/// Slant distances sqrt(H_b^2 + R_m^2) with R_m uniform over the annulus
/// area.
Eigen::VectorXd sample_ue_distances(Rng& rng, const SimConfig& config);

/// G = G~ R^{1/2} with rows of G~ i.i.d. CN(0, rho_m^2 I).
ChannelRealization sample_channel(Rng& rng, const CorrelationModel& corr, const Eigen::VectorXd& path_loss);

/// UE placement followed by fading, both from `rng`.
ChannelRealization draw_channel(Rng& rng, const SimConfig& config, const CorrelationModel& corr);

/// Path loss of every UE at the given distances.
Eigen::VectorXd path_losses(const Eigen::VectorXd& distances, const SimConfig& config);

/// FNV-1a over the raw bytes of G, used to confirm paired draws.
std::uint64_t channel_checksum(const Eigen::MatrixXcd& g);

/// CSV with header `m,n,re,im`, one row per entry, row-major over (m, n).
void write_channel_csv(std::ostream& out, const Eigen::MatrixXcd& g);
void write_channel_csv(const std::filesystem::path& path, const Eigen::MatrixXcd& g);
Eigen::MatrixXcd read_channel_csv(std::istream& in);

}  // namespace simdrl
