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

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "simdrl/config.hpp"
#include "simdrl/random.hpp"

namespace simdrl {

template <typename Scalar>
using Point3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Points3 = Eigen::Matrix<Scalar, 3, Eigen::Dynamic>;
template <typename Scalar>
using ComplexMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

// Coordinate convention: the SIM stacks along +z with layer 1 at z = 0 and
// layer l at z = (l-1) d_s. Each layer is a side x side grid in the x-y plane
// centred on the z axis; atom n sits at row n / side (y) and column
// n % side (x). All layers share the same grid, so atoms are vertically
// aligned. The M BS antennas form a lambda/2 linear array along x, centred on
// the axis, at z = -d_s.
template <typename Scalar>
struct SimGeometryT {
  Points3<Scalar> antennas;             // 3 x M
  std::vector<Points3<Scalar>> layers;  // L entries of 3 x N
  Scalar interlayer_spacing{};          // d_s
  int grid_side = 0;
};

/// W1 (N x M, antennas to layer 1) and W^l (N x N, layer l-1 to layer l)
/// for l = 2..L, stored in `interlayer[l - 2]`.
template <typename Scalar>
struct PropagationMatricesT {
  ComplexMatrix<Scalar> input;
  std::vector<ComplexMatrix<Scalar>> interlayer;

  int num_layers() const { return static_cast<int>(interlayer.size()) + 1; }
  Eigen::Index num_atoms() const { return input.rows(); }
  Eigen::Index num_inputs() const { return input.cols(); }
};

using SimGeometry = SimGeometryT<double>;
using PropagationMatrices = PropagationMatricesT<double>;

/// L vectors of N phase angles (radians), stored column-per-layer.
struct PhaseConfiguration {
  Eigen::MatrixXd phases;  // N x L

  static PhaseConfiguration zeros(Eigen::Index atoms, Eigen::Index layers) {
    return {Eigen::MatrixXd::Zero(atoms, layers)};
  }
  /// Phases drawn i.i.d. uniform on [0, 2 pi).
  static PhaseConfiguration random(Rng& rng, Eigen::Index atoms, Eigen::Index layers);

  Eigen::Index num_atoms() const { return phases.rows(); }
  Eigen::Index num_layers() const { return phases.cols(); }

  /// Unit-modulus transmission coefficients exp(j phi), N x L.
  Eigen::MatrixXcd coefficients() const;
};

/// Builds the layer grids and antenna array. Throws std::invalid_argument
/// if N is not a perfect square or L < 1.
SimGeometry build_geometry(const SimConfig& config);

/// Rayleigh-Sommerfeld coefficient between two points:
///   (d_s s_a / r) (1 / (2 pi r) - j / lambda) exp(j 2 pi r / lambda).
/// Throws std::domain_error for coincident points.
template <typename Scalar>
std::complex<Scalar> propagation_coefficient(const Point3<Scalar>& src, const Point3<Scalar>& dst,
                                             Scalar spacing, Scalar area, Scalar wavelength) {
  const Scalar r = (dst - src).norm();
  if (!(r > Scalar(0))) throw std::domain_error("propagation_coefficient: zero distance");
  constexpr Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  const Scalar amplitude = spacing * area / r;
  const std::complex<Scalar> kernel(Scalar(1) / (two_pi * r), -Scalar(1) / wavelength);
  return amplitude * kernel * std::polar(Scalar(1), two_pi * r / wavelength);
}

/// Every entry of W1 and W^l from the geometry.
template <typename Scalar>
PropagationMatricesT<Scalar> propagation_matrices(const SimGeometryT<Scalar>& geom, Scalar area,
                                                  Scalar wavelength) {
  if (geom.layers.empty()) throw std::invalid_argument("propagation_matrices: geometry has no layers");
  const Scalar ds = geom.interlayer_spacing;
  auto between = [&](const Points3<Scalar>& from, const Points3<Scalar>& to) {
    ComplexMatrix<Scalar> w(to.cols(), from.cols());
    for (Eigen::Index src = 0; src < from.cols(); ++src) {
      for (Eigen::Index dst = 0; dst < to.cols(); ++dst) {
        w(dst, src) = propagation_coefficient<Scalar>(from.col(src), to.col(dst), ds, area, wavelength);
      }
    }
    return w;
  };
  PropagationMatricesT<Scalar> mats;
  mats.input = between(geom.antennas, geom.layers.front());
  for (std::size_t l = 1; l < geom.layers.size(); ++l) {
    mats.interlayer.push_back(between(geom.layers[l - 1], geom.layers[l]));
  }
  return mats;
}

inline PropagationMatrices propagation_matrices(const SimGeometry& geom, const SimConfig& config) {
  return propagation_matrices<double>(geom, config.atom_area, config.wavelength);
}

/// SIM response B = Phi^L W^L ... Phi^2 W^2 Phi^1 W^1 (N x M), where
/// Phi^l = diag(exp(j phases.col(l))).
template <typename Derived>
ComplexMatrix<typename Derived::Scalar> sim_response(
    const Eigen::MatrixBase<Derived>& phases,
    const PropagationMatricesT<typename Derived::Scalar>& mats) {
  using Scalar = typename Derived::Scalar;
  if (phases.cols() != mats.num_layers() || phases.rows() != mats.num_atoms()) {
    throw std::invalid_argument("sim_response: phase configuration does not match propagation matrices");
  }
  auto layer_phase = [&](Eigen::Index l) {
    return phases.col(l).unaryExpr([](Scalar a) { return std::polar(Scalar(1), a); }).eval();
  };
  ComplexMatrix<Scalar> b = mats.input;
  b.array().colwise() *= layer_phase(0).array();
  for (Eigen::Index l = 1; l < phases.cols(); ++l) {
    b = (mats.interlayer[static_cast<std::size_t>(l - 1)] * b).eval();
    b.array().colwise() *= layer_phase(l).array();
  }
  return b;
}

inline Eigen::MatrixXcd sim_response(const PhaseConfiguration& config, const PropagationMatrices& mats) {
  return sim_response(config.phases, mats);
}

}  // namespace simdrl
