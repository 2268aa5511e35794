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
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "simdrl/geometry.hpp"

namespace simdrl {

/// Per-UE transmit powers p_m [W].
using PowerAllocation = Eigen::VectorXd;

/// p >= 0 and sum(p) <= P_max, both exactly.
inline bool is_feasible(const PowerAllocation& p, double max_power) {
  return (p.array() >= 0.0).all() && p.sum() <= max_power;
}

/// gamma_m = p_m |g_m^T b_m|^2 / (sum_{k != m} p_k |g_m^T b_k|^2 + sigma_m^2)
/// for G (M x N), B (N x M). Linear units.
template <typename DerivedG, typename DerivedB, typename DerivedP, typename DerivedS>
Eigen::Matrix<typename DerivedP::Scalar, Eigen::Dynamic, 1> sinr(const Eigen::MatrixBase<DerivedG>& g,
                                                                  const Eigen::MatrixBase<DerivedB>& b,
                                                                  const Eigen::MatrixBase<DerivedP>& power,
                                                                  const Eigen::MatrixBase<DerivedS>& noise) {
  using Real = typename DerivedP::Scalar;
  const Eigen::Index m = g.rows();
  if (g.cols() != b.rows() || b.cols() != m || power.size() != m || noise.size() != m) {
    throw std::invalid_argument("sinr: dimension mismatch");
  }
  if (!g.allFinite() || !b.allFinite() || !power.allFinite() || !noise.allFinite()) {
    throw std::domain_error("sinr: non-finite input");
  }
  // received(m, k) = p_k |g_m^T b_k|^2
  Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> received =
      (g * b).cwiseAbs2() * power.asDiagonal();
  const Eigen::Matrix<Real, Eigen::Dynamic, 1> signal = received.diagonal();
  received.diagonal().setZero();
  return signal.cwiseQuotient(received.rowwise().sum() + noise);
}

/// sum_m log2(1 + gamma_m). Throws std::domain_error for negative entries.
template <typename Derived>
typename Derived::Scalar sum_rate(const Eigen::MatrixBase<Derived>& gammas) {
  using Real = typename Derived::Scalar;
  if ((gammas.array() < Real(0)).any() || !gammas.allFinite()) {
    throw std::domain_error("sum_rate: SINR must be finite and non-negative");
  }
  return gammas.unaryExpr([](Real x) { return std::log1p(x); }).sum() / std::numbers::ln2_v<Real>;
}

/// Sum rate of the full chain: phases -> B -> SINR -> rate.
template <typename DerivedPhi, typename DerivedG, typename DerivedP, typename DerivedS>
typename DerivedP::Scalar evaluate(const PropagationMatricesT<typename DerivedPhi::Scalar>& mats,
                                   const Eigen::MatrixBase<DerivedPhi>& phases,
                                   const Eigen::MatrixBase<DerivedP>& power,
                                   const Eigen::MatrixBase<DerivedG>& g,
                                   const Eigen::MatrixBase<DerivedS>& noise) {
  return sum_rate(sinr(g, sim_response(phases, mats), power, noise));
}

}  // namespace simdrl
