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

#include "simdrl/nn/tensor.hpp"

namespace simdrl::nn {

/// Optimizer state for one parameter set: moment estimates laid out like the
/// parameters, the step counter and the hyperparameters.
struct AdamState {
  ParameterSet first_moment;
  ParameterSet second_moment;
  std::int64_t step = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_parameters(const ParameterSet& params, double learning_rate, double beta1 = 0.9,
                                  double beta2 = 0.999, double epsilon = 1e-8);
};

/// One bias-corrected Adam descent step:
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2,
///   params -= lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps).
/// Throws std::invalid_argument if the layouts of params, grads and state differ.
void adam_step(ParameterSet& params, const ParameterSet& grads, AdamState& state);

}  // namespace simdrl::nn
