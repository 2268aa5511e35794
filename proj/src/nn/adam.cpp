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

#include "simdrl/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace simdrl::nn {

AdamState AdamState::for_parameters(const ParameterSet& params, double learning_rate, double beta1, double beta2,
                                    double epsilon) {
  return AdamState{params.zeros_like(), params.zeros_like(), 0, learning_rate, beta1, beta2, epsilon};
}

void adam_step(ParameterSet& params, const ParameterSet& grads, AdamState& state) {
  if (!params.same_layout(grads) || !params.same_layout(state.first_moment) ||
      !params.same_layout(state.second_moment)) {
    throw std::invalid_argument("adam_step: parameter, gradient and moment layouts differ");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = state.first_moment[i].values();
    auto& v = state.second_moment[i].values();
    const auto& g = grads[i].values();
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseAbs2();
    params[i].values().array() -=
        state.learning_rate * (m.array() / correction1) / ((v.array() / correction2).sqrt() + state.epsilon);
  }
}

}  // namespace simdrl::nn
