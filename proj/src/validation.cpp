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

#include "simdrl/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace simdrl::validation {

using Eigen::Index;

std::complex<double> scalar_propagation_coefficient(double distance, double spacing, double area,
                                                    double wavelength) {
  const double pi = std::numbers::pi;
  const double amplitude = spacing * area / distance;
  const double re = 1.0 / (2.0 * pi * distance);
  const double im = -1.0 / wavelength;
  const double angle = 2.0 * pi * distance / wavelength;
  const double c = std::cos(angle), s = std::sin(angle);
  return {amplitude * (re * c - im * s), amplitude * (re * s + im * c)};
}

Eigen::MatrixXcd scalar_sim_response(const Eigen::MatrixXd& phases, const PropagationMatrices& mats) {
  const Index atoms = mats.input.rows();
  const Index inputs = mats.input.cols();
  Eigen::MatrixXcd current(atoms, inputs);
  for (Index n = 0; n < atoms; ++n) {
    const std::complex<double> phi(std::cos(phases(n, 0)), std::sin(phases(n, 0)));
    for (Index m = 0; m < inputs; ++m) current(n, m) = phi * mats.input(n, m);
  }
  for (Index l = 1; l < phases.cols(); ++l) {
    const Eigen::MatrixXcd& w = mats.interlayer[static_cast<std::size_t>(l - 1)];
    Eigen::MatrixXcd next(atoms, inputs);
    for (Index n = 0; n < atoms; ++n) {
      const std::complex<double> phi(std::cos(phases(n, l)), std::sin(phases(n, l)));
      for (Index m = 0; m < inputs; ++m) {
        std::complex<double> acc = 0.0;
        for (Index k = 0; k < atoms; ++k) acc += w(n, k) * current(k, m);
        next(n, m) = phi * acc;
      }
    }
    current = next;
  }
  return current;
}

std::vector<double> scalar_sinr(const Eigen::MatrixXcd& g, const Eigen::MatrixXcd& b, const Eigen::VectorXd& power,
                                const Eigen::VectorXd& noise) {
  const Index users = g.rows();
  std::vector<double> result(static_cast<std::size_t>(users));
  for (Index m = 0; m < users; ++m) {
    double signal = 0.0, interference = 0.0;
    for (Index k = 0; k < users; ++k) {
      std::complex<double> gain = 0.0;
      for (Index n = 0; n < g.cols(); ++n) gain += g(m, n) * b(n, k);
      const double received = power[k] * std::norm(gain);
      if (k == m) {
        signal = received;
      } else {
        interference += received;
      }
    }
    const double sigma = noise.size() == 1 ? noise[0] : noise[m];
    result[static_cast<std::size_t>(m)] = signal / (interference + sigma);
  }
  return result;
}

double scalar_sum_rate(const std::vector<double>& sinr) {
  double total = 0.0;
  for (double gamma : sinr) total += std::log1p(gamma);
  return total / std::log(2.0);
}

double parallel_sum_rate(const Eigen::VectorXd& gains, const Eigen::VectorXd& noise, const Eigen::VectorXd& power) {
  double total = 0.0;
  for (Index m = 0; m < gains.size(); ++m) {
    const double sigma = noise.size() == 1 ? noise[0] : noise[m];
    total += std::log1p(power[m] * gains[m] / sigma);
  }
  return total / std::log(2.0);
}

GridSearchResult simplex_grid_search(const Eigen::VectorXd& gains, const Eigen::VectorXd& noise, double max_power,
                                     int resolution, int refinements) {
  const Index users = gains.size();
  if (users != 2 && users != 3) throw std::invalid_argument("simplex_grid_search: supports 2 or 3 users");
  GridSearchResult best;
  best.sum_rate = -1.0;
  auto consider = [&](double a, double b) {
    if (a < 0 || b < 0) return;
    Eigen::VectorXd p(users);
    if (users == 2) {
      if (a > max_power) return;
      p << a, max_power - a;
    } else {
      if (a + b > max_power) return;
      p << a, b, std::max(0.0, max_power - a - b);
    }
    const double rate = parallel_sum_rate(gains, noise, p);
    if (rate > best.sum_rate) best = {p, rate};
  };
  double lo_a = 0.0, lo_b = 0.0, span = max_power;
  for (int level = 0; level <= refinements; ++level) {
    const double h = span / resolution;
    for (int i = 0; i <= resolution; ++i) {
      if (users == 2) {
        consider(lo_a + i * h, 0.0);
        continue;
      }
      for (int j = 0; j <= resolution; ++j) consider(lo_a + i * h, lo_b + j * h);
    }
    span = 4.0 * h;
    lo_a = std::max(0.0, best.power[0] - span / 2);
    lo_b = users == 3 ? std::max(0.0, best.power[1] - span / 2) : 0.0;
  }
  return best;
}

void ScalarAdam::update(double& theta, double grad, double lr, double beta1, double beta2, double epsilon) {
  ++step;
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad * grad;
  const double mhat = m / (1.0 - std::pow(beta1, static_cast<double>(step)));
  const double vhat = v / (1.0 - std::pow(beta2, static_cast<double>(step)));
  theta -= lr * mhat / (std::sqrt(vhat) + epsilon);
}

// Gradient checks ---------------------------------------------------------------

namespace {

void append_leaky_pattern(const nn::ForwardCache& cache, std::vector<std::int64_t>& out) {
  const nn::Tensor& x = cache.tensors.at(0);
  for (Index i = 0; i < x.size(); ++i) out.push_back(x[i] >= 0.0 ? 1 : 0);
}

void append_pattern(const nn::Module& module, const nn::ForwardCache& cache, std::vector<std::int64_t>& out) {
  const std::string kind = module.kind();
  if (kind == "leaky_relu") {
    append_leaky_pattern(cache, out);
  } else if (kind == "maxpool2d") {
    out.insert(out.end(), cache.indices.begin(), cache.indices.end());
  } else if (kind == "residual_block") {
    append_leaky_pattern(cache.children.at(1), out);
    append_leaky_pattern(cache.children.at(4), out);
  }
}

double weighted_sum(const nn::Tensor& y, const nn::Tensor& u) { return y.values().dot(u.values()); }

nn::Tensor random_tensor(Rng& rng, nn::Tensor::Shape shape, double scale) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  nn::Tensor t(std::move(shape));
  for (Index i = 0; i < t.size(); ++i) t[i] = dist(rng);
  return t;
}

/// Randomises layer-norm scale and shift, which the builder initialises to 1 and 0.
void perturb_norm_parameters(nn::Network& net, Rng& rng) {
  std::uniform_real_distribution<double> dist(0.5, 1.5);
  auto& params = net.mutable_parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string& name = params.name(i);
    if (name.find(".scale") != std::string::npos) {
      for (Index k = 0; k < params[i].size(); ++k) params[i][k] = dist(rng);
    } else if (name.find(".shift") != std::string::npos) {
      for (Index k = 0; k < params[i].size(); ++k) params[i][k] = dist(rng) - 1.0;
    }
  }
}

}  // namespace

std::vector<std::int64_t> activation_pattern(const nn::Network& net, const nn::NetworkCache& cache) {
  std::vector<std::int64_t> pattern;
  for (std::size_t i = 0; i < net.modules().size(); ++i) append_pattern(*net.modules()[i], cache.modules.at(i), pattern);
  return pattern;
}

GradcheckResult gradcheck_network(const std::string& name, const NetworkFactory& factory, Index batch, Rng& rng,
                                  const GradcheckOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  GradcheckResult result;
  result.name = name;
  for (int instance = 0; instance < options.instances; ++instance) {
    nn::Network net = factory(rng);
    perturb_norm_parameters(net, rng);
    nn::Tensor::Shape in_shape{batch};
    in_shape.insert(in_shape.end(), net.input_shape().begin(), net.input_shape().end());
    nn::Tensor x = random_tensor(rng, in_shape, 1.0);
    const auto base = nn::forward(net, x);
    const nn::Tensor u = random_tensor(rng, base.output.shape(), 1.0);
    const auto analytic = nn::backward(net, base.cache, u);
    const auto base_pattern = activation_pattern(net, base.cache);

    // Coordinates: (tensor index, entry) with tensor index == params.size() meaning the input.
    std::vector<std::pair<std::size_t, Index>> coords;
    const std::size_t n_params = net.parameters().size();
    for (std::size_t t = 0; t <= n_params; ++t) {
      const Index size = t < n_params ? net.parameters()[t].size() : x.size();
      for (Index k = 0; k < size; ++k) coords.emplace_back(t, k);
    }
    if (coords.size() > options.max_coordinates) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coordinates);
    }

    for (const auto& [t, k] : coords) {
      auto probe = [&](double delta) {
        double* slot = t < n_params ? &net.mutable_parameters()[t][k] : &x[k];
        const double saved = *slot;
        *slot = saved + delta;
        const auto fwd = nn::forward(net, x);
        *slot = saved;
        return std::make_pair(weighted_sum(fwd.output, u), activation_pattern(net, fwd.cache));
      };
      const auto [plus, plus_pattern] = probe(options.step);
      const auto [minus, minus_pattern] = probe(-options.step);
      if (plus_pattern != base_pattern || minus_pattern != base_pattern) {
        ++result.skipped;
        continue;
      }
      const double numeric = (plus - minus) / (2.0 * options.step);
      const double exact = t < n_params ? analytic.param_grads[t][k] : analytic.input_grad[k];
      const double denom = std::max({std::abs(exact), std::abs(numeric), options.floor});
      result.max_rel_error = std::max(result.max_rel_error, std::abs(exact - numeric) / denom);
      ++result.coordinates;
    }
    ++result.instances;
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<GradcheckResult> run_gradcheck_suite(std::uint64_t seed, const GradcheckOptions& options) {
  Rng rng(seed);
  std::vector<GradcheckResult> results;
  auto check = [&](const std::string& name, nn::Tensor::Shape input, Index batch,
                   const std::function<void(nn::NetworkBuilder&)>& layers) {
    results.push_back(gradcheck_network(
        name,
        [&](Rng& r) {
          nn::NetworkBuilder b(name, input, r);
          layers(b);
          return b.build();
        },
        batch, rng, options));
  };
  check("dense", {7}, 3, [](auto& b) { b.dense(5); });
  check("conv3x3", {2, 5, 4}, 2, [](auto& b) { b.conv(3, 3); });
  check("conv1x1", {3, 4, 4}, 2, [](auto& b) { b.conv(2, 1); });
  check("maxpool2x2", {2, 5, 6}, 2, [](auto& b) { b.max_pool(); });
  check("layernorm", {6}, 3, [](auto& b) { b.layer_norm(); });
  check("leaky_relu", {9}, 3, [](auto& b) { b.leaky_relu(0.01); });
  check("tanh", {8}, 3, [](auto& b) { b.tanh(); });
  check("square_image", {7}, 2, [](auto& b) { b.square_image().flatten().dense(3); });
  check("residual_block", {2, 4, 4}, 2, [](auto& b) { b.residual_block(3, 0.01); });

  // End-to-end networks at a small scenario (M=2, N=4, L=2).
  const Index state = 2 * 4 * (2 + 2) + 2 + 1;
  const Index action = 2 * 4 * 2 + 2;
  results.push_back(gradcheck_network(
      "actor", [&](Rng& r) { return nn::build_actor({state, action, 4, 16, 0.01}, r); }, 2, rng, options));
  results.push_back(gradcheck_network(
      "critic", [&](Rng& r) { return nn::build_critic({state, action, 16, 0.01}, r); }, 3, rng, options));
  return results;
}

}  // namespace simdrl::validation
