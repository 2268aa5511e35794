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

#include "simdrl/channel.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "simdrl/text.hpp"

namespace simdrl {

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

CorrelationModel correlation_matrix(const Points3<double>& positions, double wavelength) {
  const Eigen::Index n = positions.cols();
  CorrelationModel model;
  model.correlation.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    model.correlation(i, i) = 1.0;
    for (Eigen::Index k = i + 1; k < n; ++k) {
      const double r = (positions.col(i) - positions.col(k)).norm();
      const double value = sinc(2.0 * r / wavelength);
      model.correlation(i, k) = value;
      model.correlation(k, i) = value;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(model.correlation);
  if (solver.info() != Eigen::Success) throw std::runtime_error("correlation_matrix: eigensolver failed");
  model.eigenvalues = solver.eigenvalues();
  if (model.eigenvalues.minCoeff() < -1e-8) {
    throw std::runtime_error("correlation_matrix: eigenvalue " + format_double(model.eigenvalues.minCoeff()) +
                             " is not PSD within tolerance");
  }
  const Eigen::VectorXd root = model.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd& v = solver.eigenvectors();
  model.sqrt = v * root.asDiagonal() * v.transpose();
  model.sqrt = (0.5 * (model.sqrt + model.sqrt.transpose())).eval();
  return model;
}

double path_loss(double distance, double ref_path_loss, double exponent) {
  if (!(distance >= 1.0)) throw std::domain_error("path_loss: distance below the 1 m reference");
  return ref_path_loss * std::pow(distance, -exponent);
}

Eigen::VectorXd sample_ue_distances(Rng& rng, const SimConfig& config) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double inner2 = config.inner_radius * config.inner_radius;
  const double outer2 = config.outer_radius * config.outer_radius;
  const double h2 = config.bs_height * config.bs_height;
  Eigen::VectorXd d(config.num_users);
  for (Eigen::Index m = 0; m < d.size(); ++m) {
    const double radius2 = unit(rng) * (outer2 - inner2) + inner2;
    d(m) = std::sqrt(h2 + radius2);
  }
  return d;
}

Eigen::VectorXd path_losses(const Eigen::VectorXd& distances, const SimConfig& config) {
  return distances.unaryExpr(
      [&](double d) { return path_loss(d, config.ref_path_loss, config.path_loss_exponent); });
}

ChannelRealization sample_channel(Rng& rng, const CorrelationModel& corr, const Eigen::VectorXd& path_loss) {
  const Eigen::Index m = path_loss.size();
  const Eigen::Index n = corr.sqrt.rows();
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd iid(m, n);
  for (Eigen::Index row = 0; row < m; ++row) {
    const double scale = std::sqrt(path_loss(row) / 2.0);
    for (Eigen::Index col = 0; col < n; ++col) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      iid(row, col) = {scale * re, scale * im};
    }
  }
  ChannelRealization channel;
  channel.G = iid * corr.sqrt.cast<std::complex<double>>();
  channel.path_loss = path_loss;
  return channel;
}

ChannelRealization draw_channel(Rng& rng, const SimConfig& config, const CorrelationModel& corr) {
  const Eigen::VectorXd distances = sample_ue_distances(rng, config);
  ChannelRealization channel = sample_channel(rng, corr, path_losses(distances, config));
  channel.ue_distances = distances;
  return channel;
}

std::uint64_t channel_checksum(const Eigen::MatrixXcd& g) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto mix = [&hash](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      hash ^= p[i];
      hash *= 0x100000001b3ULL;
    }
  };
  const std::int64_t dims[2] = {g.rows(), g.cols()};
  mix(dims, sizeof(dims));
  mix(g.data(), static_cast<std::size_t>(g.size()) * sizeof(std::complex<double>));
  return hash;
}

void write_channel_csv(std::ostream& out, const Eigen::MatrixXcd& g) {
  out << "m,n,re,im\n";
  for (Eigen::Index m = 0; m < g.rows(); ++m) {
    for (Eigen::Index n = 0; n < g.cols(); ++n) {
      out << m << ',' << n << ',' << format_double(g(m, n).real()) << ',' << format_double(g(m, n).imag())
          << '\n';
    }
  }
}

void write_channel_csv(const std::filesystem::path& path, const Eigen::MatrixXcd& g) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write channel CSV " + path.string());
  write_channel_csv(out, g);
  if (!out) throw std::runtime_error("failed writing channel CSV " + path.string());
}

Eigen::MatrixXcd read_channel_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "m,n,re,im") {
    throw std::invalid_argument("channel CSV: missing header");
  }
  struct Entry {
    Eigen::Index m, n;
    std::complex<double> value;
  };
  std::vector<Entry> entries;
  Eigen::Index rows = 0, cols = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 4) throw std::invalid_argument("channel CSV: expected 4 fields");
    Entry e{parse_int(fields[0]), parse_int(fields[1]), {parse_double(fields[2]), parse_double(fields[3])}};
    rows = std::max(rows, e.m + 1);
    cols = std::max(cols, e.n + 1);
    entries.push_back(e);
  }
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(rows, cols);
  for (const auto& e : entries) g(e.m, e.n) = e.value;
  return g;
}

}  // namespace simdrl
