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

#include "simdrl/nn/tensor.hpp"

#include <numeric>
#include <stdexcept>

namespace simdrl::nn {

Index Tensor::count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>());
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), values_(Eigen::VectorXd::Zero(count(shape_))) {}

Tensor::Tensor(Shape shape, Eigen::VectorXd values) : shape_(std::move(shape)), values_(std::move(values)) {
  if (values_.size() != count(shape_)) {
    throw std::invalid_argument("Tensor: " + std::to_string(values_.size()) + " values for shape " +
                                shape_string(shape_));
  }
}

Eigen::Map<Eigen::MatrixXd> Tensor::matrix(Index rows, Index cols) {
  if (rows * cols != size()) throw std::invalid_argument("Tensor::matrix: size mismatch");
  return {values_.data(), rows, cols};
}

Eigen::Map<const Eigen::MatrixXd> Tensor::matrix(Index rows, Index cols) const {
  if (rows * cols != size()) throw std::invalid_argument("Tensor::matrix: size mismatch");
  return {values_.data(), rows, cols};
}

Tensor Tensor::reshaped(Shape shape) const {
  if (count(shape) != size()) {
    throw std::invalid_argument("Tensor::reshaped: cannot view " + shape_string(shape_) + " as " +
                                shape_string(shape));
  }
  return Tensor(std::move(shape), values_);
}

std::string shape_string(const Tensor::Shape& shape) {
  std::string text = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) text += ", ";
    text += std::to_string(shape[i]);
  }
  return text + "]";
}

std::size_t ParameterSet::add(std::string name, Tensor value) {
  if (find(name)) throw std::invalid_argument("ParameterSet: duplicate parameter '" + name + "'");
  entries_.push_back({std::move(name), std::move(value)});
  return entries_.size() - 1;
}

std::optional<std::size_t> ParameterSet::find(std::string_view name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  return std::nullopt;
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet zeros;
  for (const auto& e : entries_) zeros.entries_.push_back({e.name, Tensor(e.value.shape())});
  return zeros;
}

bool ParameterSet::same_layout(const ParameterSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != other.entries_[i].name || entries_[i].value.shape() != other.entries_[i].value.shape()) {
      return false;
    }
  }
  return true;
}

Index ParameterSet::total_size() const {
  Index total = 0;
  for (const auto& e : entries_) total += e.value.size();
  return total;
}

bool ParameterSet::all_finite() const {
  for (const auto& e : entries_) {
    if (!e.value.all_finite()) return false;
  }
  return true;
}

Eigen::VectorXd ParameterSet::flatten() const {
  Eigen::VectorXd flat(total_size());
  Index offset = 0;
  for (const auto& e : entries_) {
    flat.segment(offset, e.value.size()) = e.value.values();
    offset += e.value.size();
  }
  return flat;
}

void ParameterSet::assign(const Eigen::VectorXd& flat) {
  if (flat.size() != total_size()) throw std::invalid_argument("ParameterSet::assign: size mismatch");
  Index offset = 0;
  for (auto& e : entries_) {
    e.value.values() = flat.segment(offset, e.value.size());
    offset += e.value.size();
  }
}

}  // namespace simdrl::nn
