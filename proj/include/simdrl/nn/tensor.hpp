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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace simdrl::nn {

using Index = Eigen::Index;

/// Dense float64 tensor. Storage is contiguous with the last extent varying
/// fastest; the first extent is the batch dimension wherever a tensor flows
/// through a network.
class Tensor {
 public:
  using Shape = std::vector<Index>;

  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, Eigen::VectorXd values);

  static Index count(const Shape& shape);

  const Shape& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index dim(std::size_t axis) const { return shape_.at(axis); }
  Index size() const { return values_.size(); }

  Eigen::VectorXd& values() { return values_; }
  const Eigen::VectorXd& values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  double& operator[](Index i) { return values_[i]; }
  double operator[](Index i) const { return values_[i]; }

  /// Column-major view of the storage as rows x cols.
  Eigen::Map<Eigen::MatrixXd> matrix(Index rows, Index cols);
  Eigen::Map<const Eigen::MatrixXd> matrix(Index rows, Index cols) const;

  /// Same values under a new shape with the same element count.
  Tensor reshaped(Shape shape) const;

  bool all_finite() const { return values_.allFinite(); }

 private:
  Shape shape_;
  Eigen::VectorXd values_;
};

std::string shape_string(const Tensor::Shape& shape);

struct NamedTensor {
  std::string name;
  Tensor value;
};

/// Ordered, named parameter tensors of a network. Gradients and optimizer
/// moments use the same layout.
class ParameterSet {
 public:
  std::size_t add(std::string name, Tensor value);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  Tensor& operator[](std::size_t i) { return entries_[i].value; }
  const Tensor& operator[](std::size_t i) const { return entries_[i].value; }
  const std::string& name(std::size_t i) const { return entries_[i].name; }
  const std::vector<NamedTensor>& entries() const { return entries_; }

  std::optional<std::size_t> find(std::string_view name) const;

  ParameterSet zeros_like() const;
  /// Same names and shapes, in the same order.
  bool same_layout(const ParameterSet& other) const;
  Index total_size() const;
  bool all_finite() const;

  /// All values concatenated in entry order.
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);

 private:
  std::vector<NamedTensor> entries_;
};

using NetworkParameters = ParameterSet;

}  // namespace simdrl::nn
