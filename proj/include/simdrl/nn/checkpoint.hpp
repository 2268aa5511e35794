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

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "simdrl/nn/tensor.hpp"

namespace simdrl::nn {

/// Named tensors plus string metadata, serialised losslessly.
///
/// Byte layout (all integers little-endian, doubles as little-endian IEEE-754
/// binary64 bit patterns):
///
///   magic      8 bytes  "SIMDRLCK"
///   version    u32      currently 1
///   n_meta     u32
///   n_meta x { u32 key_len, key bytes, u32 value_len, value bytes }
///   n_tensor   u32
///   n_tensor x { u32 name_len, name bytes, u32 rank, rank x u64 extent,
///                prod(extent) x f64 values }
///   checksum   u64      FNV-1a over every preceding byte
struct Checkpoint {
  std::map<std::string, std::string> metadata;
  std::vector<NamedTensor> tensors;

  /// Appends every entry of `params` with names prefixed by `prefix`.
  void add_parameters(const std::string& prefix, const ParameterSet& params);
  /// Copies `prefix`-named tensors back into `params`, which must already
  /// have the matching layout. Throws std::runtime_error on a missing name or
  /// shape mismatch.
  void load_parameters(const std::string& prefix, ParameterSet& params) const;

  const Tensor* find(const std::string& name) const;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

/// Throws std::runtime_error on bad magic, unknown version, truncation or a
/// checksum mismatch.
Checkpoint read_checkpoint(std::istream& in);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace simdrl::nn
