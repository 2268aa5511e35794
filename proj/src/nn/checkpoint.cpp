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

#include "simdrl/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <stdexcept>

namespace simdrl::nn {

namespace {

constexpr char kMagic[8] = {'S', 'I', 'M', 'D', 'R', 'L', 'C', 'K'};
constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

class ByteWriter {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    buffer_.insert(buffer_.end(), p, p + n);
  }
  template <typename U>
  void uint(U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i) buffer_.push_back(static_cast<unsigned char>(value >> (8 * i)));
  }
  void string(const std::string& s) {
    uint(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void real(double value) { uint(std::bit_cast<std::uint64_t>(value)); }
  const std::vector<unsigned char>& buffer() const { return buffer_; }

 private:
  std::vector<unsigned char> buffer_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<unsigned char>& buffer, std::size_t end)
      : buffer_(buffer), end_(end) {}
  void bytes(void* out, std::size_t n) {
    need(n);
    std::memcpy(out, buffer_.data() + pos_, n);
    pos_ += n;
  }
  template <typename U>
  U uint() {
    need(sizeof(U));
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(buffer_[pos_ + i]) << (8 * i);
    pos_ += sizeof(U);
    return value;
  }
  std::string string() {
    const auto n = uint<std::uint32_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(buffer_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  double real() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (n > end_ - pos_) throw std::runtime_error("checkpoint: truncated data");
  }
  const std::vector<unsigned char>& buffer_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

std::uint64_t fnv1a(const unsigned char* data, std::size_t n) {
  std::uint64_t h = kFnvOffset;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= kFnvPrime;
  }
  return h;
}

}  // namespace

void Checkpoint::add_parameters(const std::string& prefix, const ParameterSet& params) {
  for (const auto& e : params.entries()) tensors.push_back({prefix + e.name, e.value});
}

void Checkpoint::load_parameters(const std::string& prefix, ParameterSet& params) const {
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string name = prefix + params.name(i);
    const Tensor* t = find(name);
    if (!t) throw std::runtime_error("checkpoint: missing tensor '" + name + "'");
    if (t->shape() != params[i].shape()) {
      throw std::runtime_error("checkpoint: tensor '" + name + "' has shape " + shape_string(t->shape()) +
                               ", expected " + shape_string(params[i].shape()));
    }
    params[i] = *t;
  }
}

const Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t.value;
  }
  return nullptr;
}

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint) {
  ByteWriter w;
  w.bytes(kMagic, sizeof(kMagic));
  w.uint(kCheckpointVersion);
  w.uint(static_cast<std::uint32_t>(checkpoint.metadata.size()));
  for (const auto& [key, value] : checkpoint.metadata) {
    w.string(key);
    w.string(value);
  }
  w.uint(static_cast<std::uint32_t>(checkpoint.tensors.size()));
  for (const auto& t : checkpoint.tensors) {
    w.string(t.name);
    w.uint(static_cast<std::uint32_t>(t.value.rank()));
    for (const Index extent : t.value.shape()) w.uint(static_cast<std::uint64_t>(extent));
    for (Index i = 0; i < t.value.size(); ++i) w.real(t.value[i]);
  }
  const auto& buffer = w.buffer();
  const std::uint64_t checksum = fnv1a(buffer.data(), buffer.size());
  ByteWriter tail;
  tail.uint(checksum);
  out.write(reinterpret_cast<const char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()));
  out.write(reinterpret_cast<const char*>(tail.buffer().data()), 8);
  if (!out) throw std::runtime_error("checkpoint: write failed");
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path.string() + " for writing");
  write_checkpoint(out, checkpoint);
}

Checkpoint read_checkpoint(std::istream& in) {
  const std::vector<unsigned char> buffer((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buffer.size() < sizeof(kMagic) + 8) throw std::runtime_error("checkpoint: truncated data");
  const std::size_t body = buffer.size() - 8;
  std::uint64_t stored = 0;
  for (std::size_t i = 0; i < 8; ++i) stored |= static_cast<std::uint64_t>(buffer[body + i]) << (8 * i);

  ByteReader r(buffer, body);
  char magic[sizeof(kMagic)];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw std::runtime_error("checkpoint: bad magic");
  if (fnv1a(buffer.data(), body) != stored) throw std::runtime_error("checkpoint: checksum mismatch");
  const auto version = r.uint<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  }

  Checkpoint checkpoint;
  const auto n_meta = r.uint<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string key = r.string();
    checkpoint.metadata[std::move(key)] = r.string();
  }
  const auto n_tensors = r.uint<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    std::string name = r.string();
    const auto rank = r.uint<std::uint32_t>();
    Tensor::Shape shape(rank);
    for (auto& extent : shape) extent = static_cast<Index>(r.uint<std::uint64_t>());
    Tensor value(shape);
    for (Index k = 0; k < value.size(); ++k) value[k] = r.real();
    checkpoint.tensors.push_back({std::move(name), std::move(value)});
  }
  if (r.position() != body) throw std::runtime_error("checkpoint: trailing bytes before checksum");
  return checkpoint;
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace simdrl::nn
