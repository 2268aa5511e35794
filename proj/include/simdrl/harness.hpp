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
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "simdrl/config.hpp"

namespace simdrl::harness {

enum class Scheme { Drl, DrlUpa, Random, Codebook, Ao, Zf, Mmse };

/// Canonical names: DRL, DRL-UPA, Random, Codebook, AO, ZF, MMSE.
std::string_view scheme_name(Scheme scheme);
/// Case-insensitive. Throws std::invalid_argument on an unknown name.
Scheme parse_scheme(std::string_view text);
/// Comma-separated names, or "all". Duplicates are dropped.
std::vector<Scheme> parse_scheme_list(std::string_view text);

enum class SweepVariable { TransmitPower, Layers, Atoms, Whitening };

/// P, L, N, whitening.
std::string_view sweep_name(SweepVariable sweep);
SweepVariable parse_sweep(std::string_view text);

/// The scenario with one sweep value applied:
///   P          transmit power budget in dBm
///   L          number of metasurface layers
///   N          meta-atoms per layer
///   whitening  initial exploration variance v0
/// Throws std::invalid_argument on a value the variable cannot take.
ScenarioConfig apply_sweep(const ScenarioConfig& base, SweepVariable sweep, double value);

struct ExperimentSpec {
  std::vector<Scheme> schemes;
  SweepVariable sweep = SweepVariable::TransmitPower;
  std::vector<double> values;
  int trials = 1;
  ScenarioConfig base;
  std::uint64_t seed = 0;
  bool record_wall_time = false;  // when false the wall_s column is 0

  /// Throws std::invalid_argument unless schemes and values are nonempty and
  /// trials >= 1.
  void validate() const;
};

/// Outcome of one scheme on one trial of one sweep value.
struct TrialRecord {
  Scheme scheme = Scheme::Random;
  double value = 0.0;
  int trial = 0;
  double sum_rate = 0.0;
  std::uint64_t channel_checksum = 0;  // of the channel the scheme was scored on
  std::string error;                   // nonempty when the scheme failed
  double wall_s = 0.0;

  bool ok() const { return error.empty(); }
};

struct ResultRow {
  std::string scheme;
  std::string sweep;
  double value = 0.0;
  double mean_sum_rate = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single trial
  int trials = 0;    // successful trials
  double wall_s = 0.0;

  bool operator==(const ResultRow&) const = default;
};

struct ResultTable {
  std::vector<ResultRow> rows;

  bool operator==(const ResultTable&) const = default;
};

struct SweepResult {
  ResultTable table;
  std::vector<TrialRecord> raw;  // ordered by value, trial, scheme
};

/// Reports (finished units, total units); one unit is one scheme on one trial.
using ProgressCallback = std::function<void(std::size_t done, std::size_t total)>;

/// Thread count from SIMDRL_THREADS, else the hardware concurrency (>= 1).
unsigned thread_count();

/// Runs every scheme on every (value, trial). Each trial draws its UE
/// placement and channel from a stream keyed by (seed, trial) and shared by
/// all schemes. Trials run on `threads` workers (0 selects thread_count())
/// and are merged in a fixed order, so the result does not depend on the
/// thread count.
SweepResult run_sweep(const ExperimentSpec& spec, const ProgressCallback& progress = {}, unsigned threads = 0);

/// Mean and sample std of the successful records per (scheme, value), rows
/// ordered by scheme (enum order) then value ascending.
ResultTable aggregate(const std::vector<TrialRecord>& raw, SweepVariable sweep, bool record_wall_time);

inline constexpr std::string_view kResultHeader = "scheme,sweep,value,mean_sum_rate,std,trials,wall_s";
inline constexpr std::string_view kRawHeader = "scheme,sweep,value,trial,sum_rate,channel_checksum,error";

/// Throws std::invalid_argument on an empty table.
void emit_csv(std::ostream& out, const ResultTable& table);
/// Throws std::runtime_error naming the path on I/O failure.
void emit_csv(const std::filesystem::path& path, const ResultTable& table);
/// Throws std::runtime_error on a malformed header or row.
ResultTable parse_result_csv(std::istream& in);

void emit_raw_csv(std::ostream& out, const std::vector<TrialRecord>& raw, SweepVariable sweep);
void emit_raw_csv(const std::filesystem::path& path, const std::vector<TrialRecord>& raw, SweepVariable sweep);
std::vector<TrialRecord> parse_raw_csv(std::istream& in);

}  // namespace simdrl::harness
