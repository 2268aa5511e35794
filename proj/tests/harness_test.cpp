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

#include <cmath>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "simdrl/baselines.hpp"
#include "simdrl/config.hpp"
#include "simdrl/harness.hpp"
#include "simdrl/random.hpp"
#include "simdrl/scenario.hpp"

namespace simdrl::harness {
namespace {

ScenarioConfig small_base() {
  ScenarioConfig cfg = reference_config();
  cfg.sim.num_users = 2;
  cfg.sim.atoms_per_layer = 9;
  cfg.sim.num_layers = 2;
  cfg.agent.episodes = 1;
  cfg.agent.steps = 30;
  cfg.agent.replay_capacity = 16;
  cfg.agent.batch_size = 4;
  cfg.agent.conv_channels = 2;
  cfg.agent.fc_width = 8;
  cfg.baselines.ao_iterations = 5;
  cfg.baselines.codebook_size = 8;
  return cfg;
}

ExperimentSpec small_spec(std::vector<Scheme> schemes, std::vector<double> values, int trials) {
  ExperimentSpec spec;
  spec.schemes = std::move(schemes);
  spec.sweep = SweepVariable::TransmitPower;
  spec.values = std::move(values);
  spec.trials = trials;
  spec.base = small_base();
  spec.seed = 42;
  return spec;
}

const std::vector<Scheme> kAll = {Scheme::Drl, Scheme::DrlUpa, Scheme::Random, Scheme::Codebook,
                                  Scheme::Ao,  Scheme::Zf,     Scheme::Mmse};

TEST(DefaultConfigTest, ReferenceParameters) {
  const ScenarioConfig cfg = reference_config();
  EXPECT_NEAR(cfg.sim.wavelength * 28e9 / 299792458.0, 1.0, 0.01);
  const int side = static_cast<int>(std::lround(std::sqrt(cfg.sim.atoms_per_layer)));
  EXPECT_EQ(side * side, 49);
  EXPECT_EQ(cfg.sim.grid_side(), 7);
  EXPECT_NEAR(cfg.sim.max_power, 10e-3, 1e-18);
  EXPECT_NEAR(dbm_to_watts(10.0), 10e-3, 1e-18);
  EXPECT_NEAR(watts_to_dbm(cfg.sim.noise_vector()(0)), -104.0, 1e-9);
  EXPECT_NEAR(cfg.sim.thickness, 5 * cfg.sim.wavelength, 1e-15);
  EXPECT_NEAR(10 * std::log10(cfg.sim.ref_path_loss), -35.0, 1e-9);
  EXPECT_EQ(cfg.sim.num_users, 4);
  EXPECT_EQ(cfg.sim.num_layers, 4);
  EXPECT_EQ(cfg.agent.discount, 0.99);
  EXPECT_EQ(cfg.agent.lr_actor, 4e-4);
  EXPECT_EQ(cfg.agent.lr_critic, 4e-4);
  EXPECT_EQ(cfg.agent.plateau_patience, 200);
  EXPECT_EQ(cfg.agent.plateau_factor, 0.8);
  EXPECT_EQ(cfg.agent.tau_actor, 0.01);
  EXPECT_EQ(cfg.agent.episodes, 50);
  EXPECT_EQ(cfg.agent.steps, 26000);
  EXPECT_EQ(cfg.agent.batch_size, 32);
  EXPECT_EQ(cfg.agent.replay_capacity, 5000);
  EXPECT_EQ(cfg.agent.noise_bound, 2.0);
  EXPECT_EQ(cfg.agent.noise_v0, 2.0);
  EXPECT_EQ(cfg.agent.noise_decay, 0.95);
  EXPECT_EQ(cfg.agent.noise_gap, 100.0);
}

TEST(ConfigTest, WriteParseRoundTrip) {
  ScenarioConfig cfg = small_base();
  cfg.sim.bs_height = 12.5;
  cfg.agent.lr_actor = 1.0 / 3.0;
  cfg.sweep_values = "1,2,3";
  std::stringstream text;
  write_config(text, cfg);
  const ScenarioConfig back = parse_config(text);
  std::stringstream again;
  write_config(again, back);
  EXPECT_EQ(text.str(), again.str());
  EXPECT_EQ(back.agent.lr_actor, 1.0 / 3.0);
}

TEST(ConfigTest, DecibelKeysAndErrors) {
  std::istringstream text("P_max_dbm = 20\n# comment\nM = 3 # trailing\n");
  const ScenarioConfig cfg = parse_config(text);
  EXPECT_NEAR(cfg.sim.max_power, 0.1, 1e-15);
  EXPECT_EQ(cfg.sim.num_users, 3);
  std::istringstream unknown("no_such_key = 1\n");
  EXPECT_THROW(parse_config(unknown), std::invalid_argument);
  std::istringstream malformed("M = three\n");
  EXPECT_THROW(parse_config(malformed), std::invalid_argument);
}

TEST(SchemeTest, NamesAndParsing) {
  for (Scheme s : kAll) EXPECT_EQ(parse_scheme(scheme_name(s)), s);
  EXPECT_EQ(parse_scheme("mmse"), Scheme::Mmse);
  EXPECT_EQ(parse_scheme("drl-upa"), Scheme::DrlUpa);
  EXPECT_THROW(parse_scheme("bogus"), std::invalid_argument);
  EXPECT_EQ(parse_scheme_list("all"), kAll);
  EXPECT_EQ(parse_scheme_list("ZF,Random,ZF"), (std::vector<Scheme>{Scheme::Zf, Scheme::Random}));
  EXPECT_EQ(parse_sweep("whitening"), SweepVariable::Whitening);
  EXPECT_THROW(parse_sweep("Q"), std::invalid_argument);
}

TEST(ApplySweepTest, Variables) {
  const ScenarioConfig base = small_base();
  EXPECT_NEAR(apply_sweep(base, SweepVariable::TransmitPower, 20.0).sim.max_power, 0.1, 1e-15);
  EXPECT_EQ(apply_sweep(base, SweepVariable::Layers, 3.0).sim.num_layers, 3);
  EXPECT_EQ(apply_sweep(base, SweepVariable::Atoms, 16.0).sim.atoms_per_layer, 16);
  EXPECT_EQ(apply_sweep(base, SweepVariable::Whitening, 0.5).agent.noise_v0, 0.5);
  EXPECT_THROW(apply_sweep(base, SweepVariable::Layers, 2.5), std::invalid_argument);
  EXPECT_THROW(apply_sweep(base, SweepVariable::Atoms, 10.0), std::invalid_argument);
  EXPECT_THROW(apply_sweep(base, SweepVariable::Whitening, 0.0), std::invalid_argument);
}

TEST(RunSweepTest, DegenerateSweepEqualsRandomBaseline) {
  const ExperimentSpec spec = small_spec({Scheme::Random}, {10.0}, 1);
  const SweepResult result = run_sweep(spec);
  ASSERT_EQ(result.table.rows.size(), 1u);
  const ResultRow& row = result.table.rows[0];
  EXPECT_EQ(row.scheme, "Random");
  EXPECT_EQ(row.sweep, "P");
  EXPECT_EQ(row.trials, 1);
  EXPECT_EQ(row.std, 0.0);
  EXPECT_EQ(row.wall_s, 0.0);

  const Scenario scenario(apply_sweep(spec.base, spec.sweep, 10.0).sim);
  Rng channel_rng = make_stream(42, 0, "channel");
  const auto channel = scenario.draw_channel(channel_rng);
  Rng scheme_rng = make_stream(42, 0, "Random");
  EXPECT_EQ(row.mean_sum_rate, random_phase_baseline(scheme_rng, scenario, channel).sum_rate);
  EXPECT_EQ(result.raw[0].channel_checksum, channel_checksum(channel.G));
}

TEST(RunSweepTest, SameSeedSameTableAndThreadIndependent) {
  const ExperimentSpec spec = small_spec(kAll, {0.0, 10.0}, 2);
  const SweepResult a = run_sweep(spec, {}, 1);
  const SweepResult b = run_sweep(spec, {}, 3);
  EXPECT_EQ(a.table, b.table);
  std::ostringstream ca, cb;
  emit_csv(ca, a.table);
  emit_csv(cb, b.table);
  EXPECT_EQ(ca.str(), cb.str());
  for (const auto& rec : a.raw) EXPECT_TRUE(rec.ok()) << scheme_name(rec.scheme) << ": " << rec.error;
}

TEST(RunSweepTest, RowOrderAndValueDeduplication) {
  const ExperimentSpec spec = small_spec({Scheme::Mmse, Scheme::Random, Scheme::Zf}, {20.0, 0.0, 20.0}, 1);
  const ResultTable table = run_sweep(spec).table;
  ASSERT_EQ(table.rows.size(), 6u);
  const char* expected[] = {"Random", "Random", "ZF", "ZF", "MMSE", "MMSE"};
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(table.rows[i].scheme, expected[i]);
    EXPECT_EQ(table.rows[i].value, i % 2 == 0 ? 0.0 : 20.0);
  }
}

TEST(RunSweepTest, SchemesShareTrialChannels) {
  const ExperimentSpec spec = small_spec(kAll, {10.0}, 3);
  const SweepResult result = run_sweep(spec);
  for (int trial = 0; trial < 3; ++trial) {
    std::map<Scheme, std::uint64_t> sums;
    for (const auto& rec : result.raw) {
      if (rec.trial == trial) sums[rec.scheme] = rec.channel_checksum;
    }
    EXPECT_EQ(sums.at(Scheme::Zf), sums.at(Scheme::Mmse));
    EXPECT_EQ(sums.at(Scheme::Random), sums.at(Scheme::Ao));
    EXPECT_EQ(sums.at(Scheme::Random), sums.at(Scheme::Codebook));
    EXPECT_EQ(sums.at(Scheme::Random), sums.at(Scheme::Drl));
    EXPECT_EQ(sums.at(Scheme::Random), sums.at(Scheme::DrlUpa));
    EXPECT_NE(sums.at(Scheme::Random), sums.at(Scheme::Zf));
  }
}

TEST(RunSweepTest, AddingSchemesDoesNotPerturbOthers) {
  const SweepResult alone = run_sweep(small_spec({Scheme::Ao}, {10.0}, 2));
  const SweepResult mixed = run_sweep(small_spec({Scheme::Random, Scheme::Ao, Scheme::Zf}, {10.0}, 2));
  ASSERT_EQ(mixed.table.rows.size(), 3u);
  EXPECT_EQ(alone.table.rows[0], mixed.table.rows[1]);
}

TEST(RunSweepTest, FailedTrialsAreRecordedAndExcluded) {
  ExperimentSpec spec = small_spec({Scheme::Random, Scheme::Zf}, {10.0}, 2);
  spec.base.baselines.max_condition_number = 1.0;  // every channel is rejected
  const SweepResult result = run_sweep(spec);
  int failures = 0;
  for (const auto& rec : result.raw) {
    if (rec.scheme == Scheme::Zf) {
      EXPECT_FALSE(rec.ok());
      EXPECT_TRUE(std::isnan(rec.sum_rate));
      ++failures;
    } else {
      EXPECT_TRUE(rec.ok());
    }
  }
  EXPECT_EQ(failures, 2);
  EXPECT_EQ(result.table.rows[0].trials, 2);
  EXPECT_EQ(result.table.rows[1].trials, 0);
}

TEST(RunSweepTest, ProgressIsMonotoneAndComplete) {
  const ExperimentSpec spec = small_spec({Scheme::Random, Scheme::Zf, Scheme::Codebook}, {0.0, 10.0}, 2);
  std::size_t last = 0, total_seen = 0;
  run_sweep(spec, [&](std::size_t done, std::size_t total) {
    EXPECT_GT(done, last);
    last = done;
    total_seen = total;
  });
  EXPECT_EQ(total_seen, 2u * 2u * 3u);
  EXPECT_EQ(last, total_seen);
}

TEST(RunSweepTest, InvalidSpecThrows) {
  EXPECT_THROW(run_sweep(small_spec({}, {10.0}, 1)), std::invalid_argument);
  EXPECT_THROW(run_sweep(small_spec({Scheme::Random}, {}, 1)), std::invalid_argument);
  EXPECT_THROW(run_sweep(small_spec({Scheme::Random}, {10.0}, 0)), std::invalid_argument);
}

TEST(CsvTest, EmptyTableIsAnError) {
  std::ostringstream out;
  EXPECT_THROW(emit_csv(out, ResultTable{}), std::invalid_argument);
}

TEST(CsvTest, RoundTripAndReaggregation) {
  const ExperimentSpec spec = small_spec({Scheme::Random, Scheme::Ao, Scheme::Zf, Scheme::Mmse}, {0.0, 10.0}, 4);
  const SweepResult result = run_sweep(spec);
  std::stringstream csv;
  emit_csv(csv, result.table);
  EXPECT_EQ(csv.str().substr(0, kResultHeader.size()), kResultHeader);
  EXPECT_EQ(parse_result_csv(csv), result.table);

  std::stringstream raw;
  emit_raw_csv(raw, result.raw, spec.sweep);
  const auto records = parse_raw_csv(raw);
  ASSERT_EQ(records.size(), result.raw.size());
  const ResultTable again = aggregate(records, spec.sweep, false);
  ASSERT_EQ(again.rows.size(), result.table.rows.size());
  for (std::size_t i = 0; i < again.rows.size(); ++i) {
    const auto& x = again.rows[i];
    const auto& y = result.table.rows[i];
    EXPECT_EQ(x.scheme, y.scheme);
    EXPECT_EQ(x.trials, y.trials);
    EXPECT_NEAR(x.mean_sum_rate, y.mean_sum_rate, 1e-12 * std::abs(y.mean_sum_rate));
    EXPECT_NEAR(x.std, y.std, 1e-12 * std::abs(y.mean_sum_rate));
  }
}

TEST(CsvTest, MalformedInputThrows) {
  std::istringstream bad_header("scheme,value\n");
  EXPECT_THROW(parse_result_csv(bad_header), std::runtime_error);
  std::istringstream bad_row(std::string(kResultHeader) + "\nRandom,P,1,2\n");
  EXPECT_THROW(parse_result_csv(bad_row), std::runtime_error);
}

}  // namespace
}  // namespace simdrl::harness
