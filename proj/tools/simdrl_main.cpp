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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "simdrl/baselines.hpp"
#include "simdrl/channel.hpp"
#include "simdrl/config.hpp"
#include "simdrl/harness.hpp"
#include "simdrl/metrics.hpp"
#include "simdrl/nn/checkpoint.hpp"
#include "simdrl/random.hpp"
#include "simdrl/rl/ddpg.hpp"
#include "simdrl/scenario.hpp"
#include "simdrl/text.hpp"
#include "simdrl/validation.hpp"

namespace {

using namespace simdrl;

simdrl::ScenarioConfig load_or_default(const std::string& path) {
  return path.empty() ? reference_config() : load_config(path);
}

struct RunArgs {
  std::string config;
  std::string sweep = "P";
  std::string schemes = "all";
  std::string values;
  int trials = 1;
  std::uint64_t seed = 0;
  std::string out;
  std::string raw;
  bool wall_time = false;
  bool quiet = false;
};

int run_command(const RunArgs& args) {
  harness::ExperimentSpec spec;
  spec.base = load_or_default(args.config);
  spec.sweep = harness::parse_sweep(args.sweep);
  spec.schemes = harness::parse_scheme_list(args.schemes);
  const std::string grid = args.values.empty() ? spec.base.sweep_values : args.values;
  if (grid.empty()) throw std::invalid_argument("no sweep values: pass --values or set sweep_values in the config");
  spec.values = parse_double_list(grid);
  spec.trials = args.trials;
  spec.seed = args.seed;
  spec.record_wall_time = args.wall_time;

  harness::ProgressCallback progress;
  if (!args.quiet) {
    progress = [](std::size_t done, std::size_t total) {
      std::fprintf(stderr, "\r[%zu/%zu]", done, total);
      if (done == total) std::fprintf(stderr, "\n");
    };
  }
  const auto result = harness::run_sweep(spec, progress);
  if (args.out.empty() || args.out == "-") {
    harness::emit_csv(std::cout, result.table);
  } else {
    harness::emit_csv(args.out, result.table);
  }
  if (!args.raw.empty()) harness::emit_raw_csv(args.raw, result.raw, spec.sweep);
  for (const auto& rec : result.raw) {
    if (!rec.ok()) {
      std::fprintf(stderr, "warning: %s value=%s trial=%d failed: %s\n",
                   std::string(harness::scheme_name(rec.scheme)).c_str(), format_double(rec.value).c_str(),
                   rec.trial, rec.error.c_str());
    }
  }
  return 0;
}

int gradcheck_command(std::uint64_t seed, int instances) {
  validation::GradcheckOptions options;
  options.instances = instances;
  bool ok = true;
  for (const auto& r : validation::run_gradcheck_suite(seed, options)) {
    const bool pass = r.passed(options.tolerance);
    ok = ok && pass;
    std::printf("%-4s %-16s max_rel_error=%.3e instances=%d checked=%zu skipped=%zu time=%.2fs\n",
                pass ? "PASS" : "FAIL", r.name.c_str(), r.max_rel_error, r.instances, r.coordinates, r.skipped,
                r.seconds);
  }
  return ok ? 0 : 1;
}

int oracle_command(std::uint64_t seed, int instances) {
  Rng rng(seed);
  bool ok = true;

  // Water-filling against a brute-force simplex search on parallel links.
  double worst_gap = 0.0;
  std::lognormal_distribution<double> gain_dist(0.0, 1.5);
  for (int i = 0; i < instances; ++i) {
    Eigen::VectorXd gains(3), noise = Eigen::VectorXd::Ones(3);
    for (auto& g : gains) g = gain_dist(rng);
    const double pmax = 10.0;
    const auto wf = water_filling(gains, noise, pmax);
    const auto grid = validation::simplex_grid_search(gains, noise, pmax);
    worst_gap = std::max(worst_gap, std::abs(validation::parallel_sum_rate(gains, noise, wf.power) - grid.sum_rate));
  }
  const bool wf_ok = worst_gap <= 1e-3;
  ok = ok && wf_ok;
  std::printf("%-4s water-filling vs grid search: worst gap %.3e bps/Hz over %d instances\n", wf_ok ? "PASS" : "FAIL",
              worst_gap, instances);

  // Vectorised SINR and SIM response against scalar loops.
  SimConfig cfg = reference_config().sim;
  cfg.atoms_per_layer = 16;
  cfg.num_layers = 3;
  cfg.num_users = 3;
  const Scenario scenario(cfg);
  double worst_sinr = 0.0, worst_response = 0.0;
  for (int i = 0; i < instances; ++i) {
    const auto channel = scenario.draw_channel(rng);
    const auto phases = PhaseConfiguration::random(rng, cfg.atoms_per_layer, cfg.num_layers);
    Eigen::VectorXd power = Eigen::VectorXd::Random(cfg.num_users).cwiseAbs();
    power *= cfg.max_power / power.sum();
    const Eigen::MatrixXcd b = sim_response(phases, scenario.mats);
    const Eigen::MatrixXcd b_ref = validation::scalar_sim_response(phases.phases, scenario.mats);
    worst_response = std::max(worst_response, (b - b_ref).norm() / b_ref.norm());
    const Eigen::VectorXd gamma = sinr(channel.G, b, power, scenario.noise);
    const auto gamma_ref = validation::scalar_sinr(channel.G, b_ref, power, scenario.noise);
    for (std::size_t m = 0; m < gamma_ref.size(); ++m) {
      worst_sinr = std::max(worst_sinr, std::abs(gamma[static_cast<Eigen::Index>(m)] - gamma_ref[m]) / gamma_ref[m]);
    }
  }
  const bool sinr_ok = worst_sinr <= 1e-10 && worst_response <= 1e-12;
  ok = ok && sinr_ok;
  std::printf("%-4s scalar SINR oracle: worst relative error %.3e (SIM response %.3e) over %d instances\n",
              sinr_ok ? "PASS" : "FAIL", worst_sinr, worst_response, instances);
  return ok ? 0 : 1;
}

int train_command(const std::string& config_path, std::uint64_t seed, const std::string& trace,
                  const std::string& checkpoint) {
  const ScenarioConfig cfg = load_or_default(config_path);
  const Scenario scenario(cfg.sim);
  Rng rng = make_stream(seed, 0, "train");
  const auto result = rl::run_training(scenario, cfg.agent, rng);
  for (std::size_t e = 0; e < result.episodes.size(); ++e) {
    std::printf("episode %zu best_reward %s train_steps %lld\n", e, format_double(result.episodes[e].best_reward).c_str(),
                static_cast<long long>(result.episodes[e].train_steps));
  }
  if (!trace.empty()) rl::write_trace_csv(trace, result.trace);
  if (!checkpoint.empty()) nn::write_checkpoint(checkpoint, rl::agent_checkpoint(result.agent));
  return 0;
}

int dump_channel_command(const std::string& config_path, std::uint64_t seed, int trial, const std::string& out) {
  const ScenarioConfig cfg = load_or_default(config_path);
  const Scenario scenario(cfg.sim);
  Rng rng = make_stream(seed, static_cast<std::uint64_t>(trial), "channel");
  const auto channel = scenario.draw_channel(rng);
  if (out.empty() || out == "-") {
    write_channel_csv(std::cout, channel.G);
  } else {
    write_channel_csv(out, channel.G);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and DDPG agent for SIM-assisted multi-user MISO downlink"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a parameter sweep and write aggregated CSV");
  run_cmd->add_option("--config", run.config, "Config file (defaults to the reference scenario)");
  run_cmd->add_option("--sweep", run.sweep, "Sweep variable: P, L, N or whitening")->required();
  run_cmd->add_option("--schemes", run.schemes, "Comma list of DRL,DRL-UPA,Random,Codebook,AO,ZF,MMSE or 'all'");
  run_cmd->add_option("--values", run.values, "Comma list of sweep values (overrides sweep_values)");
  run_cmd->add_option("--trials", run.trials, "Independent trials per value")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", run.seed, "Master seed");
  run_cmd->add_option("--out", run.out, "Output CSV path ('-' for stdout)");
  run_cmd->add_option("--raw", run.raw, "Optional per-trial CSV path");
  run_cmd->add_flag("--wall-time", run.wall_time, "Record wall-clock seconds (output is then not reproducible)");
  run_cmd->add_flag("--quiet", run.quiet, "No progress output");

  std::uint64_t check_seed = 1;
  int check_instances = 20;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of every network layer");
  grad_cmd->add_option("--seed", check_seed, "Seed");
  grad_cmd->add_option("--instances", check_instances, "Random instances per check")->check(CLI::PositiveNumber);

  std::uint64_t oracle_seed = 1;
  int oracle_instances = 50;
  auto* oracle_cmd = app.add_subcommand("oracle", "Brute-force validation of water-filling and SINR");
  oracle_cmd->add_option("--seed", oracle_seed, "Seed");
  oracle_cmd->add_option("--instances", oracle_instances, "Random instances per suite")->check(CLI::PositiveNumber);

  std::string train_config, train_trace, train_checkpoint;
  std::uint64_t train_seed = 0;
  auto* train_cmd = app.add_subcommand("train", "Train one DDPG agent and report per-episode best rewards");
  train_cmd->add_option("--config", train_config, "Config file");
  train_cmd->add_option("--seed", train_seed, "Seed");
  train_cmd->add_option("--trace", train_trace, "Training-trace CSV path");
  train_cmd->add_option("--checkpoint", train_checkpoint, "Agent checkpoint path");

  std::string dump_config, dump_out;
  std::uint64_t dump_seed = 0;
  int dump_trial = 0;
  auto* dump_cmd = app.add_subcommand("dump-channel", "Write one trial's channel as m,n,re,im CSV");
  dump_cmd->add_option("--config", dump_config, "Config file");
  dump_cmd->add_option("--seed", dump_seed, "Seed");
  dump_cmd->add_option("--trial", dump_trial, "Trial index")->check(CLI::NonNegativeNumber);
  dump_cmd->add_option("--out", dump_out, "Output CSV path ('-' for stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return run_command(run);
    if (*grad_cmd) return gradcheck_command(check_seed, check_instances);
    if (*oracle_cmd) return oracle_command(oracle_seed, oracle_instances);
    if (*train_cmd) return train_command(train_config, train_seed, train_trace, train_checkpoint);
    if (*dump_cmd) return dump_channel_command(dump_config, dump_seed, dump_trial, dump_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
