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

#include "simdrl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "simdrl/baselines.hpp"
#include "simdrl/random.hpp"
#include "simdrl/rl/ddpg.hpp"
#include "simdrl/scenario.hpp"
#include "simdrl/text.hpp"

namespace simdrl::harness {

namespace {

constexpr Scheme kAllSchemes[] = {Scheme::Drl, Scheme::DrlUpa, Scheme::Random, Scheme::Codebook,
                                  Scheme::Ao,  Scheme::Zf,     Scheme::Mmse};

std::string lower(std::string_view text) {
  std::string out(trim(text));
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

int integral_value(double value, const char* what) {
  if (value != std::round(value) || value < 1 || value > 1e6) {
    throw std::invalid_argument(std::string(what) + " sweep needs positive integers, got " + format_double(value));
  }
  return static_cast<int>(value);
}

std::string csv_safe(std::string text) {
  for (char& c : text) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return text;
}

std::string hex64(std::uint64_t value) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(value));
  return buffer;
}

std::vector<std::string_view> split_row(std::string_view line, std::size_t expected, std::size_t line_no) {
  auto fields = split(line, ',');
  if (fields.size() != expected) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": expected " + std::to_string(expected) +
                             " fields, got " + std::to_string(fields.size()));
  }
  return fields;
}

/// Runs `tasks` on `threads` workers; each task writes only its own slots.
void run_tasks(const std::vector<std::function<void()>>& tasks, unsigned threads) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        tasks[i]();
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned count = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(tasks.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < count; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Everything shared by the trials of one sweep value.
struct ValueContext {
  double value = 0.0;
  ScenarioConfig config;
  std::unique_ptr<Scenario> scenario;
  CorrelationModel bs_correlation;
  std::vector<ChannelRealization> channels;  // one per trial
};

}  // namespace

std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::Drl: return "DRL";
    case Scheme::DrlUpa: return "DRL-UPA";
    case Scheme::Random: return "Random";
    case Scheme::Codebook: return "Codebook";
    case Scheme::Ao: return "AO";
    case Scheme::Zf: return "ZF";
    case Scheme::Mmse: return "MMSE";
  }
  throw std::invalid_argument("unknown scheme");
}

Scheme parse_scheme(std::string_view text) {
  const std::string key = lower(text);
  for (Scheme s : kAllSchemes) {
    if (lower(scheme_name(s)) == key) return s;
  }
  if (key == "drl_upa" || key == "upa") return Scheme::DrlUpa;
  throw std::invalid_argument("unknown scheme '" + std::string(text) + "'");
}

std::vector<Scheme> parse_scheme_list(std::string_view text) {
  if (lower(text) == "all") return {std::begin(kAllSchemes), std::end(kAllSchemes)};
  std::vector<Scheme> schemes;
  for (auto part : split(text, ',')) {
    if (trim(part).empty()) continue;
    const Scheme s = parse_scheme(part);
    if (std::find(schemes.begin(), schemes.end(), s) == schemes.end()) schemes.push_back(s);
  }
  if (schemes.empty()) throw std::invalid_argument("empty scheme list");
  return schemes;
}

std::string_view sweep_name(SweepVariable sweep) {
  switch (sweep) {
    case SweepVariable::TransmitPower: return "P";
    case SweepVariable::Layers: return "L";
    case SweepVariable::Atoms: return "N";
    case SweepVariable::Whitening: return "whitening";
  }
  throw std::invalid_argument("unknown sweep variable");
}

SweepVariable parse_sweep(std::string_view text) {
  const std::string key = lower(text);
  if (key == "p") return SweepVariable::TransmitPower;
  if (key == "l") return SweepVariable::Layers;
  if (key == "n") return SweepVariable::Atoms;
  if (key == "whitening" || key == "v0") return SweepVariable::Whitening;
  throw std::invalid_argument("unknown sweep variable '" + std::string(text) + "' (expected P, L, N or whitening)");
}

ScenarioConfig apply_sweep(const ScenarioConfig& base, SweepVariable sweep, double value) {
  ScenarioConfig cfg = base;
  switch (sweep) {
    case SweepVariable::TransmitPower:
      if (!std::isfinite(value)) throw std::invalid_argument("P sweep value must be finite");
      cfg.sim.max_power = dbm_to_watts(value);
      break;
    case SweepVariable::Layers:
      cfg.sim.num_layers = integral_value(value, "L");
      break;
    case SweepVariable::Atoms:
      cfg.sim.atoms_per_layer = integral_value(value, "N");
      break;
    case SweepVariable::Whitening:
      if (!(value > 0) || !std::isfinite(value)) throw std::invalid_argument("whitening sweep needs v0 > 0");
      cfg.agent.noise_v0 = value;
      break;
  }
  cfg.sim.validate();
  return cfg;
}

void ExperimentSpec::validate() const {
  if (schemes.empty()) throw std::invalid_argument("experiment needs at least one scheme");
  if (values.empty()) throw std::invalid_argument("experiment needs a nonempty value grid");
  if (trials < 1) throw std::invalid_argument("experiment needs trials >= 1");
}

unsigned thread_count() {
  if (const char* env = std::getenv("SIMDRL_THREADS"); env && *env) {
    const auto n = parse_int(env);
    if (n < 1) throw std::invalid_argument("SIMDRL_THREADS must be a positive integer");
    return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SweepResult run_sweep(const ExperimentSpec& spec, const ProgressCallback& progress, unsigned threads) {
  spec.validate();
  std::vector<double> values = spec.values;
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<Scheme> schemes;
  for (Scheme s : kAllSchemes) {
    if (std::find(spec.schemes.begin(), spec.schemes.end(), s) != spec.schemes.end()) schemes.push_back(s);
  }
  const bool codebook = std::find(schemes.begin(), schemes.end(), Scheme::Codebook) != schemes.end();
  const auto trials = static_cast<std::size_t>(spec.trials);

  std::vector<ValueContext> contexts(values.size());
  for (std::size_t v = 0; v < values.size(); ++v) {
    ValueContext& ctx = contexts[v];
    ctx.value = values[v];
    ctx.config = apply_sweep(spec.base, spec.sweep, values[v]);
    ctx.scenario = std::make_unique<Scenario>(ctx.config.sim);
    ctx.bs_correlation = bs_array_correlation(ctx.config.sim);
    for (std::size_t trial = 0; trial < trials; ++trial) {
      Rng rng = make_stream(spec.seed, trial, "channel");
      ctx.channels.push_back(ctx.scenario->draw_channel(rng));
    }
  }

  // records[(v * trials + trial) * schemes + s]
  std::vector<TrialRecord> records(values.size() * trials * schemes.size());
  auto slot = [&](std::size_t v, std::size_t trial, std::size_t s) -> TrialRecord& {
    return records[(v * trials + trial) * schemes.size() + s];
  };
  const std::size_t total = records.size();
  std::size_t done = 0;
  std::mutex progress_mutex;
  auto report = [&](std::size_t units) {
    std::lock_guard lock(progress_mutex);
    done += units;
    if (progress) progress(done, total);
  };
  using Clock = std::chrono::steady_clock;
  auto seconds_since = [&](Clock::time_point start) {
    return spec.record_wall_time ? std::chrono::duration<double>(Clock::now() - start).count() : 0.0;
  };

  std::vector<std::function<void()>> tasks;
  for (std::size_t v = 0; v < values.size(); ++v) {
    for (std::size_t trial = 0; trial < trials; ++trial) {
      tasks.emplace_back([&, v, trial] {
        const ValueContext& ctx = contexts[v];
        const Scenario& scenario = *ctx.scenario;
        const ChannelRealization& channel = ctx.channels[trial];
        const BaselineConfig& bl = ctx.config.baselines;
        const double pmax = ctx.config.sim.max_power;
        std::optional<ChannelRealization> direct;
        auto direct_channel = [&]() -> const ChannelRealization& {
          if (!direct) {
            Rng rng = make_stream(spec.seed, trial, "direct");
            direct = draw_direct_channel(rng, ctx.bs_correlation, channel);
          }
          return *direct;
        };
        std::size_t units = 0;
        for (std::size_t s = 0; s < schemes.size(); ++s) {
          const Scheme scheme = schemes[s];
          if (scheme == Scheme::Codebook) continue;
          TrialRecord& rec = slot(v, trial, s);
          rec.scheme = scheme;
          rec.value = ctx.value;
          rec.trial = static_cast<int>(trial);
          rec.channel_checksum = channel_checksum(channel.G);
          Rng rng = make_stream(spec.seed, trial, scheme_name(scheme));
          const auto start = Clock::now();
          try {
            switch (scheme) {
              case Scheme::Drl:
              case Scheme::DrlUpa: {
                rl::TrainingOptions options;
                const int last = ctx.config.agent.episodes - 1;
                options.channel_source = [&](int episode, Rng& episode_rng) {
                  return episode == last ? channel : scenario.draw_channel(episode_rng);
                };
                options.uniform_power = scheme == Scheme::DrlUpa;
                const auto result = rl::run_training(scenario, ctx.config.agent, rng, options);
                rec.sum_rate = result.episodes.back().best_reward;
                rec.channel_checksum = result.episodes.back().channel_checksum;
                break;
              }
              case Scheme::Random:
                rec.sum_rate = random_phase_baseline(rng, scenario, channel, bl.water_filling_rounds).sum_rate;
                break;
              case Scheme::Ao:
                rec.sum_rate = ao_optimize(rng, scenario, channel, AoOptions::from(bl)).sum_rate;
                break;
              case Scheme::Zf:
                rec.channel_checksum = channel_checksum(direct_channel().G);
                rec.sum_rate = zf_precoder(direct_channel().G, pmax, scenario.noise, bl.max_condition_number,
                                           bl.water_filling_rounds)
                                   .sum_rate;
                break;
              case Scheme::Mmse:
                rec.channel_checksum = channel_checksum(direct_channel().G);
                rec.sum_rate =
                    mmse_precoder(direct_channel().G, pmax, scenario.noise, bl.water_filling_rounds).sum_rate;
                break;
              case Scheme::Codebook:
                break;
            }
            if (!std::isfinite(rec.sum_rate) || rec.sum_rate < 0) {
              throw std::runtime_error("non-finite or negative sum rate");
            }
          } catch (const std::exception& e) {
            rec.sum_rate = std::nan("");
            rec.error = e.what();
          }
          rec.wall_s = seconds_since(start);
          ++units;
        }
        report(units);
      });
    }
    if (codebook) {
      tasks.emplace_back([&, v] {
        const ValueContext& ctx = contexts[v];
        const Scenario& scenario = *ctx.scenario;
        const auto s = static_cast<std::size_t>(
            std::find(schemes.begin(), schemes.end(), Scheme::Codebook) - schemes.begin());
        const int wf = ctx.config.baselines.water_filling_rounds;
        const auto start = Clock::now();
        std::string error;
        PhaseConfiguration best;
        try {
          Rng rng = make_stream(spec.seed, 0, "Codebook");
          const int size = ctx.config.baselines.resolved_codebook_size(ctx.config.agent);
          best = codebook_baseline(rng, scenario, ctx.channels, size, wf).best;
        } catch (const std::exception& e) {
          error = e.what();
        }
        const double wall = seconds_since(start) / static_cast<double>(trials);
        for (std::size_t trial = 0; trial < trials; ++trial) {
          TrialRecord& rec = slot(v, trial, s);
          const ChannelRealization& channel = ctx.channels[trial];
          rec = {Scheme::Codebook, ctx.value, static_cast<int>(trial), std::nan(""), channel_checksum(channel.G),
                 error, wall};
          if (!error.empty()) continue;
          const Eigen::MatrixXcd b = sim_response(best, scenario.mats);
          const PowerAllocation p =
              iterative_water_filling(channel.G, b, scenario.noise, ctx.config.sim.max_power, wf);
          rec.sum_rate = sum_rate(sinr(channel.G, b, p, scenario.noise));
        }
        report(trials);
      });
    }
  }

  run_tasks(tasks, threads == 0 ? thread_count() : threads);

  SweepResult result;
  result.raw = std::move(records);
  result.table = aggregate(result.raw, spec.sweep, spec.record_wall_time);
  return result;
}

ResultTable aggregate(const std::vector<TrialRecord>& raw, SweepVariable sweep, bool record_wall_time) {
  struct Accumulator {
    std::vector<double> rates;
    double wall = 0.0;
  };
  std::map<std::pair<int, double>, Accumulator> groups;
  for (const TrialRecord& rec : raw) {
    Accumulator& acc = groups[{static_cast<int>(rec.scheme), rec.value}];
    if (rec.ok()) acc.rates.push_back(rec.sum_rate);
    acc.wall += rec.wall_s;
  }
  ResultTable table;
  for (const auto& [key, acc] : groups) {
    ResultRow row;
    row.scheme = std::string(scheme_name(static_cast<Scheme>(key.first)));
    row.sweep = std::string(sweep_name(sweep));
    row.value = key.second;
    row.trials = static_cast<int>(acc.rates.size());
    if (acc.rates.empty()) {
      row.mean_sum_rate = std::nan("");
      row.std = std::nan("");
    } else {
      double sum = 0.0;
      for (double r : acc.rates) sum += r;
      row.mean_sum_rate = sum / static_cast<double>(acc.rates.size());
      double sq = 0.0;
      for (double r : acc.rates) sq += (r - row.mean_sum_rate) * (r - row.mean_sum_rate);
      row.std = acc.rates.size() > 1 ? std::sqrt(sq / static_cast<double>(acc.rates.size() - 1)) : 0.0;
    }
    row.wall_s = record_wall_time ? acc.wall : 0.0;
    table.rows.push_back(std::move(row));
  }
  return table;
}

void emit_csv(std::ostream& out, const ResultTable& table) {
  if (table.rows.empty()) throw std::invalid_argument("emit_csv: empty result table");
  out << kResultHeader << '\n';
  for (const ResultRow& row : table.rows) {
    out << row.scheme << ',' << row.sweep << ',' << format_double(row.value) << ','
        << format_double(row.mean_sum_rate) << ',' << format_double(row.std) << ',' << row.trials << ','
        << format_double(row.wall_s) << '\n';
  }
}

void emit_csv(const std::filesystem::path& path, const ResultTable& table) {
  if (table.rows.empty()) throw std::invalid_argument("emit_csv: empty result table");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  emit_csv(out, table);
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

ResultTable parse_result_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kResultHeader) {
    throw std::runtime_error("result CSV: header must be '" + std::string(kResultHeader) + "'");
  }
  ResultTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_row(trim(line), 7, line_no);
    table.rows.push_back({std::string(f[0]), std::string(f[1]), parse_double(f[2]), parse_double(f[3]),
                          parse_double(f[4]), static_cast<int>(parse_int(f[5])), parse_double(f[6])});
  }
  return table;
}

void emit_raw_csv(std::ostream& out, const std::vector<TrialRecord>& raw, SweepVariable sweep) {
  out << kRawHeader << '\n';
  for (const TrialRecord& rec : raw) {
    out << scheme_name(rec.scheme) << ',' << sweep_name(sweep) << ',' << format_double(rec.value) << ','
        << rec.trial << ',' << format_double(rec.sum_rate) << ',' << hex64(rec.channel_checksum) << ','
        << csv_safe(rec.error) << '\n';
  }
}

void emit_raw_csv(const std::filesystem::path& path, const std::vector<TrialRecord>& raw, SweepVariable sweep) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  emit_raw_csv(out, raw, sweep);
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<TrialRecord> parse_raw_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kRawHeader) {
    throw std::runtime_error("raw CSV: header must be '" + std::string(kRawHeader) + "'");
  }
  std::vector<TrialRecord> raw;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_row(line, 7, line_no);
    TrialRecord rec;
    rec.scheme = parse_scheme(f[0]);
    rec.value = parse_double(f[2]);
    rec.trial = static_cast<int>(parse_int(f[3]));
    rec.sum_rate = parse_double(f[4]);
    rec.channel_checksum = std::stoull(std::string(f[5]), nullptr, 16);
    rec.error = std::string(f[6]);
    raw.push_back(std::move(rec));
  }
  return raw;
}

}  // namespace simdrl::harness
