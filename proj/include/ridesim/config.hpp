// Copyright 2026 The ridesim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Run configuration: an INI file of `section.key` values plus command-line
// overrides. Every key is declared once in a registry that drives parsing,
// overrides, validation of unknown keys and the canonical hash.

#ifndef RIDESIM_CONFIG_HPP_
#define RIDESIM_CONFIG_HPP_

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "ridesim/agent.hpp"
#include "ridesim/common.hpp"
#include "ridesim/distributions.hpp"
#include "ridesim/platform.hpp"
#include "ridesim/ridegen.hpp"
#include "ridesim/synthetic.hpp"
#include "ridesim/training.hpp"

namespace ridesim {

struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::string log_path;
  std::string out_dir = "artifacts";

  GridSpec grid;
  DemandScaler demand;
  PlatformParams platform;

  int drivers = 50;
  int days = 7;
  double speed_kmh = 30.0;
  int max_offers = 5;
  int default_last_week_trips = 40;

  SyntheticPolicySpec synth;

  // Demonstration window; empty means the whole log.
  std::string bc_window_start;
  std::string bc_window_end;
  BcConfig bc;
  AgentConfig agent;
  // Derive the value support from demonstration rewards instead of
  // agent.v_min / agent.v_max.
  bool auto_support = true;
  RlConfig rl;

  int replications = 20;
  int offer_days = 28;
  int bootstrap_resamples = 1000;
  std::string eval_agent = "rl";

  std::string sweep_key = "platform.peak_fare_multiplier";
  std::vector<std::string> sweep_values = {"2", "3"};

  void validate() const {
    if (!seed) throw ValidationError("config lacks the required key 'seed'");
    grid.validate();
    demand.validate();
    platform.validate();
    if (drivers < 1) throw ValidationError("sim.drivers must be >= 1");
    if (days < 1) throw ValidationError("sim.days must be >= 1");
    if (!(speed_kmh > 0.0)) throw ValidationError("sim.speed_kmh must be > 0");
    if (max_offers < 1) throw ValidationError("sim.max_offers must be >= 1");
    if (default_last_week_trips < 0) {
      throw ValidationError("sim.default_last_week_trips must be >= 0");
    }
    synth.validate();
    bc.validate();
    agent.validate();
    rl.validate();
    if (replications < 1) throw ValidationError("evaluate.replications must be >= 1");
    if (offer_days < 1) throw ValidationError("evaluate.offer_days must be >= 1");
    if (bootstrap_resamples < 1) {
      throw ValidationError("evaluate.bootstrap_resamples must be >= 1");
    }
    if (eval_agent != "rl" && eval_agent != "bc") {
      throw ValidationError("evaluate.agent must be 'rl' or 'bc'");
    }
    if (!bc_window_start.empty() && !parse_timestamp(bc_window_start)) {
      throw ValidationError("bc.window_start is not a timestamp");
    }
    if (!bc_window_end.empty() && !parse_timestamp(bc_window_end)) {
      throw ValidationError("bc.window_end is not a timestamp");
    }
    if (sweep_values.empty()) throw ValidationError("sweep.values must not be empty");
  }
};

struct ConfigKey {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

namespace config_detail {

inline double to_real(const std::string& key, const std::string& v) {
  const auto x = parse_real(v);
  if (!x) throw ValidationError(fmt::format("{}: '{}' is not a number", key, v));
  return *x;
}

template <class Int>
Int to_int(const std::string& key, const std::string& v) {
  const auto s = trim(v);
  Int out{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ValidationError(fmt::format("{}: '{}' is not an integer", key, v));
  }
  return out;
}

inline bool to_bool(const std::string& key, const std::string& v) {
  const auto s = trim(v);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ValidationError(fmt::format("{}: '{}' is not a boolean", key, v));
}

inline std::vector<std::string> to_list(const std::string& v) {
  std::vector<std::string> out;
  for (const auto& cell : split(trim(v), ',')) {
    const auto t = trim(cell);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

inline std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + xs[i];
  return out;
}

template <class Acc>
ConfigKey real(std::string name, Acc acc) {
  return {name, [acc, name](RunConfig& c, const std::string& v) { acc(c) = to_real(name, v); },
          [acc](const RunConfig& c) { return format_real(acc(c)); }};
}

template <class Int, class Acc>
ConfigKey integer(std::string name, Acc acc) {
  return {name,
          [acc, name](RunConfig& c, const std::string& v) { acc(c) = to_int<Int>(name, v); },
          [acc](const RunConfig& c) { return std::to_string(acc(c)); }};
}

template <class Acc>
ConfigKey boolean(std::string name, Acc acc) {
  return {name, [acc, name](RunConfig& c, const std::string& v) { acc(c) = to_bool(name, v); },
          [acc](const RunConfig& c) { return std::string(acc(c) ? "true" : "false"); }};
}

template <class Acc>
ConfigKey text(std::string name, Acc acc) {
  return {name, [acc](RunConfig& c, const std::string& v) { acc(c) = std::string(trim(v)); },
          [acc](const RunConfig& c) { return acc(c); }};
}

}  // namespace config_detail

// All recognized keys, in canonical order.
inline const std::vector<ConfigKey>& config_keys() {
  using namespace config_detail;
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    k.push_back({"seed",
                 [](RunConfig& c, const std::string& v) {
                   c.seed = to_int<std::uint64_t>("seed", v);
                 },
                 [](const RunConfig& c) { return c.seed ? std::to_string(*c.seed) : ""; }});
    k.push_back(text("paths.log", [](auto& c) -> auto& { return c.log_path; }));
    k.push_back(text("paths.out", [](auto& c) -> auto& { return c.out_dir; }));

    k.push_back(real("grid.width_km", [](auto& c) -> auto& { return c.grid.width_km; }));
    k.push_back(real("grid.height_km", [](auto& c) -> auto& { return c.grid.height_km; }));
    k.push_back(real("grid.noise_epsilon_km",
                     [](auto& c) -> auto& { return c.grid.noise_epsilon_km; }));
    k.push_back(real("grid.origin_lat", [](auto& c) -> auto& { return c.grid.origin_lat; }));
    k.push_back(real("grid.origin_lon", [](auto& c) -> auto& { return c.grid.origin_lon; }));
    k.push_back(real("grid.km_per_deg_lat",
                     [](auto& c) -> auto& { return c.grid.km_per_deg_lat; }));
    k.push_back(real("grid.km_per_deg_lon",
                     [](auto& c) -> auto& { return c.grid.km_per_deg_lon; }));

    k.push_back(real("demand.scale_factor",
                     [](auto& c) -> auto& { return c.demand.scale_factor; }));

    k.push_back(real("platform.fare_per_km",
                     [](auto& c) -> auto& { return c.platform.fare_per_km; }));
    k.push_back(real("platform.cost_per_km",
                     [](auto& c) -> auto& { return c.platform.cost_per_km; }));
    k.push_back({"platform.peak_hours",
                 [](RunConfig& c, const std::string& v) {
                   std::vector<HourRange> ranges;
                   for (const auto& cell : to_list(v)) {
                     const auto ends = split(cell, '-');
                     if (ends.size() != 2) {
                       throw ValidationError(
                           fmt::format("platform.peak_hours: bad range '{}'", cell));
                     }
                     ranges.push_back({to_int<int>("platform.peak_hours", ends[0]),
                                       to_int<int>("platform.peak_hours", ends[1])});
                   }
                   c.platform.peak_hours = ranges;
                 },
                 [](const RunConfig& c) {
                   std::vector<std::string> cells;
                   for (const auto& h : c.platform.peak_hours) {
                     cells.push_back(fmt::format("{}-{}", h.start_hour, h.end_hour));
                   }
                   return join(cells);
                 }});
    k.push_back(real("platform.peak_fare_multiplier",
                     [](auto& c) -> auto& { return c.platform.peak_fare_multiplier; }));
    k.push_back(real("platform.weekly_reward_amount",
                     [](auto& c) -> auto& { return c.platform.weekly_reward_amount; }));
    k.push_back(real("platform.weekly_target_multiplier",
                     [](auto& c) -> auto& { return c.platform.weekly_target_multiplier; }));
    k.push_back(real("platform.w", [](auto& c) -> auto& { return c.platform.w; }));
    k.push_back(real("platform.x", [](auto& c) -> auto& { return c.platform.x; }));
    k.push_back(real("platform.y", [](auto& c) -> auto& { return c.platform.y; }));
    k.push_back(real("platform.z", [](auto& c) -> auto& { return c.platform.z; }));
    k.push_back(real("platform.idle_cost_rate",
                     [](auto& c) -> auto& { return c.platform.idle_cost_rate; }));

    k.push_back(integer<int>("sim.drivers", [](auto& c) -> auto& { return c.drivers; }));
    k.push_back(integer<int>("sim.days", [](auto& c) -> auto& { return c.days; }));
    k.push_back(real("sim.speed_kmh", [](auto& c) -> auto& { return c.speed_kmh; }));
    k.push_back(integer<int>("sim.max_offers", [](auto& c) -> auto& { return c.max_offers; }));
    k.push_back(integer<int>("sim.default_last_week_trips",
                             [](auto& c) -> auto& { return c.default_last_week_trips; }));

    k.push_back(integer<int>("synth.drivers",
                             [](auto& c) -> auto& { return c.synth.driver_count; }));
    k.push_back(integer<int>("synth.days", [](auto& c) -> auto& { return c.synth.days; }));
    k.push_back(real("synth.weekly_rides",
                     [](auto& c) -> auto& { return c.synth.weekly_rides; }));
    k.push_back({"synth.policy_weights",
                 [](RunConfig& c, const std::string& v) {
                   const auto cells = to_list(v);
                   if (cells.size() != kNumFeatures) {
                     throw ValidationError(fmt::format(
                         "synth.policy_weights needs {} values", kNumFeatures));
                   }
                   for (std::size_t i = 0; i < kNumFeatures; ++i) {
                     c.synth.policy.weights[i] = to_real("synth.policy_weights", cells[i]);
                   }
                 },
                 [](const RunConfig& c) {
                   std::vector<std::string> cells;
                   for (double w : c.synth.policy.weights) cells.push_back(format_real(w));
                   return join(cells);
                 }});
    k.push_back(real("synth.policy_bias",
                     [](auto& c) -> auto& { return c.synth.policy.bias; }));
    k.push_back(real("synth.trip_median_km",
                     [](auto& c) -> auto& { return c.synth.trip_median_km; }));
    k.push_back(real("synth.trip_sigma", [](auto& c) -> auto& { return c.synth.trip_sigma; }));

    k.push_back(text("bc.window_start", [](auto& c) -> auto& { return c.bc_window_start; }));
    k.push_back(text("bc.window_end", [](auto& c) -> auto& { return c.bc_window_end; }));
    k.push_back(integer<int>("bc.iterations", [](auto& c) -> auto& { return c.bc.iterations; }));
    k.push_back(integer<std::size_t>("bc.buffer_trajectories",
                                     [](auto& c) -> auto& { return c.bc.buffer_trajectories; }));
    k.push_back(integer<std::size_t>("bc.batch_size",
                                     [](auto& c) -> auto& { return c.bc.batch_size; }));
    k.push_back(real("bc.eval_fraction", [](auto& c) -> auto& { return c.bc.eval_fraction; }));
    k.push_back(integer<std::size_t>(
        "bc.batches_per_iteration", [](auto& c) -> auto& { return c.bc.batches_per_iteration; }));
    k.push_back(real("bc.margin_fraction",
                     [](auto& c) -> auto& { return c.bc.margin_fraction; }));
    k.push_back(real("bc.margin_weight", [](auto& c) -> auto& { return c.bc.margin_weight; }));

    k.push_back({"agent.hidden",
                 [](RunConfig& c, const std::string& v) {
                   std::vector<std::size_t> dims;
                   for (const auto& cell : to_list(v)) {
                     dims.push_back(to_int<std::size_t>("agent.hidden", cell));
                   }
                   c.agent.hidden = dims;
                 },
                 [](const RunConfig& c) {
                   std::vector<std::string> cells;
                   for (auto d : c.agent.hidden) cells.push_back(std::to_string(d));
                   return join(cells);
                 }});
    k.push_back(integer<std::size_t>("agent.atoms", [](auto& c) -> auto& { return c.agent.atoms; }));
    k.push_back(boolean("agent.auto_support", [](auto& c) -> auto& { return c.auto_support; }));
    k.push_back(real("agent.v_min", [](auto& c) -> auto& { return c.agent.v_min; }));
    k.push_back(real("agent.v_max", [](auto& c) -> auto& { return c.agent.v_max; }));
    k.push_back(real("agent.gamma", [](auto& c) -> auto& { return c.agent.gamma; }));
    k.push_back(real("agent.epsilon", [](auto& c) -> auto& { return c.agent.epsilon; }));
    k.push_back(integer<int>("agent.sync_interval",
                             [](auto& c) -> auto& { return c.agent.sync_interval; }));
    k.push_back(real("agent.learning_rate",
                     [](auto& c) -> auto& { return c.agent.adam.learning_rate; }));
    k.push_back(real("agent.scale_pickup_km",
                     [](auto& c) -> auto& { return c.agent.scale.pickup_km; }));
    k.push_back(real("agent.scale_trip_km",
                     [](auto& c) -> auto& { return c.agent.scale.trip_km; }));
    k.push_back(real("agent.scale_trips_left",
                     [](auto& c) -> auto& { return c.agent.scale.trips_left; }));
    k.push_back(real("agent.scale_idle_minutes",
                     [](auto& c) -> auto& { return c.agent.scale.idle_minutes; }));

    k.push_back(integer<int>("rl.iterations", [](auto& c) -> auto& { return c.rl.iterations; }));
    k.push_back(real("rl.epsilon", [](auto& c) -> auto& { return c.rl.epsilon; }));
    k.push_back(integer<int>("rl.patience", [](auto& c) -> auto& { return c.rl.patience; }));
    k.push_back(integer<std::size_t>("rl.batch_size",
                                     [](auto& c) -> auto& { return c.rl.batch_size; }));
    k.push_back(real("rl.sweeps", [](auto& c) -> auto& { return c.rl.sweeps; }));
    k.push_back(integer<std::size_t>("rl.buffer_trajectories",
                                     [](auto& c) -> auto& { return c.rl.buffer_trajectories; }));
    k.push_back({"rl.learning_rate",
                 [](RunConfig& c, const std::string& v) {
                   if (trim(v).empty()) {
                     c.rl.learning_rate.reset();
                   } else {
                     c.rl.learning_rate = to_real("rl.learning_rate", v);
                   }
                 },
                 [](const RunConfig& c) {
                   return c.rl.learning_rate ? format_real(*c.rl.learning_rate) : "";
                 }});
    k.push_back(boolean("rl.cold_start", [](auto& c) -> auto& { return c.rl.cold_start; }));

    k.push_back(integer<int>("evaluate.replications",
                             [](auto& c) -> auto& { return c.replications; }));
    k.push_back(integer<int>("evaluate.offer_days", [](auto& c) -> auto& { return c.offer_days; }));
    k.push_back(integer<int>("evaluate.bootstrap_resamples",
                             [](auto& c) -> auto& { return c.bootstrap_resamples; }));
    k.push_back(text("evaluate.agent", [](auto& c) -> auto& { return c.eval_agent; }));

    k.push_back(text("sweep.key", [](auto& c) -> auto& { return c.sweep_key; }));
    k.push_back({"sweep.values",
                 [](RunConfig& c, const std::string& v) { c.sweep_values = to_list(v); },
                 [](const RunConfig& c) { return join(c.sweep_values); }});
    return k;
  }();
  return keys;
}

inline const ConfigKey& find_config_key(std::string_view name) {
  for (const auto& k : config_keys()) {
    if (k.name == name) return k;
  }
  throw ValidationError(fmt::format("unknown config key '{}'", name));
}

inline void set_config_value(RunConfig& config, std::string_view name,
                             const std::string& value) {
  find_config_key(name).set(config, value);
}

// Applies "section.key=value" overrides in order.
inline void apply_overrides(RunConfig& config, std::span<const std::string> overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ValidationError(fmt::format("override '{}' is not key=value", o));
    }
    set_config_value(config, trim(std::string_view(o).substr(0, eq)), o.substr(eq + 1));
  }
}

inline RunConfig parse_config(std::istream& is) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError(fmt::format("config: {}", e.message()));
  }
  RunConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      set_config_value(config, section, body.data());
      continue;
    }
    for (const auto& [key, value] : body) {
      set_config_value(config, section + "." + key, value.data());
    }
  }
  return config;
}

// Canonical "key=value" listing of the effective configuration.
inline std::string canonical_config(const RunConfig& config, bool include_paths = true) {
  std::string out;
  for (const auto& k : config_keys()) {
    if (!include_paths && k.name.starts_with("paths.")) continue;
    out += k.name + "=" + k.get(config) + "\n";
  }
  return out;
}

// Hash of every setting except paths, as 16 hex digits.
inline std::string config_hash(const RunConfig& config) {
  return fmt::format("{:016x}", fnv1a64(canonical_config(config, false)));
}

}  // namespace ridesim

#endif  // RIDESIM_CONFIG_HPP_
