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

// Rebuilds per-driver decision trajectories from a cleaned trip log. Driver
// state (weekly progress, idle time) is replayed from the driver's own
// history with the same rules the simulator applies.

#ifndef RIDESIM_DEMONSTRATIONS_HPP_
#define RIDESIM_DEMONSTRATIONS_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ridesim/common.hpp"
#include "ridesim/driver.hpp"
#include "ridesim/observation.hpp"
#include "ridesim/platform.hpp"
#include "ridesim/ridegen.hpp"
#include "ridesim/trip_log.hpp"

namespace ridesim {

// Half-open [start, end) in epoch minutes.
struct TimeWindow {
  Minute start = 0;
  Minute end = 0;

  bool contains(Minute t) const { return t >= start && t < end; }
};

struct ExtractionSettings {
  GridSpec grid;
  ObservationScale scale;
  double speed_kmh = 30.0;
  // Previous-week trips assumed for the first week of the log.
  int default_last_week_trips = 40;
};

// Start of the log's history: midnight of the earliest creation day.
inline Minute history_start(std::span<const TripRecord> records) {
  Minute first = std::numeric_limits<Minute>::max();
  for (const auto& r : records) {
    if (r.created_time) first = std::min(first, *r.created_time);
  }
  if (first == std::numeric_limits<Minute>::max()) return 0;
  return first / kMinutesPerDay * kMinutesPerDay;
}

// Minute a completed trip frees its driver: the decision minute plus the
// travel time for pickup + trip distance.
inline Minute completion_minute(const TripRecord& r, double speed_kmh) {
  return *r.decision_time +
         travel_minutes(*r.pickup_distance_km + *r.trip_distance_km, speed_kmh);
}

struct DriverHistoryStep {
  RawFeatures features;
  RewardInputs inputs;
  Action action = Action::kReject;
  Minute decision_time = 0;
};

// Replays one driver's offers (already in decision order) and returns the
// reconstructed state before each decision.
inline std::vector<DriverHistoryStep> replay_driver(
    std::span<const TripRecord* const> offers, const PlatformParams& params,
    const ExtractionSettings& settings, Minute start) {
  std::vector<Minute> completions;
  for (const auto* r : offers) {
    if (r->status == TripStatus::kCompleted) {
      completions.push_back(completion_minute(*r, settings.speed_kmh));
    }
  }
  std::sort(completions.begin(), completions.end());

  const Minute first_week = week_index(start);
  std::map<Minute, int> completed_in_week;
  std::size_t next = 0;
  Minute idle_since = start;
  std::vector<DriverHistoryStep> steps;
  steps.reserve(offers.size());

  for (const auto* r : offers) {
    const Minute t = *r->decision_time;
    while (next < completions.size() && completions[next] <= t) {
      ++completed_in_week[week_index(completions[next])];
      idle_since = completions[next];
      ++next;
    }
    const Minute week = week_index(t);
    int last_week = settings.default_last_week_trips;
    if (week > first_week) {
      const auto it = completed_in_week.find(week - 1);
      last_week = it == completed_in_week.end() ? 0 : it->second;
    }
    const int goal = params.weekly_goal(last_week);
    const auto cur = completed_in_week.find(week);
    const int done = cur == completed_in_week.end() ? 0 : cur->second;

    DriverHistoryStep step;
    step.decision_time = t;
    auto& f = step.features;
    f.pickup_km = *r->pickup_distance_km;
    f.trip_km = *r->trip_distance_km;
    f.minute_of_day = static_cast<double>(t % kMinutesPerDay);
    f.trips_left = std::max(0, goal - done);
    f.destination =
        destination_feature(settings.grid, settings.grid.to_grid(*r->drop_lat, *r->drop_lon));
    f.idle_minutes = static_cast<double>(t - idle_since);
    auto& in = step.inputs;
    in.trip_km = f.trip_km;
    in.pickup_km = f.pickup_km;
    in.opportunity_cost = f.idle_minutes * params.idle_cost_rate;
    in.weekly_reward = params.weekly_reward_share(goal, done);
    in.minute_of_day = static_cast<int>(t % kMinutesPerDay);
    step.action = r->accepted() ? Action::kAccept : Action::kReject;
    steps.push_back(step);
  }
  return steps;
}

// One trajectory per driver holding that driver's decisions inside
// `window`, with rewards from compute_reward. Drivers without decisions in
// the window are omitted. Records must be cleaned.
inline std::vector<Trajectory> extract_demonstrations(
    std::span<const TripRecord> records, const PlatformParams& params,
    const TimeWindow& window, const ExtractionSettings& settings) {
  const Minute start = history_start(records);
  std::map<std::string, std::vector<std::size_t>> by_driver;
  for (std::size_t i = 0; i < records.size(); ++i) {
    by_driver[records[i].driver_id].push_back(i);
  }

  std::vector<Trajectory> out;
  for (auto& [driver, idx] : by_driver) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return *records[a].decision_time < *records[b].decision_time;
    });
    std::vector<const TripRecord*> offers;
    offers.reserve(idx.size());
    for (auto i : idx) offers.push_back(&records[i]);
    const auto steps = replay_driver(offers, params, settings, start);

    Trajectory traj;
    traj.driver_id = driver;
    for (const auto& step : steps) {
      if (!window.contains(step.decision_time)) continue;
      Transition t;
      t.s = normalize(step.features, settings.scale);
      t.a = step.action;
      t.inputs = step.inputs;
      t.r = compute_reward(params, step.inputs, step.action);
      traj.steps.push_back(t);
    }
    if (traj.steps.empty()) continue;
    for (std::size_t k = 0; k < traj.steps.size(); ++k) {
      auto& t = traj.steps[k];
      t.terminal = k + 1 == traj.steps.size();
      t.s_prime = t.terminal ? t.s : traj.steps[k + 1].s;
    }
    out.push_back(std::move(traj));
  }
  return out;
}

// Mean completed trips per calendar week for each driver in the window,
// keyed by driver id (rounded). Seeds first-week goals of a simulation.
inline std::map<std::string, int> weekly_trip_averages(std::span<const TripRecord> records,
                                                       const TimeWindow& window) {
  std::map<std::string, int> completed;
  for (const auto& r : records) {
    if (r.status == TripStatus::kCompleted && r.decision_time &&
        window.contains(*r.decision_time)) {
      ++completed[r.driver_id];
    } else {
      completed.try_emplace(r.driver_id, 0);
    }
  }
  const double weeks = std::max<double>(
      1.0, static_cast<double>(window.end - window.start) / kMinutesPerWeek);
  std::map<std::string, int> out;
  for (const auto& [id, n] : completed) {
    out[id] = static_cast<int>(std::lround(n / weeks));
  }
  return out;
}

}  // namespace ridesim

#endif  // RIDESIM_DEMONSTRATIONS_HPP_
