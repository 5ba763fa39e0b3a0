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

#ifndef RIDESIM_DRIVER_HPP_
#define RIDESIM_DRIVER_HPP_

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ridesim/common.hpp"
#include "ridesim/observation.hpp"
#include "ridesim/platform.hpp"
#include "ridesim/ridegen.hpp"

namespace ridesim {

enum class DriverStatus { kIdle, kToPickup, kOnTrip };

struct DriverState {
  int id = 0;
  Point location;
  DriverStatus status = DriverStatus::kIdle;
  Minute busy_until = 0;
  Minute pickup_at = 0;
  Minute idle_since = 0;
  Point destination;
  int trips_completed_this_week = 0;
  int weekly_goal_trips = 1;
  int last_week_trips = 0;
  int total_completed = 0;

  int trips_left() const {
    return std::max(0, weekly_goal_trips - trips_completed_this_week);
  }
};

// Whole minutes needed to cover `km` at `speed_kmh`; never less than one.
inline Minute travel_minutes(double km, double speed_kmh) {
  const double minutes = km * 60.0 / speed_kmh;
  return std::max<Minute>(1, static_cast<Minute>(std::ceil(minutes - 1e-9)));
}

inline double destination_feature(const GridSpec& grid, Point drop) {
  return distance(drop, grid.center()) / grid.half_diagonal();
}

inline RawFeatures raw_features(const DriverState& driver, const Ride& ride,
                                Minute clock, const GridSpec& grid) {
  RawFeatures f;
  f.pickup_km = distance(driver.location, ride.pickup);
  f.trip_km = ride.distance_km;
  f.minute_of_day = static_cast<double>(clock % kMinutesPerDay);
  f.trips_left = driver.trips_left();
  f.destination = destination_feature(grid, ride.drop);
  f.idle_minutes = static_cast<double>(clock - driver.idle_since);
  return f;
}

inline ObservationVector make_observation(const DriverState& driver,
                                          const Ride& ride, Minute clock,
                                          const GridSpec& grid,
                                          const ObservationScale& scale) {
  return normalize(raw_features(driver, ride, clock, grid), scale);
}

inline RewardInputs reward_inputs(const PlatformParams& params,
                                  const DriverState& driver, const Ride& ride,
                                  Minute clock) {
  RewardInputs in;
  in.trip_km = ride.distance_km;
  in.pickup_km = distance(driver.location, ride.pickup);
  in.opportunity_cost =
      static_cast<double>(clock - driver.idle_since) * params.idle_cost_rate;
  in.weekly_reward = params.weekly_reward_share(driver.weekly_goal_trips,
                                                driver.trips_completed_this_week);
  in.minute_of_day = static_cast<int>(clock % kMinutesPerDay);
  return in;
}

inline double compute_reward(const PlatformParams& params, const Ride& ride,
                             const DriverState& driver, Action action,
                             Minute clock) {
  return compute_reward(params, reward_inputs(params, driver, ride, clock), action);
}

// Assignment: the driver heads to the pickup and is busy for the whole
// pickup + trip distance at constant speed.
inline void advance(DriverState& driver, const Ride& ride, Minute now,
                    double speed_kmh) {
  if (driver.status != DriverStatus::kIdle || driver.busy_until > now) {
    throw std::logic_error(
        fmt::format("driver {} assigned while not idle", driver.id));
  }
  const double pickup_km = distance(driver.location, ride.pickup);
  driver.busy_until = now + travel_minutes(pickup_km + ride.distance_km, speed_kmh);
  driver.pickup_at =
      std::min(driver.busy_until,
               now + static_cast<Minute>(std::ceil(pickup_km * 60.0 / speed_kmh - 1e-9)));
  driver.destination = ride.drop;
  driver.status = driver.pickup_at <= now ? DriverStatus::kOnTrip
                                          : DriverStatus::kToPickup;
}

// Clock tick: moves to_pickup -> on_trip -> idle as the clock passes the
// pickup and completion minutes. Completion happens at busy_until.
inline void advance(DriverState& driver, Minute now) {
  if (driver.status == DriverStatus::kIdle) return;
  if (driver.status == DriverStatus::kToPickup && driver.pickup_at <= now) {
    driver.status = DriverStatus::kOnTrip;
  }
  if (driver.busy_until <= now) {
    driver.status = DriverStatus::kIdle;
    driver.idle_since = driver.busy_until;
    driver.location = driver.destination;
    ++driver.trips_completed_this_week;
    ++driver.total_completed;
  }
}

}  // namespace ridesim

#endif  // RIDESIM_DRIVER_HPP_
