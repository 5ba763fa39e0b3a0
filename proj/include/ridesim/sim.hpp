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

// Minute-clock marketplace simulation. Each minute: week rollover, trip
// completions, demand draw, and dispatch of every new ride to the nearest
// idle drivers until one accepts.

#ifndef RIDESIM_SIM_HPP_
#define RIDESIM_SIM_HPP_

#include <algorithm>
#include <concepts>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "ridesim/common.hpp"
#include "ridesim/distributions.hpp"
#include "ridesim/driver.hpp"
#include "ridesim/observation.hpp"
#include "ridesim/platform.hpp"
#include "ridesim/ridegen.hpp"

namespace ridesim {

template <class P>
concept Policy = requires(P& p, const ObservationVector& obs, Rng& rng) {
  { p(obs, rng) } -> std::convertible_to<Action>;
};

struct SimConfig {
  GridSpec grid;
  EmpiricalDistribution pickup_x;
  EmpiricalDistribution pickup_y;
  EmpiricalDistribution trip_km;
  TimeProfile profile;
  PlatformParams params;
  ObservationScale scale;
  int drivers = 50;
  Minute days = 7;
  double speed_kmh = 30.0;
  int max_offers = 5;
  // Previous-week trip counts that seed the first weekly goal. Drivers
  // beyond the vector's length use the default.
  std::vector<int> last_week_trips;
  int default_last_week_trips = 40;

  void validate() const {
    grid.validate();
    params.validate();
    scale.validate();
    if (pickup_x.size() < 2 || pickup_y.size() < 2 || trip_km.size() < 2) {
      throw ValidationError("simulation distributions are not fitted");
    }
    if (drivers < 1) throw ValidationError("drivers must be >= 1");
    if (days < 1) throw ValidationError("days must be >= 1");
    if (!(speed_kmh > 0.0)) throw ValidationError("speed_kmh must be > 0");
    if (max_offers < 1) throw ValidationError("max_offers must be >= 1");
    if (default_last_week_trips < 0) {
      throw ValidationError("default_last_week_trips must be >= 0");
    }
  }
};

struct Offer {
  Minute minute = 0;
  int driver = 0;
  std::size_t ride = 0;
  ObservationVector obs{};
  Action action = Action::kReject;
  double reward = 0.0;
  RewardInputs inputs;
};

struct DayCounts {
  std::int64_t generated = 0;
  std::int64_t assigned = 0;
  std::int64_t lost = 0;
};

struct EpisodeLog {
  std::vector<Ride> rides;
  // Driver that took each ride, or nullopt when the ride was lost.
  std::vector<std::optional<int>> ride_driver;
  std::vector<Offer> offers;
  std::vector<DayCounts> days;
  std::vector<int> completed_per_driver;
  int drivers = 0;

  std::int64_t total_generated() const {
    std::int64_t n = 0;
    for (const auto& d : days) n += d.generated;
    return n;
  }

  double total_reward() const {
    double s = 0.0;
    for (const auto& o : offers) s += o.reward;
    return s;
  }

  // Mean undiscounted reward per driver.
  double mean_driver_reward() const {
    return drivers > 0 ? total_reward() / drivers : 0.0;
  }

  double acceptance_rate() const {
    if (offers.empty()) return 0.0;
    std::size_t n = 0;
    for (const auto& o : offers) n += o.action == Action::kAccept;
    return static_cast<double>(n) / static_cast<double>(offers.size());
  }

  // One trajectory per (driver, week), in driver then time order. The last
  // step of each is terminal.
  std::vector<Trajectory> trajectories() const {
    std::map<std::pair<int, Minute>, std::vector<const Offer*>> groups;
    for (const auto& o : offers) {
      groups[{o.driver, o.minute / kMinutesPerWeek}].push_back(&o);
    }
    std::vector<Trajectory> out;
    out.reserve(groups.size());
    for (const auto& [key, list] : groups) {
      Trajectory t;
      t.driver_id = fmt::format("D{:03d}", key.first);
      t.steps.reserve(list.size());
      for (std::size_t k = 0; k < list.size(); ++k) {
        Transition tr;
        tr.s = list[k]->obs;
        tr.a = list[k]->action;
        tr.r = list[k]->reward;
        tr.inputs = list[k]->inputs;
        tr.terminal = k + 1 == list.size();
        tr.s_prime = tr.terminal ? tr.s : list[k + 1]->obs;
        t.steps.push_back(tr);
      }
      out.push_back(std::move(t));
    }
    return out;
  }
};

struct DispatchContext {
  const GridSpec& grid;
  const PlatformParams& params;
  const ObservationScale& scale;
  Minute clock = 0;
  int max_offers = 5;
  double speed_kmh = 30.0;
};

// Offers the ride to idle drivers nearest first (ties by id), at most
// max_offers of them, recording one Offer per decision. The first driver to
// accept is assigned. Returns that driver's index, or nullopt if the ride is
// lost.
template <Policy P>
std::optional<int> dispatch(const Ride& ride, std::size_t ride_index,
                            std::vector<DriverState>& drivers, P& policy,
                            const DispatchContext& ctx, Rng& rng,
                            std::vector<Offer>& offers) {
  std::vector<std::pair<double, int>> idle;
  for (std::size_t i = 0; i < drivers.size(); ++i) {
    const auto& d = drivers[i];
    if (d.status == DriverStatus::kIdle && d.busy_until <= ctx.clock) {
      idle.emplace_back(distance(d.location, ride.pickup), static_cast<int>(i));
    }
  }
  const auto n = std::min<std::size_t>(idle.size(), static_cast<std::size_t>(ctx.max_offers));
  std::partial_sort(idle.begin(), idle.begin() + static_cast<std::ptrdiff_t>(n), idle.end());
  for (std::size_t k = 0; k < n; ++k) {
    auto& driver = drivers[static_cast<std::size_t>(idle[k].second)];
    Offer offer;
    offer.minute = ctx.clock;
    offer.driver = driver.id;
    offer.ride = ride_index;
    offer.obs = make_observation(driver, ride, ctx.clock, ctx.grid, ctx.scale);
    offer.action = policy(offer.obs, rng);
    offer.inputs = reward_inputs(ctx.params, driver, ride, ctx.clock);
    offer.reward = compute_reward(ctx.params, offer.inputs, offer.action);
    offers.push_back(offer);
    if (offer.action == Action::kAccept) {
      advance(driver, ride, ctx.clock, ctx.speed_kmh);
      return idle[k].second;
    }
  }
  return std::nullopt;
}

template <Policy P>
EpisodeLog run_episode(const SimConfig& config, P& policy, Rng& rng) {
  config.validate();
  const auto& params = config.params;

  std::vector<DriverState> drivers(static_cast<std::size_t>(config.drivers));
  for (int i = 0; i < config.drivers; ++i) {
    auto& d = drivers[static_cast<std::size_t>(i)];
    d.id = i;
    d.location = config.grid.clamp(
        {config.pickup_x.sample(rng), config.pickup_y.sample(rng)});
    d.last_week_trips = static_cast<std::size_t>(i) < config.last_week_trips.size()
                            ? config.last_week_trips[static_cast<std::size_t>(i)]
                            : config.default_last_week_trips;
    d.weekly_goal_trips = params.weekly_goal(d.last_week_trips);
  }

  EpisodeLog log;
  log.drivers = config.drivers;
  log.days.assign(static_cast<std::size_t>(config.days), DayCounts{});
  DispatchContext ctx{config.grid, params, config.scale, 0, config.max_offers,
                      config.speed_kmh};

  const Minute end = config.days * kMinutesPerDay;
  for (Minute now = 0; now < end; ++now) {
    if (now > 0 && now % kMinutesPerWeek == 0) {
      for (auto& d : drivers) {
        d.last_week_trips = d.trips_completed_this_week;
        d.weekly_goal_trips = params.weekly_goal(d.last_week_trips);
        d.trips_completed_this_week = 0;
      }
    }
    for (auto& d : drivers) advance(d, now);

    const auto n = probabilistic_round(config.profile.at_clock(now), rng);
    if (n == 0) continue;
    auto rides = generate_rides(config.grid, config.pickup_x, config.pickup_y,
                                config.trip_km, n, now, rng);
    ctx.clock = now;
    auto& day = log.days[static_cast<std::size_t>(now / kMinutesPerDay)];
    for (auto& ride : rides) {
      const std::size_t index = log.rides.size();
      log.rides.push_back(ride);
      const auto who = dispatch(ride, index, drivers, policy, ctx, rng, log.offers);
      log.ride_driver.push_back(who);
      ++day.generated;
      if (who) {
        ++day.assigned;
      } else {
        ++day.lost;
      }
    }
  }

  for (auto& d : drivers) advance(d, end);
  log.completed_per_driver.reserve(drivers.size());
  for (const auto& d : drivers) log.completed_per_driver.push_back(d.total_completed);
  return log;
}

inline void write_offers(std::ostream& os, const EpisodeLog& log) {
  os << "minute,driver,pickup_distance,trip_distance,time_of_day,trips_left,"
        "destination,idle_time,action,reward\n";
  for (const auto& o : log.offers) {
    os << o.minute << ',' << o.driver;
    for (double f : o.obs) os << ',' << format_real(f);
    os << ',' << to_string(o.action) << ',' << format_real(o.reward) << '\n';
  }
}

inline void write_daily_counts(std::ostream& os, const EpisodeLog& log) {
  os << "day,generated,assigned,lost\n";
  for (std::size_t d = 0; d < log.days.size(); ++d) {
    os << d << ',' << log.days[d].generated << ',' << log.days[d].assigned << ','
       << log.days[d].lost << '\n';
  }
}

}  // namespace ridesim

#endif  // RIDESIM_SIM_HPP_
