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

// Synthetic ground-truth trip logs. Drivers follow a known logistic
// acceptance policy over the observation features, so a cloned policy can be
// scored against the truth.

#ifndef RIDESIM_SYNTHETIC_HPP_
#define RIDESIM_SYNTHETIC_HPP_

#include <array>
#include <cmath>
#include <vector>

#include "ridesim/common.hpp"
#include "ridesim/distributions.hpp"
#include "ridesim/driver.hpp"
#include "ridesim/observation.hpp"
#include "ridesim/ridegen.hpp"
#include "ridesim/sim.hpp"
#include "ridesim/trip_log.hpp"

namespace ridesim {

struct LogisticPolicy {
  std::array<double, kNumFeatures> weights{};
  double bias = 0.0;

  double accept_probability(const ObservationVector& obs) const {
    double logit = bias;
    for (std::size_t i = 0; i < kNumFeatures; ++i) logit += weights[i] * obs[i];
    return 1.0 / (1.0 + std::exp(-logit));
  }

  Action operator()(const ObservationVector& obs, Rng& rng) const {
    return rng.uniform() < accept_probability(obs) ? Action::kAccept : Action::kReject;
  }
};

struct Hotspot {
  double x_km = 0.0;
  double y_km = 0.0;
  double sigma_km = 1.0;
  double weight = 1.0;
};

struct SyntheticPolicySpec {
  LogisticPolicy policy{{-8.0, 4.0, 0.0, 2.0, -2.0, 1.0}, 5.5};
  int driver_count = 50;
  int days = 28;
  // Calendar date of day 0; must be a Monday.
  Minute start_minute = *parse_timestamp("2020-02-03T00:00");

  // Demand: expected raw rides per week, shaped by a weekday multiplier and
  // a diurnal curve with morning and evening peaks.
  double weekly_rides = 6000.0;
  std::array<double, 7> day_multipliers = {1.009, 1.083, 1.224, 1.277, 1.459, 0.884, 0.587};
  double night_floor = 0.08;
  double morning_peak = 0.8;
  double evening_peak = 1.0;

  GridSpec grid;
  std::vector<Hotspot> hotspots = {{8.0, 20.0, 2.5, 3.0},
                                   {15.0, 12.0, 3.0, 2.0},
                                   {22.0, 8.0, 2.0, 1.0},
                                   {15.0, 15.0, 8.0, 2.0}};
  double trip_median_km = 5.0;
  double trip_sigma = 0.6;

  PlatformParams params;
  ObservationScale scale;
  double speed_kmh = 30.0;
  int max_offers = 5;
  int default_last_week_trips = 40;

  void validate() const {
    if (driver_count < 1) throw ValidationError("driver_count must be >= 1");
    if (days < 1) throw ValidationError("days must be >= 1");
    if (day_of_week(start_minute) != 0 || start_minute % kMinutesPerDay != 0) {
      throw ValidationError("synthetic logs must start on a Monday at 00:00");
    }
    if (!(weekly_rides >= 0.0) || !std::isfinite(weekly_rides)) {
      throw ValidationError("weekly_rides must be finite and >= 0");
    }
    if (hotspots.empty()) throw ValidationError("need at least one hotspot");
    if (!(trip_median_km > 0.0) || !(trip_sigma >= 0.0)) {
      throw ValidationError("trip distance parameters must be positive");
    }
    grid.validate();
  }
};

// Expected raw rides for each minute of the week, scaled to weekly_rides.
inline TimeProfile synthetic_demand(const SyntheticPolicySpec& spec) {
  std::vector<double> shape(TimeProfile::kBins);
  double total = 0.0;
  for (int dow = 0; dow < 7; ++dow) {
    for (int m = 0; m < 1440; ++m) {
      const double h = m / 60.0;
      const double day = std::exp(-std::pow((h - 13.0) / 5.5, 2));
      const double am = std::exp(-std::pow((h - 7.0) / 1.0, 2));
      const double pm = std::exp(-std::pow((h - 17.5) / 1.2, 2));
      const double v = spec.day_multipliers[static_cast<std::size_t>(dow)] *
                       (spec.night_floor + day + spec.morning_peak * am +
                        spec.evening_peak * pm);
      shape[static_cast<std::size_t>(dow) * 1440 + static_cast<std::size_t>(m)] = v;
      total += v;
    }
  }
  if (!(total > 0.0) || !(spec.weekly_rides > 0.0)) {
    throw ValidationError("synthetic demand profile is all zero");
  }
  TimeProfile profile;
  for (int dow = 0; dow < 7; ++dow) {
    for (int m = 0; m < 1440; ++m) {
      profile.set(dow, m,
                  shape[static_cast<std::size_t>(dow) * 1440 + static_cast<std::size_t>(m)] /
                      total * spec.weekly_rides);
    }
  }
  return profile;
}

// Simulator configuration of the synthetic world (raw demand, no scaling).
inline SimConfig synthetic_world(const SyntheticPolicySpec& spec, Rng& rng) {
  spec.validate();
  SimConfig config;
  config.grid = spec.grid;
  config.profile = synthetic_demand(spec);

  double weight_total = 0.0;
  for (const auto& h : spec.hotspots) weight_total += h.weight;
  constexpr int kSamples = 4000;
  std::vector<double> xs, ys, ds;
  xs.reserve(kSamples);
  ys.reserve(kSamples);
  ds.reserve(kSamples);
  for (int i = 0; i < kSamples; ++i) {
    double pick = rng.uniform() * weight_total;
    std::size_t k = 0;
    while (k + 1 < spec.hotspots.size() && pick >= spec.hotspots[k].weight) {
      pick -= spec.hotspots[k].weight;
      ++k;
    }
    const auto& h = spec.hotspots[k];
    const Point p = spec.grid.clamp(
        {rng.normal(h.x_km, h.sigma_km), rng.normal(h.y_km, h.sigma_km)});
    xs.push_back(p.x);
    ys.push_back(p.y);
    ds.push_back(spec.trip_median_km * std::exp(rng.normal(0.0, spec.trip_sigma)));
  }
  config.pickup_x = fit_empirical(std::move(xs));
  config.pickup_y = fit_empirical(std::move(ys));
  config.trip_km = fit_empirical(std::move(ds));
  config.params = spec.params;
  config.scale = spec.scale;
  config.drivers = spec.driver_count;
  config.days = spec.days;
  config.speed_kmh = spec.speed_kmh;
  config.max_offers = spec.max_offers;
  config.default_last_week_trips = spec.default_last_week_trips;
  return config;
}

// Turns a simulated episode into log rows, one per offer. Rides that found
// no idle driver leave no row.
inline std::vector<TripRecord> episode_to_records(const EpisodeLog& log,
                                                  const GridSpec& grid,
                                                  Minute start_minute, double speed_kmh,
                                                  Rng& rng) {
  std::vector<TripRecord> out;
  out.reserve(log.offers.size());
  for (const auto& o : log.offers) {
    const Ride& ride = log.rides[o.ride];
    TripRecord r;
    r.driver_id = fmt::format("D{:03d}", o.driver);
    r.trip_id = fmt::format("T{:07d}", o.ride);
    r.created_time = start_minute + ride.created_minute;
    r.assigned_time = r.created_time;
    r.decision_time = r.created_time;
    r.pickup_lat = grid.to_lat(ride.pickup);
    r.pickup_lon = grid.to_lon(ride.pickup);
    r.drop_lat = grid.to_lat(ride.drop);
    r.drop_lon = grid.to_lon(ride.drop);
    r.pickup_distance_km = o.inputs.pickup_km;
    r.trip_distance_km = ride.distance_km;
    if (o.action == Action::kAccept) {
      r.status = TripStatus::kCompleted;
      r.pickup_time = *r.decision_time +
                      static_cast<Minute>(std::ceil(o.inputs.pickup_km * 60.0 / speed_kmh - 1e-9));
    } else {
      r.status = TripStatus::kRejected;
    }
    r.payment_method = rng.bernoulli(0.6) ? PaymentMethod::kCash : PaymentMethod::kCard;
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<TripRecord> generate_synthetic_log(const SyntheticPolicySpec& spec,
                                                      std::uint64_t seed) {
  Rng world_rng = make_rng(seed, "synth.world");
  const SimConfig world = synthetic_world(spec, world_rng);
  Rng sim_rng = make_rng(seed, "synth.sim");
  LogisticPolicy policy = spec.policy;
  const EpisodeLog log = run_episode(world, policy, sim_rng);
  Rng row_rng = make_rng(seed, "synth.rows");
  return episode_to_records(log, spec.grid, spec.start_minute, spec.speed_kmh, row_rng);
}

}  // namespace ridesim

#endif  // RIDESIM_SYNTHETIC_HPP_
