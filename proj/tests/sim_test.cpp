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

#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "ridesim/sim.hpp"
#include "ridesim/synthetic.hpp"

namespace ridesim {
namespace {

RewardInputs inputs(double td, double pd, double oc, double wr, int minute_of_day) {
  RewardInputs in;
  in.trip_km = td;
  in.pickup_km = pd;
  in.opportunity_cost = oc;
  in.weekly_reward = wr;
  in.minute_of_day = minute_of_day;
  return in;
}

TEST(ComputeReward, HandEvaluatedFixture) {
  PlatformParams p;
  p.fare_per_km = 100;
  p.cost_per_km = 30;
  // 100*5 - 30*(5+1) - 10 + 50
  EXPECT_NEAR(compute_reward(p, inputs(5, 1, 10, 50, 12 * 60), Action::kAccept), 360.0, 1e-9);
}

TEST(ComputeReward, RejectEarnsNothing) {
  PlatformParams p;
  EXPECT_EQ(compute_reward(p, inputs(5, 1, 10, 50, 7 * 60), Action::kReject), 0.0);
}

TEST(ComputeReward, ZeroWeightsEarnNothing) {
  PlatformParams p;
  p.w = p.x = p.y = p.z = 0.0;
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto in = inputs(rng.uniform(0, 20), rng.uniform(0, 5), rng.uniform(0, 30),
                           rng.uniform(0, 100), static_cast<int>(rng.below(1440)));
    EXPECT_EQ(compute_reward(p, in, Action::kAccept), 0.0);
  }
}

TEST(ComputeReward, PeakMultiplierOnlyInsidePeakHours) {
  PlatformParams p;
  p.fare_per_km = 100;
  p.cost_per_km = 30;
  p.peak_fare_multiplier = 2.0;
  const auto at = [&](int minute) {
    return compute_reward(p, inputs(5, 1, 10, 50, minute), Action::kAccept);
  };
  // Peak windows are [06:00, 08:00) and [16:00, 19:00).
  EXPECT_NEAR(at(7 * 60), 860.0, 1e-9);
  EXPECT_NEAR(at(12 * 60), 360.0, 1e-9);
  for (int m = 0; m < 1440; ++m) {
    const int h = m / 60;
    const bool peak = (h >= 6 && h < 8) || (h >= 16 && h < 19);
    EXPECT_NEAR(at(m), peak ? 860.0 : 360.0, 1e-9) << m;
  }
}

TEST(ComputeReward, IncreasingInTripDistanceForFareOnly) {
  PlatformParams p;
  p.x = p.y = p.z = 0.0;
  double prev = -1.0;
  for (double td = 0.0; td < 30.0; td += 0.25) {
    const double r = compute_reward(p, inputs(td, 2.0, 5.0, 10.0, 600), Action::kAccept);
    EXPECT_GT(r, prev);
    prev = r;
  }
}

TEST(PlatformParams, WeeklyGoalAndShare) {
  PlatformParams p;
  p.weekly_target_multiplier = 1.3;
  EXPECT_EQ(p.weekly_goal(40), 52);
  EXPECT_EQ(p.weekly_goal(0), 1);
  EXPECT_DOUBLE_EQ(p.weekly_reward_share(40, 39), p.weekly_reward_amount / 40.0);
  EXPECT_EQ(p.weekly_reward_share(40, 40), 0.0);
}

TEST(PlatformParams, NegativeFareIsInvalid) {
  PlatformParams p;
  p.fare_per_km = -1.0;
  EXPECT_THROW(p.validate(), ValidationError);
}

TEST(Driver, FeaturesOfAHandTrace) {
  GridSpec grid;
  DriverState d;
  d.location = {3, 4};
  d.idle_since = 100;
  d.weekly_goal_trips = 5;
  d.trips_completed_this_week = 7;
  Ride ride{{3, 4}, {6, 8}, 5.0, 147};
  const RawFeatures f = raw_features(d, ride, 147, grid);
  EXPECT_EQ(f.pickup_km, 0.0);
  EXPECT_EQ(f.trips_left, 0.0);
  EXPECT_EQ(f.idle_minutes, 47.0);
  EXPECT_EQ(f.minute_of_day, 147.0);
  EXPECT_NEAR(f.destination, distance({6, 8}, grid.center()) / grid.half_diagonal(), 1e-15);
}

TEST(Driver, BusyForTravelTimeThenIdle) {
  DriverState d;
  d.location = {0, 0};
  // 3 km to the pickup plus a 12 km trip at 30 km/h.
  Ride ride{{3, 0}, {15, 0}, 12.0, 0};
  advance(d, ride, 10, 30.0);
  EXPECT_EQ(d.busy_until, 40);
  EXPECT_EQ(d.status, DriverStatus::kToPickup);
  advance(d, 16);
  EXPECT_EQ(d.status, DriverStatus::kOnTrip);
  advance(d, 39);
  EXPECT_EQ(d.status, DriverStatus::kOnTrip);
  advance(d, 40);
  EXPECT_EQ(d.status, DriverStatus::kIdle);
  EXPECT_EQ(d.idle_since, 40);
  EXPECT_EQ(d.trips_completed_this_week, 1);
  EXPECT_NEAR(d.location.x, 15.0, 1e-12);
}

TEST(Driver, DegenerateRideTakesOneMinute) {
  DriverState d;
  Ride ride{{0, 0}, {0, 0}, 0.0, 0};
  advance(d, ride, 5, 30.0);
  EXPECT_EQ(d.busy_until, 6);
  EXPECT_EQ(travel_minutes(0.0, 30.0), 1);
}

TEST(Driver, AssigningABusyDriverThrows) {
  DriverState d;
  Ride ride{{1, 0}, {2, 0}, 1.0, 0};
  advance(d, ride, 0, 30.0);
  EXPECT_THROW(advance(d, ride, 1, 30.0), std::logic_error);
}

struct Fixture {
  GridSpec grid;
  PlatformParams params;
  ObservationScale scale;
  std::vector<DriverState> drivers;

  explicit Fixture(std::vector<Point> at) {
    for (std::size_t i = 0; i < at.size(); ++i) {
      DriverState d;
      d.id = static_cast<int>(i);
      d.location = at[i];
      drivers.push_back(d);
    }
  }
  DispatchContext ctx(int max_offers = 5) const {
    return {grid, params, scale, 0, max_offers, 30.0};
  }
};

auto always(Action a) {
  return [a](const ObservationVector&, Rng&) { return a; };
}

TEST(Dispatch, SingleIdleAcceptingDriverIsAssigned) {
  Fixture f({{1, 1}});
  auto accept = always(Action::kAccept);
  Rng rng(1);
  std::vector<Offer> offers;
  const Ride ride{{2, 1}, {5, 1}, 3.0, 0};
  EXPECT_EQ(dispatch(ride, 0, f.drivers, accept, f.ctx(), rng, offers), 0);
  EXPECT_EQ(offers.size(), 1u);
  EXPECT_NE(f.drivers[0].status, DriverStatus::kIdle);
}

TEST(Dispatch, AllRejectStopsAtMaxOffers) {
  Fixture f({{1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}, {6, 6}, {7, 7}});
  auto reject = always(Action::kReject);
  Rng rng(1);
  std::vector<Offer> offers;
  const Ride ride{{1, 1}, {5, 1}, 4.0, 0};
  EXPECT_FALSE(dispatch(ride, 0, f.drivers, reject, f.ctx(5), rng, offers).has_value());
  EXPECT_EQ(offers.size(), 5u);
}

TEST(Dispatch, NearestDriverIsOfferedFirst) {
  Fixture f({{14, 10}, {11, 10}});
  auto reject = always(Action::kReject);
  Rng rng(1);
  std::vector<Offer> offers;
  const Ride ride{{10, 10}, {12, 12}, 2.0, 0};
  dispatch(ride, 0, f.drivers, reject, f.ctx(), rng, offers);
  ASSERT_EQ(offers.size(), 2u);
  EXPECT_EQ(offers[0].driver, 1);
  EXPECT_NEAR(offers[0].inputs.pickup_km, 1.0, 1e-12);
  EXPECT_EQ(offers[1].driver, 0);
}

SimConfig small_world(double per_minute, int days = 7) {
  SimConfig c;
  Rng rng(99);
  std::vector<double> xs, ys, ds;
  for (int i = 0; i < 500; ++i) {
    xs.push_back(rng.uniform(2, 28));
    ys.push_back(rng.uniform(2, 28));
    ds.push_back(rng.uniform(1, 8));
  }
  c.pickup_x = fit_empirical(xs);
  c.pickup_y = fit_empirical(ys);
  c.trip_km = fit_empirical(ds);
  for (int dow = 0; dow < 7; ++dow) {
    for (int m = 0; m < 1440; ++m) c.profile.set(dow, m, per_minute);
  }
  c.drivers = 20;
  c.days = days;
  return c;
}

TEST(RunEpisode, ZeroProfileGivesEmptyLog) {
  auto accept = always(Action::kAccept);
  Rng rng(1);
  const auto log = run_episode(small_world(0.0), accept, rng);
  EXPECT_TRUE(log.offers.empty());
  EXPECT_TRUE(log.rides.empty());
  EXPECT_EQ(log.total_generated(), 0);
}

std::string dump(const EpisodeLog& log) {
  std::ostringstream os;
  write_offers(os, log);
  write_daily_counts(os, log);
  return os.str();
}

TEST(RunEpisode, SeededRunsAreIdentical) {
  LogisticPolicy policy{{-2, 1, 0, 1, -1, 0}, 1.0};
  Rng a(5), b(5);
  EXPECT_EQ(dump(run_episode(small_world(0.2, 2), policy, a)),
            dump(run_episode(small_world(0.2, 2), policy, b)));
}

TEST(RunEpisode, WeeklyCountWithinRoundingNoise) {
  // Each minute draws floor(x) + Bernoulli(frac x) rides.
  const double x = 0.3;
  const double expected = x * kMinutesPerWeek;
  const double sigma = std::sqrt(kMinutesPerWeek * x * (1 - x));
  auto reject = always(Action::kReject);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const auto log = run_episode(small_world(x), reject, rng);
    EXPECT_NEAR(static_cast<double>(log.total_generated()), expected, 3 * sigma) << seed;
  }
}

TEST(RunEpisode, ConservationAndNoDoubleAssignment) {
  LogisticPolicy policy{{-2, 1, 0, 1, -1, 0}, 0.5};
  Rng rng(7);
  const SimConfig world = small_world(0.6, 3);
  const auto log = run_episode(world, policy, rng);
  std::int64_t assigned = 0, lost = 0;
  for (const auto& d : log.days) {
    assigned += d.assigned;
    lost += d.lost;
  }
  EXPECT_EQ(log.total_generated(), static_cast<std::int64_t>(log.rides.size()));
  EXPECT_EQ(assigned + lost, log.total_generated());
  std::int64_t taken = 0;
  for (const auto& who : log.ride_driver) taken += who.has_value();
  EXPECT_EQ(taken, assigned);

  // A driver sees no offer while still busy with an accepted ride.
  std::map<int, Minute> free_at;
  for (const auto& o : log.offers) {
    const auto it = free_at.find(o.driver);
    if (it != free_at.end()) {
      EXPECT_GE(o.minute, it->second) << "driver " << o.driver;
    }
    if (o.action == Action::kAccept) {
      free_at[o.driver] =
          o.minute + travel_minutes(o.inputs.pickup_km + o.inputs.trip_km, world.speed_kmh);
    }
  }
  std::int64_t completed = 0;
  for (int n : log.completed_per_driver) completed += n;
  // Rides still under way when the episode ends are assigned but not
  // completed; each driver holds at most one.
  EXPECT_LE(completed, assigned);
  EXPECT_GE(completed, assigned - world.drivers);
}

TEST(RunEpisode, TrajectoriesCoverEveryOffer) {
  LogisticPolicy policy{{-2, 1, 0, 1, -1, 0}, 0.5};
  Rng rng(8);
  const auto log = run_episode(small_world(0.3, 9), policy, rng);
  std::size_t steps = 0;
  for (const auto& t : log.trajectories()) {
    ASSERT_FALSE(t.steps.empty());
    EXPECT_TRUE(t.steps.back().terminal);
    steps += t.steps.size();
  }
  EXPECT_EQ(steps, log.offers.size());
}

}  // namespace
}  // namespace ridesim
