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

// Platform parameters and the driver reward.

#ifndef RIDESIM_PLATFORM_HPP_
#define RIDESIM_PLATFORM_HPP_

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ridesim/common.hpp"
#include "ridesim/observation.hpp"

namespace ridesim {

// Half-open range of whole hours, [start_hour, end_hour).
struct HourRange {
  int start_hour = 0;
  int end_hour = 0;

  bool operator==(const HourRange&) const = default;
};

struct PlatformParams {
  double fare_per_km = 40.0;
  double cost_per_km = 30.0;
  std::vector<HourRange> peak_hours = {{6, 8}, {16, 19}};
  double peak_fare_multiplier = 2.0;
  double weekly_reward_amount = 2000.0;
  double weekly_target_multiplier = 1.0;
  // Reward weights: fare income, travel cost, opportunity cost, weekly reward.
  double w = 1.0;
  double x = 1.0;
  double y = 1.0;
  double z = 1.0;
  // Currency per idle minute.
  double idle_cost_rate = 0.2;

  void validate() const {
    auto nonneg = [](double v, const char* name) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ValidationError(fmt::format("{} must be a finite value >= 0", name));
      }
    };
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw ValidationError(fmt::format("{} must be > 0", name));
      }
    };
    nonneg(fare_per_km, "fare_per_km");
    nonneg(cost_per_km, "cost_per_km");
    nonneg(weekly_reward_amount, "weekly_reward_amount");
    nonneg(w, "w");
    nonneg(x, "x");
    nonneg(y, "y");
    nonneg(z, "z");
    nonneg(idle_cost_rate, "idle_cost_rate");
    positive(peak_fare_multiplier, "peak_fare_multiplier");
    positive(weekly_target_multiplier, "weekly_target_multiplier");
    for (const auto& h : peak_hours) {
      if (h.start_hour < 0 || h.end_hour > 24 || h.start_hour >= h.end_hour) {
        throw ValidationError("peak hour ranges must satisfy 0 <= start < end <= 24");
      }
    }
  }

  bool is_peak(int minute_of_day) const {
    const int hour = minute_of_day / 60;
    for (const auto& h : peak_hours) {
      if (hour >= h.start_hour && hour < h.end_hour) return true;
    }
    return false;
  }

  double effective_fare_per_km(int minute_of_day) const {
    return is_peak(minute_of_day) ? fare_per_km * peak_fare_multiplier : fare_per_km;
  }

  // Per-acceptance share of the weekly bonus while the goal is unmet.
  double weekly_reward_share(int goal_trips, int completed_trips) const {
    if (goal_trips <= 0 || completed_trips >= goal_trips) return 0.0;
    return weekly_reward_amount / static_cast<double>(goal_trips);
  }

  // Goal for a week given the previous week's completed trips.
  int weekly_goal(int last_week_trips) const {
    const long goal = std::lround(static_cast<double>(last_week_trips) *
                                  weekly_target_multiplier);
    return static_cast<int>(std::max(1L, goal));
  }
};

// r = w*(fare/km * td) - x*(cost/km * (td + pd)) - y*oc + z*wr for an
// accepted offer; a rejection earns nothing.
inline double compute_reward(const PlatformParams& p, const RewardInputs& in,
                             Action action) {
  if (action == Action::kReject) return 0.0;
  const double td = in.trip_km;
  const double pd = in.pickup_km;
  return p.w * (p.effective_fare_per_km(in.minute_of_day) * td) -
         p.x * (p.cost_per_km * (td + pd)) - p.y * in.opportunity_cost +
         p.z * in.weekly_reward;
}

}  // namespace ridesim

#endif  // RIDESIM_PLATFORM_HPP_
