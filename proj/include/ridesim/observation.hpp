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

#ifndef RIDESIM_OBSERVATION_HPP_
#define RIDESIM_OBSERVATION_HPP_

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "ridesim/common.hpp"

namespace ridesim {

inline constexpr std::size_t kNumFeatures = 6;

// Feature order shared by the simulator, demonstration extraction and the
// agent input layer.
enum Feature : std::size_t {
  kPickupDistance = 0,
  kTripDistance = 1,
  kTimeOfDay = 2,
  kTripsLeft = 3,
  kDestination = 4,
  kIdleTime = 5,
};

using ObservationVector = std::array<double, kNumFeatures>;

enum class Action : int { kAccept = 0, kReject = 1 };
inline constexpr std::size_t kNumActions = 2;

inline std::string_view to_string(Action a) {
  return a == Action::kAccept ? "accept" : "reject";
}

// Unnormalized observation, in natural units.
struct RawFeatures {
  double pickup_km = 0.0;
  double trip_km = 0.0;
  double minute_of_day = 0.0;
  double trips_left = 0.0;
  // Distance of the drop point from the grid centre over the half diagonal,
  // already in [0, 1].
  double destination = 0.0;
  double idle_minutes = 0.0;
};

struct ObservationScale {
  double pickup_km = 5.0;
  double trip_km = 20.0;
  double trips_left = 50.0;
  double idle_minutes = 120.0;

  void validate() const {
    if (!(pickup_km > 0.0) || !(trip_km > 0.0) || !(trips_left > 0.0) ||
        !(idle_minutes > 0.0)) {
      throw ValidationError("observation normalization constants must be > 0");
    }
  }
};

inline ObservationVector normalize(const RawFeatures& f, const ObservationScale& s) {
  return {f.pickup_km / s.pickup_km,
          f.trip_km / s.trip_km,
          f.minute_of_day / 1440.0,
          f.trips_left / s.trips_left,
          f.destination,
          f.idle_minutes / s.idle_minutes};
}

// Everything the reward needs, kept with each transition so rewards can be
// recomputed from stored inputs.
struct RewardInputs {
  double trip_km = 0.0;
  double pickup_km = 0.0;
  double opportunity_cost = 0.0;
  double weekly_reward = 0.0;
  int minute_of_day = 0;

  bool operator==(const RewardInputs&) const = default;
};

// One [s, a, s', r] step. `terminal` marks the last decision of a
// trajectory; its s_prime repeats s and is never bootstrapped from.
struct Transition {
  ObservationVector s{};
  Action a = Action::kReject;
  ObservationVector s_prime{};
  double r = 0.0;
  bool terminal = false;
  RewardInputs inputs;
};

struct Trajectory {
  std::string driver_id;
  std::vector<Transition> steps;
};

}  // namespace ridesim

#endif  // RIDESIM_OBSERVATION_HPP_
