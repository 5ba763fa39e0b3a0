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

// Demand model fitted from a cleaned trip log: pickup marginals on the grid,
// trip distances and the weekly time profile.

#ifndef RIDESIM_MODEL_HPP_
#define RIDESIM_MODEL_HPP_

#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ridesim/distributions.hpp"
#include "ridesim/ridegen.hpp"
#include "ridesim/sim.hpp"
#include "ridesim/trip_log.hpp"

namespace ridesim {

struct DemandModel {
  EmpiricalDistribution pickup_x;
  EmpiricalDistribution pickup_y;
  EmpiricalDistribution trip_km;
  TimeProfile profile;
};

// Each distinct trip id contributes one sample; records must be cleaned.
inline DemandModel fit_demand_model(std::span<const TripRecord> records, const GridSpec& grid,
                                    const DemandScaler& scaler,
                                    std::optional<std::pair<Minute, Minute>> window =
                                        std::nullopt) {
  std::unordered_set<std::string> seen;
  std::vector<double> xs, ys, ds;
  for (const auto& r : records) {
    if (window && !(*r.created_time >= window->first && *r.created_time < window->second)) {
      continue;
    }
    if (!seen.insert(r.trip_id).second) continue;
    const Point p = grid.to_grid(*r.pickup_lat, *r.pickup_lon);
    xs.push_back(p.x);
    ys.push_back(p.y);
    ds.push_back(*r.trip_distance_km);
  }
  DemandModel model;
  model.pickup_x = fit_empirical(std::move(xs));
  model.pickup_y = fit_empirical(std::move(ys));
  model.trip_km = fit_empirical(std::move(ds));
  model.profile = fit_time_profile(records, scaler, window);
  return model;
}

inline void apply_model(const DemandModel& model, SimConfig& config) {
  config.pickup_x = model.pickup_x;
  config.pickup_y = model.pickup_y;
  config.trip_km = model.trip_km;
  config.profile = model.profile;
}

}  // namespace ridesim

#endif  // RIDESIM_MODEL_HPP_
