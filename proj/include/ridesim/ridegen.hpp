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

#ifndef RIDESIM_RIDEGEN_HPP_
#define RIDESIM_RIDEGEN_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <vector>

#include "ridesim/common.hpp"
#include "ridesim/distributions.hpp"
#include "ridesim/trip_log.hpp"

namespace ridesim {

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Rectangular service area in kilometres with a local equirectangular
// mapping to lat/lon anchored at the south-west corner.
struct GridSpec {
  double width_km = 30.0;
  double height_km = 30.0;
  double noise_epsilon_km = 0.1;
  double origin_lat = 6.80;
  double origin_lon = 79.83;
  double km_per_deg_lat = 110.574;
  double km_per_deg_lon = 110.5;

  void validate() const {
    if (!(width_km > 0.0) || !(height_km > 0.0)) {
      throw ValidationError("grid width and height must be positive");
    }
    if (!(noise_epsilon_km >= 0.0) ||
        !(noise_epsilon_km < std::min(width_km, height_km) / 2.0)) {
      throw ValidationError("noise epsilon must lie in [0, min(width, height)/2)");
    }
    if (!(km_per_deg_lat > 0.0) || !(km_per_deg_lon > 0.0)) {
      throw ValidationError("km-per-degree factors must be positive");
    }
  }

  bool strictly_inside(Point p) const {
    return p.x > 0.0 && p.x < width_km && p.y > 0.0 && p.y < height_km;
  }

  Point clamp(Point p) const {
    return {std::max(0.0, std::min(width_km, p.x)),
            std::max(0.0, std::min(height_km, p.y))};
  }

  Point to_grid(double lat, double lon) const {
    return {(lon - origin_lon) * km_per_deg_lon, (lat - origin_lat) * km_per_deg_lat};
  }
  double to_lat(Point p) const { return origin_lat + p.y / km_per_deg_lat; }
  double to_lon(Point p) const { return origin_lon + p.x / km_per_deg_lon; }

  Region region() const {
    return {origin_lat, origin_lat + height_km / km_per_deg_lat, origin_lon,
            origin_lon + width_km / km_per_deg_lon};
  }

  double half_diagonal() const { return 0.5 * std::hypot(width_km, height_km); }
  Point center() const { return {0.5 * width_km, 0.5 * height_km}; }
};

struct Ride {
  Point pickup;
  Point drop;
  double distance_km = 0.0;
  Minute created_minute = 0;
};

inline Point drop_location(Point pickup, double distance_km, double angle) {
  return {pickup.x + distance_km * std::cos(angle),
          pickup.y + distance_km * std::sin(angle)};
}

inline constexpr int kMaxHalvings = 64;

// Sampled distances of zero would never leave a boundary pickup; they are
// raised to one metre.
inline constexpr double kMinTripKm = 1e-3;

// Places the drop on a random point of the circle of radius `distance_km`
// around `pickup`, halving the radius (and redrawing the angle) until the
// drop is strictly inside the grid. Returns the final radius and drop.
inline std::pair<double, Point> place_drop(const GridSpec& grid, Point pickup,
                                           double distance_km, Rng& rng) {
  double r = std::max(distance_km, kMinTripKm);
  Point drop = drop_location(pickup, r, rng.uniform(0.0, 2.0 * std::numbers::pi));
  int halvings = 0;
  while (!grid.strictly_inside(drop)) {
    if (++halvings > kMaxHalvings) {
      throw std::runtime_error("drop placement exceeded the halving limit");
    }
    r /= 2.0;
    drop = drop_location(pickup, r, rng.uniform(0.0, 2.0 * std::numbers::pi));
  }
  return {r, drop};
}

// Draws `count` rides created at `minute`: pickup from the coordinate
// marginals plus uniform jitter, clamped to the grid; distance from D;
// drop placed by place_drop.
inline std::vector<Ride> generate_rides(const GridSpec& grid,
                                        const EmpiricalDistribution& lx,
                                        const EmpiricalDistribution& ly,
                                        const EmpiricalDistribution& dist,
                                        std::int64_t count, Minute minute,
                                        Rng& rng) {
  if (count < 0) throw ValidationError("ride count must be non-negative");
  std::vector<Ride> rides;
  rides.reserve(static_cast<std::size_t>(count));
  const double eps = grid.noise_epsilon_km;
  for (std::int64_t i = 0; i < count; ++i) {
    Point p{lx.sample(rng), ly.sample(rng)};
    p.x += rng.uniform(-eps, eps);
    p.y += rng.uniform(-eps, eps);
    p = grid.clamp(p);
    const auto [r, drop] = place_drop(grid, p, dist.sample(rng), rng);
    rides.push_back({p, drop, r, minute});
  }
  return rides;
}

inline void write_rides_header(std::ostream& os) {
  os << "minute,pickup_x,pickup_y,drop_x,drop_y,distance_km\n";
}

inline void write_ride_row(std::ostream& os, const Ride& r) {
  os << r.created_minute << ',' << format_real(r.pickup.x) << ','
     << format_real(r.pickup.y) << ',' << format_real(r.drop.x) << ','
     << format_real(r.drop.y) << ',' << format_real(r.distance_km) << '\n';
}

}  // namespace ridesim

#endif  // RIDESIM_RIDEGEN_HPP_
