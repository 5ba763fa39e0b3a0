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

// Empirical random variables (pickup coordinates, trip distance) sampled by
// inverse transform, and the minute-of-week demand profile.

#ifndef RIDESIM_DISTRIBUTIONS_HPP_
#define RIDESIM_DISTRIBUTIONS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ridesim/common.hpp"
#include "ridesim/trip_log.hpp"

namespace ridesim {

// Sorted sample set standing in for a continuous CDF. Quantiles interpolate
// linearly between order statistics.
class EmpiricalDistribution {
 public:
  EmpiricalDistribution() = default;

  const std::vector<double>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  double min() const { return samples_.front(); }
  double max() const { return samples_.back(); }

  // Inverse CDF at u in [0, 1].
  double quantile(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) {
      throw ValidationError(fmt::format("quantile level {} outside [0, 1]", u));
    }
    const double pos = u * static_cast<double>(samples_.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    if (lo + 1 >= samples_.size()) return samples_.back();
    const double frac = pos - static_cast<double>(lo);
    return samples_[lo] + frac * (samples_[lo + 1] - samples_[lo]);
  }

  double sample(Rng& rng) const { return quantile(rng.uniform()); }

  // Fraction of samples <= x.
  double cdf(double x) const {
    const auto it = std::upper_bound(samples_.begin(), samples_.end(), x);
    return static_cast<double>(it - samples_.begin()) /
           static_cast<double>(samples_.size());
  }

 private:
  friend EmpiricalDistribution fit_empirical(std::vector<double> values);
  std::vector<double> samples_;
};

inline EmpiricalDistribution fit_empirical(std::vector<double> values) {
  if (values.size() < 2) {
    throw ValidationError("an empirical distribution needs at least 2 values");
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw ValidationError("non-finite value in empirical distribution input");
    }
  }
  std::sort(values.begin(), values.end());
  EmpiricalDistribution d;
  d.samples_ = std::move(values);
  return d;
}

inline double inverse_sample(const EmpiricalDistribution& dist, double u) {
  return dist.quantile(u);
}

// Two-sample Kolmogorov-Smirnov distance between the fitted samples and an
// observed sample set.
inline double ks_statistic(const EmpiricalDistribution& dist,
                           std::span<const double> observed) {
  if (dist.size() == 0 || observed.empty()) {
    throw ValidationError("ks_statistic needs non-empty inputs");
  }
  std::vector<double> obs(observed.begin(), observed.end());
  std::sort(obs.begin(), obs.end());
  const auto& ref = dist.samples();
  const double n = static_cast<double>(ref.size());
  const double m = static_cast<double>(obs.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < ref.size() && j < obs.size()) {
    const double x = std::min(ref[i], obs[j]);
    while (i < ref.size() && ref[i] <= x) ++i;
    while (j < obs.size() && obs[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n -
                             static_cast<double>(j) / m));
  }
  return d;
}

inline void write_distribution(std::ostream& os, std::string_view name,
                               const EmpiricalDistribution& dist) {
  os << "ridesim-empirical v1\n" << name << '\n' << dist.size() << '\n';
  for (double v : dist.samples()) os << format_real(v) << '\n';
}

// Returns the variable name alongside the distribution.
inline std::pair<std::string, EmpiricalDistribution> read_distribution(
    std::istream& is) {
  std::string line;
  while (std::getline(is, line) && !line.empty() && line[0] == '#') {
  }
  if (trim(line) != "ridesim-empirical v1") {
    throw ValidationError("not an empirical distribution artifact");
  }
  std::string name;
  std::getline(is, name);
  std::getline(is, line);
  const auto count = parse_real(line);
  if (!count || *count < 0) throw ValidationError("bad sample count");
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(*count));
  for (std::size_t k = 0; k < static_cast<std::size_t>(*count); ++k) {
    if (!std::getline(is, line)) throw ValidationError("truncated distribution");
    const auto v = parse_real(line);
    if (!v) throw ValidationError(fmt::format("bad sample '{}'", line));
    values.push_back(*v);
  }
  return {std::string(trim(name)), fit_empirical(std::move(values))};
}

struct DemandScaler {
  double scale_factor = 35.0;

  void validate() const {
    if (!(scale_factor > 0.0) || !std::isfinite(scale_factor)) {
      throw ValidationError("scale_factor must be positive");
    }
  }
};

// Expected scaled ride count for every (day-of-week, minute-of-day) bin.
// Day 0 is Monday.
class TimeProfile {
 public:
  static constexpr std::size_t kBins = 7 * 1440;

  TimeProfile() : mean_(kBins, 0.0) {}

  double at(int dow, int minute) const { return mean_[index(dow, minute)]; }
  void set(int dow, int minute, double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError("time profile entries must be finite and >= 0");
    }
    mean_[index(dow, minute)] = v;
  }

  // Entry for a simulation clock that starts on Monday 00:00.
  double at_clock(Minute clock) const {
    return mean_[static_cast<std::size_t>(clock % kMinutesPerWeek)];
  }

  double day_total(int dow) const {
    double s = 0.0;
    for (int m = 0; m < 1440; ++m) s += at(dow, m);
    return s;
  }
  double week_total() const {
    double s = 0.0;
    for (double v : mean_) s += v;
    return s;
  }

  std::span<const double> values() const { return mean_; }

 private:
  static std::size_t index(int dow, int minute) {
    if (dow < 0 || dow > 6 || minute < 0 || minute >= 1440) {
      throw ValidationError("time profile index out of range");
    }
    return static_cast<std::size_t>(dow) * 1440 + static_cast<std::size_t>(minute);
  }

  std::vector<double> mean_;
};

// Fits the profile from ride creation times (epoch minutes). Each bin holds
// the mean count per occurrence of that weekday in [window_start,
// window_end), divided by the scale factor. The window defaults to the whole
// days spanned by the data.
inline TimeProfile fit_time_profile(
    std::span<const Minute> created, const DemandScaler& scaler,
    std::optional<std::pair<Minute, Minute>> window = std::nullopt) {
  scaler.validate();
  if (created.empty()) throw ValidationError("cannot fit a time profile on no trips");
  Minute start, end;
  if (window) {
    std::tie(start, end) = *window;
  } else {
    const auto [lo, hi] = std::minmax_element(created.begin(), created.end());
    start = (*lo / kMinutesPerDay) * kMinutesPerDay;
    end = (*hi / kMinutesPerDay + 1) * kMinutesPerDay;
  }
  if (end - start < kMinutesPerWeek) {
    throw ValidationError("time profile needs at least one full week of data");
  }
  std::array<double, 7> occurrences{};
  for (Minute day = start; day < end; day += kMinutesPerDay) {
    occurrences[static_cast<std::size_t>(day_of_week(day))] += 1.0;
  }
  std::vector<double> counts(TimeProfile::kBins, 0.0);
  for (Minute t : created) {
    if (t < start || t >= end) continue;
    const Minute mod = ((t % kMinutesPerDay) + kMinutesPerDay) % kMinutesPerDay;
    counts[static_cast<std::size_t>(day_of_week(t)) * 1440 +
           static_cast<std::size_t>(mod)] += 1.0;
  }
  TimeProfile profile;
  for (int dow = 0; dow < 7; ++dow) {
    for (int m = 0; m < 1440; ++m) {
      const double c = counts[static_cast<std::size_t>(dow) * 1440 +
                              static_cast<std::size_t>(m)];
      profile.set(dow, m, c / occurrences[static_cast<std::size_t>(dow)] /
                              scaler.scale_factor);
    }
  }
  return profile;
}

// Rides are the distinct trip ids of the log (one row per offer).
inline TimeProfile fit_time_profile(
    std::span<const TripRecord> records, const DemandScaler& scaler,
    std::optional<std::pair<Minute, Minute>> window = std::nullopt) {
  std::unordered_set<std::string> seen;
  std::vector<Minute> created;
  for (const auto& r : records) {
    if (!r.created_time) continue;
    if (seen.insert(r.trip_id).second) created.push_back(*r.created_time);
  }
  return fit_time_profile(std::span<const Minute>(created), scaler, window);
}

inline void write_time_profile(std::ostream& os, const TimeProfile& profile) {
  os << "ridesim-time-profile v1\n";
  os << "dow,minute,mean_scaled_count\n";
  for (int dow = 0; dow < 7; ++dow) {
    for (int m = 0; m < 1440; ++m) {
      os << dow << ',' << m << ',' << format_real(profile.at(dow, m)) << '\n';
    }
  }
}

inline TimeProfile read_time_profile(std::istream& is) {
  std::string line;
  while (std::getline(is, line) && !line.empty() && line[0] == '#') {
  }
  if (trim(line) != "ridesim-time-profile v1") {
    throw ValidationError("not a time profile artifact");
  }
  std::getline(is, line);
  TimeProfile profile;
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 3) throw ValidationError("bad time profile row");
    const auto dow = parse_real(cells[0]), m = parse_real(cells[1]),
               v = parse_real(cells[2]);
    if (!dow || !m || !v) throw ValidationError("bad time profile row");
    profile.set(static_cast<int>(*dow), static_cast<int>(*m), *v);
    ++rows;
  }
  if (rows != TimeProfile::kBins) throw ValidationError("truncated time profile");
  return profile;
}

// Rounds up with probability equal to the fractional part, so the result's
// expectation is exactly x.
inline std::int64_t probabilistic_round(double x, Rng& rng) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw ValidationError("probabilistic_round needs a finite x >= 0");
  }
  const double whole = std::floor(x);
  const double frac = x - whole;
  auto n = static_cast<std::int64_t>(whole);
  if (frac > 0.0 && rng.uniform() < frac) ++n;
  return n;
}

}  // namespace ridesim

#endif  // RIDESIM_DISTRIBUTIONS_HPP_
