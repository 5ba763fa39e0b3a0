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

#ifndef RIDESIM_COMMON_HPP_
#define RIDESIM_COMMON_HPP_

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

namespace ridesim {

inline constexpr std::string_view kVersion = "0.1.0";

// Minutes. Log timestamps count from the Unix epoch; simulation clocks count
// from the start of an episode (always a Monday 00:00).
using Minute = std::int64_t;

inline constexpr Minute kMinutesPerDay = 1440;
inline constexpr Minute kMinutesPerWeek = 7 * kMinutesPerDay;

// Thrown for precondition and input-validation failures.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Seeded random source. Wraps mt19937_64 and converts raw bits by hand so
// that streams are reproducible across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Rejection sampling removes modulo bias.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw ValidationError("Rng::below requires n > 0");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller; only used for synthetic data generation.
  double normal(double mean, double stddev) {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return mean + stddev * std::sqrt(-2.0 * std::log(u1)) *
                      std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Named sub-stream of a global seed, so that stages draw independent
// randomness and editing one stage leaves the others untouched.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) {
  return splitmix64(seed ^ fnv1a64(stream));
}

inline Rng make_rng(std::uint64_t seed, std::string_view stream) {
  return Rng(derive_seed(seed, stream));
}

// Round-trip ("shortest exact") decimal rendering of a double.
inline std::string format_real(double v) { return fmt::format("{}", v); }

// ISO-8601 minute-precision UTC timestamps: YYYY-MM-DDTHH:MM with an
// optional trailing 'Z'.
inline std::optional<Minute> parse_timestamp(std::string_view s) {
  if (!s.empty() && s.back() == 'Z') s.remove_suffix(1);
  if (s.size() != 16 || s[4] != '-' || s[7] != '-' || s[10] != 'T' ||
      s[13] != ':') {
    return std::nullopt;
  }
  auto digits = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (s[i] < '0' || s[i] > '9') return std::nullopt;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  const auto y = digits(0, 4), mo = digits(5, 2), d = digits(8, 2),
             h = digits(11, 2), mi = digits(14, 2);
  if (!y || !mo || !d || !h || !mi || *h > 23 || *mi > 59) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{*y},
                                        std::chrono::month{unsigned(*mo)},
                                        std::chrono::day{unsigned(*d)}};
  if (!ymd.ok()) return std::nullopt;
  const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
  return Minute{days} * kMinutesPerDay + *h * 60 + *mi;
}

inline std::string format_timestamp(Minute m) {
  Minute days = m / kMinutesPerDay;
  Minute rem = m % kMinutesPerDay;
  if (rem < 0) {
    rem += kMinutesPerDay;
    --days;
  }
  const std::chrono::year_month_day ymd{
      std::chrono::sys_days{std::chrono::days{days}}};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}Z", int(ymd.year()),
                     unsigned(ymd.month()), unsigned(ymd.day()), rem / 60,
                     rem % 60);
}

// Day of week with Monday = 0, for epoch-based minutes.
inline int day_of_week(Minute epoch_minute) {
  Minute days = epoch_minute / kMinutesPerDay;
  if (epoch_minute % kMinutesPerDay < 0) --days;
  // 1970-01-01 was a Thursday.
  return static_cast<int>(((days + 3) % 7 + 7) % 7);
}

// Monday-aligned calendar week index for epoch-based minutes.
inline Minute week_index(Minute epoch_minute) {
  Minute days = epoch_minute / kMinutesPerDay;
  if (epoch_minute % kMinutesPerDay < 0) --days;
  const Minute shifted = days + 3;
  return shifted >= 0 ? shifted / 7 : (shifted - 6) / 7;
}

inline Minute week_start(Minute week) { return (week * 7 - 3) * kMinutesPerDay; }

inline std::vector<std::string> split(std::string_view s, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(delim, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      break;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

// Strict real parse: the whole field must be consumed and the value finite.
inline std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::string buf(s);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace ridesim

#endif  // RIDESIM_COMMON_HPP_
