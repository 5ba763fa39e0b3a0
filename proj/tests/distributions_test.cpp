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

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "ridesim/distributions.hpp"

namespace ridesim {
namespace {

// Brute-force two-sample KS distance: the largest ECDF gap over every
// sample point of either set.
double ks_oracle(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  auto ecdf = [](const std::vector<double>& s, double x) {
    return static_cast<double>(std::upper_bound(s.begin(), s.end(), x) - s.begin()) /
           static_cast<double>(s.size());
  };
  double d = 0.0;
  for (double x : a) d = std::max(d, std::abs(ecdf(a, x) - ecdf(b, x)));
  for (double x : b) d = std::max(d, std::abs(ecdf(a, x) - ecdf(b, x)));
  return d;
}

TEST(FitEmpirical, SortsSamples) {
  const auto d = fit_empirical({3, 1, 2});
  EXPECT_EQ(d.samples(), (std::vector<double>{1, 2, 3}));
}

TEST(FitEmpirical, ConstantSamplesAreValid) {
  const auto d = fit_empirical({5, 5, 5});
  EXPECT_EQ(d.min(), 5.0);
  EXPECT_EQ(d.max(), 5.0);
}

TEST(FitEmpirical, RejectsNaNAndTinyInputs) {
  EXPECT_THROW(fit_empirical({1, std::numeric_limits<double>::quiet_NaN()}), ValidationError);
  EXPECT_THROW(fit_empirical({1}), ValidationError);
}

TEST(InverseSample, BoundariesAreMinAndMax) {
  const auto d = fit_empirical({4, 9, 1, 7});
  EXPECT_EQ(inverse_sample(d, 0.0), 1.0);
  EXPECT_EQ(inverse_sample(d, 1.0), 9.0);
}

TEST(InverseSample, MidpointInterpolates) {
  // Position 0.5 * 3 = 1.5 lies halfway between 20 and 30.
  EXPECT_DOUBLE_EQ(inverse_sample(fit_empirical({10, 20, 30, 40}), 0.5), 25.0);
}

TEST(InverseSample, ConstantSamplesAlwaysGiveTheConstant) {
  const auto d = fit_empirical({5, 5, 5});
  for (double u : {0.0, 0.13, 0.5, 0.99, 1.0}) EXPECT_EQ(inverse_sample(d, u), 5.0);
}

TEST(InverseSample, OutOfRangeLevelIsAnError) {
  const auto d = fit_empirical({1, 2});
  EXPECT_THROW(inverse_sample(d, -0.1), ValidationError);
  EXPECT_THROW(inverse_sample(d, 1.5), ValidationError);
}

TEST(InverseSample, MonotoneInU) {
  Rng rng(4);
  std::vector<double> xs;
  for (int i = 0; i < 200; ++i) xs.push_back(rng.normal(0.0, 3.0));
  const auto d = fit_empirical(xs);
  double prev = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 10000; ++k) {
    const double v = inverse_sample(d, k / 10000.0);
    ASSERT_GE(v, prev);
    prev = v;
  }
}

TEST(KsStatistic, IdenticalSetsGiveZero) {
  const std::vector<double> xs = {1, 4, 2, 8, 5};
  EXPECT_EQ(ks_statistic(fit_empirical(xs), xs), 0.0);
}

TEST(KsStatistic, DisjointSupportsGiveOne) {
  const std::vector<double> obs = {10, 11};
  EXPECT_EQ(ks_statistic(fit_empirical({0, 1}), obs), 1.0);
}

TEST(KsStatistic, MatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    std::vector<double> a, b;
    for (int i = 0; i < 50; ++i) a.push_back(std::round(rng.normal(0, 2)));
    for (int i = 0; i < 37; ++i) b.push_back(std::round(rng.normal(0.5, 2)));
    EXPECT_NEAR(ks_statistic(fit_empirical(a), b), ks_oracle(a, b), 1e-12) << seed;
  }
}

TEST(KsStatistic, InverseTransformDrawsMatchTheSource) {
  Rng rng(17);
  std::vector<double> source;
  for (int i = 0; i < 5000; ++i) source.push_back(std::exp(rng.normal(1.5, 0.6)));
  const auto d = fit_empirical(source);
  std::vector<double> draws;
  for (int i = 0; i < 10000; ++i) draws.push_back(d.sample(rng));
  EXPECT_LT(ks_statistic(d, draws), 0.05);
}

TEST(ProbabilisticRound, IntegersAreExact) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(probabilistic_round(2.0, rng), 2);
    EXPECT_EQ(probabilistic_round(0.0, rng), 0);
  }
}

TEST(ProbabilisticRound, MeanEqualsInput) {
  Rng rng(2);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const auto n = probabilistic_round(2.3, rng);
    ASSERT_TRUE(n == 2 || n == 3);
    sum += static_cast<double>(n);
  }
  EXPECT_NEAR(sum / 100000.0, 2.3, 0.01);
}

TEST(ProbabilisticRound, NeverLeavesFloorAndCeil) {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double x = rng.uniform(0.0, 50.0);
    const auto n = static_cast<double>(probabilistic_round(x, rng));
    ASSERT_TRUE(n == std::floor(x) || n == std::ceil(x)) << x;
  }
}

TEST(ProbabilisticRound, NegativeOrNonFiniteIsAnError) {
  Rng rng(0);
  EXPECT_THROW(probabilistic_round(-0.5, rng), ValidationError);
  EXPECT_THROW(probabilistic_round(std::numeric_limits<double>::infinity(), rng),
               ValidationError);
}

const Minute kMonday = *parse_timestamp("2020-02-03T00:00");

TEST(FitTimeProfile, SeventyTripsEveryMondayAtEightGiveTwo) {
  std::vector<Minute> created;
  for (int week = 0; week < 3; ++week) {
    for (int i = 0; i < 70; ++i) created.push_back(kMonday + week * kMinutesPerWeek + 8 * 60);
  }
  const auto p = fit_time_profile(std::span<const Minute>(created), DemandScaler{35.0},
                                  std::pair{kMonday, kMonday + 3 * kMinutesPerWeek});
  EXPECT_DOUBLE_EQ(p.at(0, 8 * 60), 2.0);
  EXPECT_EQ(p.at(0, 3 * 60 + 12), 0.0);
  EXPECT_DOUBLE_EQ(p.week_total(), 2.0);
}

TEST(FitTimeProfile, WeeklyTotalScalesDown) {
  // 700,000 trips in one week at scale 35 leave 20,000 per simulated week.
  Rng rng(8);
  std::vector<Minute> created;
  created.reserve(700000);
  for (int i = 0; i < 700000; ++i) {
    created.push_back(kMonday + static_cast<Minute>(rng.below(kMinutesPerWeek)));
  }
  const auto p = fit_time_profile(std::span<const Minute>(created), DemandScaler{35.0});
  EXPECT_NEAR(p.week_total(), 20000.0, 1e-6);
}

TEST(FitTimeProfile, LessThanAWeekIsAnError) {
  const std::vector<Minute> created = {kMonday, kMonday + 3 * kMinutesPerDay};
  EXPECT_THROW(fit_time_profile(std::span<const Minute>(created), DemandScaler{}),
               ValidationError);
}

TEST(FitTimeProfile, WriteReadRoundTrips) {
  TimeProfile p;
  p.set(2, 100, 1.25);
  p.set(6, 1439, 0.5);
  std::stringstream io;
  write_time_profile(io, p);
  const auto back = read_time_profile(io);
  EXPECT_EQ(back.at(2, 100), 1.25);
  EXPECT_EQ(back.at(6, 1439), 0.5);
  EXPECT_EQ(back.week_total(), 1.75);
}

TEST(Distribution, WriteReadRoundTrips) {
  const auto d = fit_empirical({0.1, 1.0 / 3.0, 2.5e-7, 12345.678});
  std::stringstream io;
  write_distribution(io, "trip_km", d);
  const auto [name, back] = read_distribution(io);
  EXPECT_EQ(name, "trip_km");
  EXPECT_EQ(back.samples(), d.samples());
}

}  // namespace
}  // namespace ridesim
