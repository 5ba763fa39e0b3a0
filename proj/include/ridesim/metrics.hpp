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

// Evaluation metrics: daily demand tables, binned acceptance curves,
// correlation and bootstrap intervals.

#ifndef RIDESIM_METRICS_HPP_
#define RIDESIM_METRICS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ridesim/common.hpp"
#include "ridesim/sim.hpp"

namespace ridesim {

inline double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ValidationError("pearson needs equal-length inputs");
  if (xs.size() < 2) throw ValidationError("pearson needs at least 2 points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw ValidationError("pearson input has zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double delta_percent(double predicted, double actual) {
  if (!(actual > 0.0)) throw ValidationError("delta_percent needs actual > 0");
  return 100.0 * (predicted - actual) / actual;
}

inline constexpr std::array<std::string_view, 7> kDayNames = {"Mon", "Tue", "Wed", "Thu",
                                                              "Fri", "Sat", "Sun"};

struct DailyCountRow {
  double mean = 0.0;
  std::optional<double> lower;
  std::optional<double> upper;
  std::optional<double> actual;
  std::optional<double> delta;
};

struct DailyCountReport {
  std::array<DailyCountRow, 7> days;
  std::size_t replications = 0;
  std::optional<std::string> warning;
};

// Generated rides per weekday, averaged over the weeks of one episode.
// Episodes start on Monday.
inline std::array<double, 7> weekday_means(const EpisodeLog& log) {
  std::array<double, 7> sum{};
  std::array<double, 7> n{};
  for (std::size_t d = 0; d < log.days.size(); ++d) {
    sum[d % 7] += static_cast<double>(log.days[d].generated);
    n[d % 7] += 1.0;
  }
  for (std::size_t i = 0; i < 7; ++i) sum[i] = n[i] > 0.0 ? sum[i] / n[i] : 0.0;
  return sum;
}

// Mean predicted rides per weekday across replications, multiplied by
// `scale` to return to raw units, with a normal-approximation 95% interval.
inline DailyCountReport daily_counts(std::span<const EpisodeLog> replications,
                                     double scale = 1.0,
                                     std::optional<std::array<double, 7>> actual = std::nullopt) {
  if (replications.empty()) throw ValidationError("daily_counts needs replications");
  DailyCountReport report;
  report.replications = replications.size();
  std::vector<std::array<double, 7>> per;
  per.reserve(replications.size());
  for (const auto& log : replications) per.push_back(weekday_means(log));
  const double n = static_cast<double>(per.size());
  if (per.size() < 2) {
    report.warning = "fewer than 2 replications; confidence intervals omitted";
  }
  for (std::size_t d = 0; d < 7; ++d) {
    double mean = 0.0;
    for (const auto& p : per) mean += p[d];
    mean /= n;
    auto& row = report.days[d];
    row.mean = mean * scale;
    if (per.size() >= 2) {
      double ss = 0.0;
      for (const auto& p : per) ss += (p[d] - mean) * (p[d] - mean);
      const double half = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n) * scale;
      row.lower = row.mean - half;
      row.upper = row.mean + half;
    }
    if (actual) {
      row.actual = (*actual)[d];
      if ((*actual)[d] > 0.0) row.delta = delta_percent(row.mean, (*actual)[d]);
    }
  }
  return report;
}

inline void write_daily_report(std::ostream& os, const DailyCountReport& report) {
  if (report.warning) os << "# warning: " << *report.warning << '\n';
  os << "day,predicted_mean,ci_lower,ci_upper,actual,delta_percent\n";
  auto opt = [](const std::optional<double>& v, const char* spec) {
    return v ? fmt::format(fmt::runtime(spec), *v) : std::string();
  };
  for (std::size_t d = 0; d < 7; ++d) {
    const auto& r = report.days[d];
    os << kDayNames[d] << ',' << fmt::format("{:.3f}", r.mean) << ',' << opt(r.lower, "{:.3f}")
       << ',' << opt(r.upper, "{:.3f}") << ',' << opt(r.actual, "{:.3f}") << ','
       << opt(r.delta, "{:.3f}") << '\n';
  }
}

enum class CurveAxis { kHourOfDay, kTripDistance };

inline std::string_view to_string(CurveAxis a) {
  return a == CurveAxis::kHourOfDay ? "hour_of_day" : "trip_distance_km";
}

struct AcceptanceCurve {
  CurveAxis axis = CurveAxis::kHourOfDay;
  std::vector<double> edges;
  std::vector<std::int64_t> offers;
  std::vector<std::int64_t> accepted;

  std::size_t bins() const { return offers.size(); }
  // Absent for empty bins.
  std::optional<double> rate(std::size_t bin) const {
    if (offers[bin] == 0) return std::nullopt;
    return static_cast<double>(accepted[bin]) / static_cast<double>(offers[bin]);
  }
};

inline std::vector<double> default_hour_edges() {
  std::vector<double> e;
  for (int h = 0; h <= 24; ++h) e.push_back(h);
  return e;
}

// 1 km bins up to 20 km, then one overflow bin.
inline std::vector<double> default_distance_edges() {
  std::vector<double> e;
  for (int k = 0; k <= 20; ++k) e.push_back(k);
  e.push_back(std::numeric_limits<double>::infinity());
  return e;
}

inline std::vector<double> default_edges(CurveAxis axis) {
  return axis == CurveAxis::kHourOfDay ? default_hour_edges() : default_distance_edges();
}

inline double axis_value(const Offer& o, CurveAxis axis) {
  return axis == CurveAxis::kHourOfDay ? o.inputs.minute_of_day / 60.0 : o.inputs.trip_km;
}

// Bins are [edges[i], edges[i+1]). Every offer must fall inside the edges.
inline AcceptanceCurve acceptance_by_bin(std::span<const Offer> offers, CurveAxis axis,
                                         std::vector<double> edges) {
  if (offers.empty()) throw ValidationError("acceptance_by_bin needs offers");
  if (edges.size() < 2) throw ValidationError("need at least two bin edges");
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (std::isnan(edges[i]) || !(edges[i] < edges[i + 1])) {
      throw ValidationError("bin edges must be strictly increasing");
    }
  }
  AcceptanceCurve c;
  c.axis = axis;
  c.edges = std::move(edges);
  c.offers.assign(c.edges.size() - 1, 0);
  c.accepted.assign(c.edges.size() - 1, 0);
  for (const auto& o : offers) {
    const double v = axis_value(o, axis);
    const auto it = std::upper_bound(c.edges.begin(), c.edges.end(), v);
    if (it == c.edges.begin() || it == c.edges.end()) {
      throw ValidationError(fmt::format("value {} lies outside the bin edges", v));
    }
    const auto bin = static_cast<std::size_t>(it - c.edges.begin() - 1);
    ++c.offers[bin];
    c.accepted[bin] += o.action == Action::kAccept;
  }
  return c;
}

// Correlation of two curves over the bins populated in both.
inline double curve_pearson(const AcceptanceCurve& a, const AcceptanceCurve& b) {
  if (a.edges != b.edges) throw ValidationError("curves have different bins");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < a.bins(); ++i) {
    const auto ra = a.rate(i);
    const auto rb = b.rate(i);
    if (ra && rb) {
      xs.push_back(*ra);
      ys.push_back(*rb);
    }
  }
  return pearson(xs, ys);
}

inline void write_acceptance_curve(std::ostream& os, const AcceptanceCurve& c) {
  os << "bin_lo,bin_hi,offers,accepted,rate\n";
  for (std::size_t i = 0; i < c.bins(); ++i) {
    const auto r = c.rate(i);
    os << format_real(c.edges[i]) << ',' << format_real(c.edges[i + 1]) << ',' << c.offers[i]
       << ',' << c.accepted[i] << ',' << (r ? format_real(*r) : std::string()) << '\n';
  }
}

// Side-by-side rates of several curves over shared bins.
inline void write_curve_comparison(std::ostream& os, std::span<const std::string> labels,
                                   std::span<const AcceptanceCurve> curves) {
  if (labels.size() != curves.size() || curves.empty()) {
    throw ValidationError("need one label per curve");
  }
  os << "bin_lo,bin_hi";
  for (const auto& l : labels) os << ",rate_" << l;
  os << '\n';
  const auto& ref = curves.front();
  for (const auto& c : curves) {
    if (c.edges != ref.edges) throw ValidationError("curves have different bins");
  }
  for (std::size_t i = 0; i < ref.bins(); ++i) {
    os << format_real(ref.edges[i]) << ',' << format_real(ref.edges[i + 1]);
    for (const auto& c : curves) {
      const auto r = c.rate(i);
      os << ',' << (r ? format_real(*r) : std::string());
    }
    os << '\n';
  }
}

struct BootstrapInterval {
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

// Percentile bootstrap over `n` paired items. `statistic` receives the
// resampled item indices.
inline BootstrapInterval bootstrap(
    std::size_t n, const std::function<double(std::span<const std::size_t>)>& statistic,
    Rng& rng, int resamples = 1000, double confidence = 0.95) {
  if (n == 0) throw ValidationError("bootstrap needs items");
  if (resamples < 1) throw ValidationError("bootstrap needs resamples");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw ValidationError("confidence must lie in (0, 1)");
  }
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  BootstrapInterval out;
  out.estimate = statistic(idx);
  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(resamples));
  for (int r = 0; r < resamples; ++r) {
    for (auto& i : idx) i = rng.below(n);
    stats.push_back(statistic(idx));
  }
  std::sort(stats.begin(), stats.end());
  const double alpha = (1.0 - confidence) / 2.0;
  auto pick = [&](double q) {
    const auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(stats.size() - 1)));
    return stats[k];
  };
  out.lower = pick(alpha);
  out.upper = pick(1.0 - alpha);
  return out;
}

using OfferFilter = std::function<bool(const Offer&)>;

// Accepted fraction of the offers passing `keep` (all when empty).
inline double acceptance_rate(std::span<const Offer> offers, const OfferFilter& keep = nullptr) {
  std::size_t n = 0, a = 0;
  for (const auto& o : offers) {
    if (keep && !keep(o)) continue;
    ++n;
    a += o.action == Action::kAccept;
  }
  if (n == 0) throw ValidationError("no offers to compute an acceptance rate over");
  return static_cast<double>(a) / static_cast<double>(n);
}

// rate(treated) - rate(control) over the same offers, decided by two
// policies; resampling keeps the pairs together.
inline BootstrapInterval bootstrap_rate_difference(std::span<const Offer> treated,
                                                   std::span<const Offer> control,
                                                   const OfferFilter& keep, Rng& rng,
                                                   int resamples = 1000,
                                                   double confidence = 0.95) {
  if (treated.size() != control.size()) {
    throw ValidationError("paired offer sets differ in size");
  }
  std::vector<int> diff;
  for (std::size_t i = 0; i < treated.size(); ++i) {
    if (keep && !keep(control[i])) continue;
    diff.push_back(static_cast<int>(treated[i].action == Action::kAccept) -
                   static_cast<int>(control[i].action == Action::kAccept));
  }
  if (diff.empty()) throw ValidationError("no offers pass the filter");
  return bootstrap(
      diff.size(),
      [&](std::span<const std::size_t> idx) {
        long s = 0;
        for (auto i : idx) s += diff[i];
        return static_cast<double>(s) / static_cast<double>(idx.size());
      },
      rng, resamples, confidence);
}

}  // namespace ridesim

#endif  // RIDESIM_METRICS_HPP_
