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

// Trip log rows: parsing, cleaning and writing. One row per offer; a ride
// offered to several drivers appears once per driver under the same trip id.

#ifndef RIDESIM_TRIP_LOG_HPP_
#define RIDESIM_TRIP_LOG_HPP_

#include <algorithm>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ridesim/common.hpp"

namespace ridesim {

enum class TripStatus { kAccepted, kRejected, kCompleted, kCancelled };
enum class PaymentMethod { kCash, kCard, kOther };

inline std::string_view to_string(TripStatus s) {
  switch (s) {
    case TripStatus::kAccepted: return "accepted";
    case TripStatus::kRejected: return "rejected";
    case TripStatus::kCompleted: return "completed";
    case TripStatus::kCancelled: return "cancelled";
  }
  return "?";
}

inline std::string_view to_string(PaymentMethod p) {
  switch (p) {
    case PaymentMethod::kCash: return "cash";
    case PaymentMethod::kCard: return "card";
    case PaymentMethod::kOther: return "other";
  }
  return "?";
}

inline std::optional<TripStatus> parse_status(std::string_view s) {
  if (s == "accepted") return TripStatus::kAccepted;
  if (s == "rejected") return TripStatus::kRejected;
  if (s == "completed") return TripStatus::kCompleted;
  if (s == "cancelled") return TripStatus::kCancelled;
  return std::nullopt;
}

inline std::optional<PaymentMethod> parse_payment(std::string_view s) {
  if (s == "cash") return PaymentMethod::kCash;
  if (s == "card") return PaymentMethod::kCard;
  if (s == "other") return PaymentMethod::kOther;
  return std::nullopt;
}

// Empty cells parse to nullopt (or an empty id) and are dealt with by
// clean(); cells that are present but unparseable reject the whole row.
struct TripRecord {
  std::string driver_id;
  std::string trip_id;
  std::optional<Minute> created_time;
  std::optional<Minute> assigned_time;
  std::optional<Minute> decision_time;
  std::optional<Minute> pickup_time;
  std::optional<double> pickup_lat;
  std::optional<double> pickup_lon;
  std::optional<double> drop_lat;
  std::optional<double> drop_lon;
  std::optional<double> pickup_distance_km;
  std::optional<double> trip_distance_km;
  std::optional<TripStatus> status;
  std::optional<PaymentMethod> payment_method;

  // The driver took the offer (a cancellation happens after acceptance).
  bool accepted() const {
    return status && *status != TripStatus::kRejected;
  }

  bool operator==(const TripRecord&) const = default;
};

inline const std::vector<std::string>& default_trip_schema() {
  static const std::vector<std::string> schema = {
      "driver_id",      "trip_id",           "created_time",
      "assigned_time",  "decision_time",     "pickup_time",
      "pickup_lat",     "pickup_lon",        "drop_lat",
      "drop_lon",       "pickup_distance_km", "trip_distance_km",
      "status",         "payment_method"};
  return schema;
}

struct RejectEntry {
  std::size_t row = 0;  // 1-based line number in the source
  std::string reason;
};

struct ParsedLog {
  std::vector<TripRecord> records;
  std::vector<RejectEntry> rejects;
};

namespace detail {

inline bool assign_field(TripRecord& r, std::string_view field,
                         std::string_view cell, std::string& why) {
  cell = trim(cell);
  auto fail = [&](std::string_view what) {
    why = fmt::format("{}: {} '{}'", field, what, cell);
    return false;
  };
  auto time_field = [&](std::optional<Minute>& dst) {
    if (cell.empty()) return true;
    dst = parse_timestamp(cell);
    return dst ? true : fail("bad timestamp");
  };
  auto real_field = [&](std::optional<double>& dst) {
    if (cell.empty()) return true;
    dst = parse_real(cell);
    return dst ? true : fail("not a number");
  };
  if (field == "driver_id") {
    r.driver_id = std::string(cell);
  } else if (field == "trip_id") {
    r.trip_id = std::string(cell);
  } else if (field == "created_time") {
    return time_field(r.created_time);
  } else if (field == "assigned_time") {
    return time_field(r.assigned_time);
  } else if (field == "decision_time") {
    return time_field(r.decision_time);
  } else if (field == "pickup_time") {
    return time_field(r.pickup_time);
  } else if (field == "pickup_lat") {
    return real_field(r.pickup_lat);
  } else if (field == "pickup_lon") {
    return real_field(r.pickup_lon);
  } else if (field == "drop_lat") {
    return real_field(r.drop_lat);
  } else if (field == "drop_lon") {
    return real_field(r.drop_lon);
  } else if (field == "pickup_distance_km") {
    return real_field(r.pickup_distance_km);
  } else if (field == "trip_distance_km") {
    return real_field(r.trip_distance_km);
  } else if (field == "status") {
    if (cell.empty()) return true;
    r.status = parse_status(cell);
    return r.status ? true : fail("unknown status");
  } else if (field == "payment_method") {
    if (cell.empty()) return true;
    r.payment_method = parse_payment(cell);
    return r.payment_method ? true : fail("unknown payment method");
  }
  return true;
}

}  // namespace detail

// Reads a comma-separated log with a header row naming at least every field
// in `schema`. Leading '#' lines are metadata and skipped. Malformed rows go
// to the rejects list with their line number.
inline ParsedLog parse_trip_log(
    std::istream& source,
    const std::vector<std::string>& schema = default_trip_schema()) {
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(source, line)) {
    ++lineno;
    if (!line.empty() && line[0] == '#') continue;
    have_header = true;
    break;
  }
  if (!have_header) throw ValidationError("trip log has no header row");
  const auto header = split(trim(line), ',');
  std::vector<std::string> columns;
  for (const auto& h : header) columns.emplace_back(trim(h));
  for (const auto& field : schema) {
    if (std::find(columns.begin(), columns.end(), field) == columns.end()) {
      throw ValidationError(
          fmt::format("trip log header is missing column '{}'", field));
    }
  }

  ParsedLog out;
  while (std::getline(source, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    if (cells.size() != columns.size()) {
      out.rejects.push_back(
          {lineno, fmt::format("expected {} fields, found {}", columns.size(),
                               cells.size())});
      continue;
    }
    TripRecord record;
    std::string why;
    bool ok = true;
    for (std::size_t c = 0; c < columns.size() && ok; ++c) {
      ok = detail::assign_field(record, columns[c], cells[c], why);
    }
    if (ok) {
      out.records.push_back(std::move(record));
    } else {
      out.rejects.push_back({lineno, std::move(why)});
    }
  }
  return out;
}

inline void write_rejects(std::ostream& os, const std::vector<RejectEntry>& rejects) {
  os << "row,reason\n";
  for (const auto& r : rejects) os << r.row << ",\"" << r.reason << "\"\n";
}

inline void write_trip_log(std::ostream& os, const std::vector<TripRecord>& records) {
  const auto& schema = default_trip_schema();
  for (std::size_t i = 0; i < schema.size(); ++i) {
    os << (i ? "," : "") << schema[i];
  }
  os << '\n';
  auto t = [](const std::optional<Minute>& m) {
    return m ? format_timestamp(*m) : std::string();
  };
  auto v = [](const std::optional<double>& x) {
    return x ? format_real(*x) : std::string();
  };
  for (const auto& r : records) {
    os << r.driver_id << ',' << r.trip_id << ',' << t(r.created_time) << ','
       << t(r.assigned_time) << ',' << t(r.decision_time) << ','
       << t(r.pickup_time) << ',' << v(r.pickup_lat) << ',' << v(r.pickup_lon)
       << ',' << v(r.drop_lat) << ',' << v(r.drop_lon) << ','
       << v(r.pickup_distance_km) << ',' << v(r.trip_distance_km) << ','
       << (r.status ? to_string(*r.status) : "") << ','
       << (r.payment_method ? to_string(*r.payment_method) : "") << '\n';
  }
}

struct Region {
  double lat_min = 0.0;
  double lat_max = 0.0;
  double lon_min = 0.0;
  double lon_max = 0.0;

  bool contains(double lat, double lon) const {
    return lat >= lat_min && lat <= lat_max && lon >= lon_min && lon <= lon_max;
  }
};

struct CleaningReport {
  std::size_t input_count = 0;
  std::size_t duplicate_count = 0;
  std::size_t missing_field_count = 0;
  std::size_t out_of_region_count = 0;
  std::size_t retained_count = 0;
};

struct CleanedLog {
  std::vector<TripRecord> records;
  CleaningReport report;
};

// A record is usable when every required field is present and the fields
// are mutually consistent. Inconsistent records count as missing.
inline bool is_complete(const TripRecord& r) {
  if (r.driver_id.empty() || r.trip_id.empty()) return false;
  if (!r.created_time || !r.assigned_time || !r.decision_time) return false;
  if (!r.pickup_lat || !r.pickup_lon || !r.drop_lat || !r.drop_lon) return false;
  if (!r.pickup_distance_km || !r.trip_distance_km) return false;
  if (!r.status || !r.payment_method) return false;
  if (*r.created_time > *r.assigned_time || *r.assigned_time > *r.decision_time) {
    return false;
  }
  if (*r.pickup_distance_km < 0.0 || *r.trip_distance_km < 0.0) return false;
  if (*r.status == TripStatus::kCompleted && !r.pickup_time) return false;
  return true;
}

// Drops duplicates (same trip offered to the same driver; first kept),
// incomplete records, and pickups outside `region`. Each dropped record is
// counted under the first reason that applies, in that order.
inline CleanedLog clean(const std::vector<TripRecord>& records, const Region& region) {
  CleanedLog out;
  out.report.input_count = records.size();
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : records) {
    if (!seen.emplace(r.trip_id, r.driver_id).second) {
      ++out.report.duplicate_count;
    } else if (!is_complete(r)) {
      ++out.report.missing_field_count;
    } else if (!region.contains(*r.pickup_lat, *r.pickup_lon)) {
      ++out.report.out_of_region_count;
    } else {
      out.records.push_back(r);
    }
  }
  out.report.retained_count = out.records.size();
  return out;
}

inline void write_cleaning_report(std::ostream& os, const CleaningReport& r) {
  os << "input_count,duplicate_count,missing_field_count,out_of_region_count,"
        "retained_count\n"
     << r.input_count << ',' << r.duplicate_count << ',' << r.missing_field_count
     << ',' << r.out_of_region_count << ',' << r.retained_count << '\n';
}

}  // namespace ridesim

#endif  // RIDESIM_TRIP_LOG_HPP_
