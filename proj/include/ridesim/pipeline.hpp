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

// File-based pipeline behind the command-line tool. Each stage reads the
// artifacts of earlier stages from the output directory and writes its own;
// every artifact starts with a "# ridesim <version> config=<hash> seed=<n>"
// line.

#ifndef RIDESIM_PIPELINE_HPP_
#define RIDESIM_PIPELINE_HPP_

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ridesim/agent.hpp"
#include "ridesim/common.hpp"
#include "ridesim/config.hpp"
#include "ridesim/demonstrations.hpp"
#include "ridesim/distributions.hpp"
#include "ridesim/metrics.hpp"
#include "ridesim/model.hpp"
#include "ridesim/sim.hpp"
#include "ridesim/synthetic.hpp"
#include "ridesim/training.hpp"
#include "ridesim/trip_log.hpp"

namespace ridesim {

// An input artifact that an earlier subcommand should have produced.
class MissingArtifact : public ValidationError {
 public:
  MissingArtifact(const std::filesystem::path& path, std::string_view producer)
      : ValidationError(fmt::format("missing artifact {}; run '{}' first", path.string(),
                                    producer)) {}
};

namespace artifact {
inline constexpr const char* kSyntheticLog = "synthetic_log.csv";
inline constexpr const char* kCleanLog = "clean_log.csv";
inline constexpr const char* kRejects = "clean_log.rejects.csv";
inline constexpr const char* kCleaningReport = "cleaning_report.csv";
inline constexpr const char* kPickupX = "pickup_x.dist";
inline constexpr const char* kPickupY = "pickup_y.dist";
inline constexpr const char* kTripKm = "trip_km.dist";
inline constexpr const char* kTimeProfile = "time_profile.csv";
inline constexpr const char* kDriverGoals = "driver_goals.csv";
inline constexpr const char* kRides = "rides.csv";
inline constexpr const char* kAgentBc = "agent_bc.txt";
inline constexpr const char* kBcReport = "bc_report.csv";
inline constexpr const char* kAgentRl = "agent_rl.txt";
inline constexpr const char* kRlReport = "rl_report.csv";
inline constexpr const char* kDailyCounts = "daily_counts.csv";
inline constexpr const char* kByHour = "acceptance_by_hour.csv";
inline constexpr const char* kByDistance = "acceptance_by_distance.csv";
inline constexpr const char* kCorrelations = "correlations.csv";
inline constexpr const char* kOffers = "offers.csv";
inline constexpr const char* kSweepSummary = "sweep_summary.csv";
}  // namespace artifact

class Pipeline {
 public:
  explicit Pipeline(RunConfig config) : config_(std::move(config)) {
    config_.validate();
    hash_ = config_hash(config_);
    out_ = config_.out_dir;
  }

  const RunConfig& config() const { return config_; }
  const std::filesystem::path& out_dir() const { return out_; }
  std::uint64_t seed() const { return *config_.seed; }
  Rng stream(std::string_view name) const { return make_rng(seed(), name); }

  std::string header() const {
    return fmt::format("# ridesim {} config={} seed={}\n", kVersion, hash_, seed());
  }

  // Creates `dir/name` with the metadata header already written.
  std::ofstream create(const std::filesystem::path& dir, std::string_view name) const {
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    std::ofstream os(path);
    if (!os) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    os << header();
    return os;
  }
  std::ofstream create(std::string_view name) const { return create(out_, name); }

  std::ifstream open(std::string_view name, std::string_view producer) const {
    const auto path = out_ / name;
    if (!std::filesystem::exists(path)) throw MissingArtifact(path, producer);
    std::ifstream is(path);
    if (!is) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
    return is;
  }

  // ---- synth ----
  void synth() const {
    const auto records = generate_synthetic_log(config_.synth, derive_seed(seed(), "synth"));
    auto os = create(artifact::kSyntheticLog);
    write_trip_log(os, records);
  }

  // ---- ingest ----
  void ingest() const {
    if (config_.log_path.empty()) throw ValidationError("paths.log is not set");
    std::ifstream is(config_.log_path);
    if (!is) throw ValidationError(fmt::format("cannot open trip log {}", config_.log_path));
    auto parsed = parse_trip_log(is);
    const auto cleaned = clean(parsed.records, config_.grid.region());
    {
      auto os = create(artifact::kCleanLog);
      write_trip_log(os, cleaned.records);
    }
    {
      auto os = create(artifact::kRejects);
      write_rejects(os, parsed.rejects);
    }
    auto os = create(artifact::kCleaningReport);
    write_cleaning_report(os, cleaned.report);
  }

  std::vector<TripRecord> clean_log() const {
    auto is = open(artifact::kCleanLog, "ingest");
    auto parsed = parse_trip_log(is);
    if (!parsed.rejects.empty()) {
      throw ValidationError(fmt::format("{} has {} malformed rows", artifact::kCleanLog,
                                        parsed.rejects.size()));
    }
    if (parsed.records.empty()) throw ValidationError("the cleaned trip log is empty");
    return std::move(parsed.records);
  }

  // Demonstration window from the config, defaulting to the whole days of
  // the log.
  TimeWindow window(std::span<const TripRecord> records) const {
    TimeWindow w;
    w.start = history_start(records);
    Minute last = w.start;
    for (const auto& r : records) last = std::max(last, *r.created_time);
    w.end = (last / kMinutesPerDay + 1) * kMinutesPerDay;
    if (!config_.bc_window_start.empty()) w.start = *parse_timestamp(config_.bc_window_start);
    if (!config_.bc_window_end.empty()) w.end = *parse_timestamp(config_.bc_window_end);
    if (w.end <= w.start) throw ValidationError("bc window is empty");
    return w;
  }

  // ---- fit ----
  void fit() const {
    const auto records = clean_log();
    const auto w = window(records);
    const auto model =
        fit_demand_model(records, config_.grid, config_.demand, std::pair{w.start, w.end});
    {
      auto os = create(artifact::kPickupX);
      write_distribution(os, "pickup_x_km", model.pickup_x);
    }
    {
      auto os = create(artifact::kPickupY);
      write_distribution(os, "pickup_y_km", model.pickup_y);
    }
    {
      auto os = create(artifact::kTripKm);
      write_distribution(os, "trip_km", model.trip_km);
    }
    {
      auto os = create(artifact::kTimeProfile);
      write_time_profile(os, model.profile);
    }
    auto os = create(artifact::kDriverGoals);
    os << "driver_id,last_week_trips\n";
    for (const auto& [id, n] : weekly_trip_averages(records, w)) os << id << ',' << n << '\n';
  }

  DemandModel demand_model() const {
    DemandModel m;
    auto read = [&](const char* name) {
      auto is = open(name, "fit");
      return read_distribution(is).second;
    };
    m.pickup_x = read(artifact::kPickupX);
    m.pickup_y = read(artifact::kPickupY);
    m.trip_km = read(artifact::kTripKm);
    auto is = open(artifact::kTimeProfile, "fit");
    m.profile = read_time_profile(is);
    return m;
  }

  std::vector<int> driver_goals() const {
    auto is = open(artifact::kDriverGoals, "fit");
    std::string line;
    std::vector<int> out;
    bool header = false;
    while (std::getline(is, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (!header) {
        header = true;
        continue;
      }
      const auto cells = split(line, ',');
      const auto v = cells.size() == 2 ? parse_real(cells[1]) : std::nullopt;
      if (!v) throw ValidationError(fmt::format("bad driver goal row '{}'", line));
      out.push_back(static_cast<int>(*v));
    }
    return out;
  }

  SimConfig sim_config(const PlatformParams& params) const {
    SimConfig sim;
    apply_model(demand_model(), sim);
    sim.grid = config_.grid;
    sim.params = params;
    sim.scale = config_.agent.scale;
    sim.drivers = config_.drivers;
    sim.days = config_.days;
    sim.speed_kmh = config_.speed_kmh;
    sim.max_offers = config_.max_offers;
    sim.last_week_trips = driver_goals();
    sim.default_last_week_trips = config_.default_last_week_trips;
    return sim;
  }
  SimConfig sim_config() const { return sim_config(config_.platform); }

  // ---- generate ----
  void generate() const {
    const auto sim = sim_config();
    Rng rng = stream("generate");
    auto os = create(artifact::kRides);
    write_rides_header(os);
    for (Minute now = 0; now < sim.days * kMinutesPerDay; ++now) {
      const auto n = probabilistic_round(sim.profile.at_clock(now), rng);
      if (n == 0) continue;
      for (const auto& ride :
           generate_rides(sim.grid, sim.pickup_x, sim.pickup_y, sim.trip_km, n, now, rng)) {
        write_ride_row(os, ride);
      }
    }
  }

  ExtractionSettings extraction() const {
    ExtractionSettings s;
    s.grid = config_.grid;
    s.scale = config_.agent.scale;
    s.speed_kmh = config_.speed_kmh;
    s.default_last_week_trips = config_.default_last_week_trips;
    return s;
  }

  std::vector<Trajectory> demonstrations(std::span<const TripRecord> records) const {
    return extract_demonstrations(records, config_.platform, window(records), extraction());
  }

  // ---- train-bc ----
  void train_bc() const {
    const auto records = clean_log();
    const auto demos = demonstrations(records);
    AgentConfig ac = config_.agent;
    if (config_.auto_support) {
      std::vector<double> rewards;
      for (const auto& t : demos) {
        for (const auto& s : t.steps) rewards.push_back(s.r);
      }
      std::tie(ac.v_min, ac.v_max) = support_from_rewards(rewards, ac.gamma);
    }
    Rng rng = stream("train.bc");
    auto agent = make_agent(ac, rng);
    const auto report = ridesim::train_bc(agent, demos, config_.bc, rng);
    {
      auto os = create(artifact::kBcReport);
      write_train_report(os, report);
    }
    auto os = create(artifact::kAgentBc);
    write_agent(os, agent);
  }

  CategoricalQAgent load_agent(std::string_view name, std::string_view producer) const {
    auto is = open(name, producer);
    return read_agent(is);
  }

  // ---- train-rl ----
  TrainReport fine_tune(CategoricalQAgent& agent, const PlatformParams& params,
                        bool warm) const {
    Rng rng = stream("train.rl");
    return train_rl(agent, sim_config(params), config_.rl, rng, warm);
  }

  void train_rl_stage() const {
    CategoricalQAgent agent;
    bool warm = true;
    if (std::filesystem::exists(out_ / artifact::kAgentBc) || !config_.rl.cold_start) {
      agent = load_agent(artifact::kAgentBc, "train-bc");
    } else {
      Rng rng = stream("train.rl.init");
      agent = make_agent(config_.agent, rng);
      warm = false;
    }
    const auto report = fine_tune(agent, config_.platform, warm);
    {
      auto os = create(artifact::kRlReport);
      write_train_report(os, report);
    }
    auto os = create(artifact::kAgentRl);
    write_agent(os, agent);
  }

  CategoricalQAgent evaluation_agent() const {
    return config_.eval_agent == "bc" ? load_agent(artifact::kAgentBc, "train-bc")
                                      : load_agent(artifact::kAgentRl, "train-rl");
  }

  // Greedy replications of `agent` under `params`.
  std::vector<EpisodeLog> replicate(const CategoricalQAgent& agent,
                                    const PlatformParams& params) const {
    const auto sim = sim_config(params);
    std::vector<EpisodeLog> logs;
    for (int i = 0; i < config_.replications; ++i) {
      Rng rng = stream(fmt::format("evaluate.{}", i));
      AgentPolicy policy{&agent, 0.0};
      logs.push_back(run_episode(sim, policy, rng));
    }
    return logs;
  }

  // Mean rides per weekday implied by the fitted profile, in log units.
  std::array<double, 7> expected_daily_rides() const {
    const auto model = demand_model();
    std::array<double, 7> out{};
    for (int d = 0; d < 7; ++d) {
      out[static_cast<std::size_t>(d)] = model.profile.day_total(d) * config_.demand.scale_factor;
    }
    return out;
  }

  void write_evaluation(const std::filesystem::path& dir, const CategoricalQAgent& agent,
                        const PlatformParams& params,
                        std::span<const TripRecord> records) const {
    const auto logs = replicate(agent, params);
    {
      auto os = create(dir, artifact::kDailyCounts);
      write_daily_report(
          os, daily_counts(logs, config_.demand.scale_factor, expected_daily_rides()));
    }
    std::vector<Offer> sim_offers;
    for (const auto& log : logs) sim_offers.insert(sim_offers.end(), log.offers.begin(),
                                                   log.offers.end());
    {
      auto os = create(dir, artifact::kOffers);
      write_offers(os, logs.front());
    }
    // Logged decisions, and the agent's decisions on the same logged states.
    std::vector<Offer> logged;
    for (const auto& t : demonstrations(records)) {
      for (const auto& s : t.steps) {
        Offer o;
        o.obs = s.s;
        o.action = s.a;
        o.inputs = s.inputs;
        o.reward = s.r;
        logged.push_back(o);
      }
    }
    const auto agent_on_log = relabel_offers(agent, logged, params);
    auto corr = create(dir, artifact::kCorrelations);
    corr << "axis,pearson_agent_on_log,pearson_simulation\n";
    for (auto axis : {CurveAxis::kHourOfDay, CurveAxis::kTripDistance}) {
      const std::vector<AcceptanceCurve> curves = {
          acceptance_by_bin(logged, axis, default_edges(axis)),
          acceptance_by_bin(agent_on_log, axis, default_edges(axis)),
          acceptance_by_bin(sim_offers, axis, default_edges(axis))};
      const std::vector<std::string> labels = {"log", "agent_on_log", "simulation"};
      auto os = create(dir, axis == CurveAxis::kHourOfDay ? artifact::kByHour
                                                          : artifact::kByDistance);
      write_curve_comparison(os, labels, curves);
      auto safe = [](const AcceptanceCurve& a, const AcceptanceCurve& b) {
        try {
          return format_real(curve_pearson(a, b));
        } catch (const ValidationError&) {
          return std::string();
        }
      };
      corr << to_string(axis) << ',' << safe(curves[0], curves[1]) << ','
           << safe(curves[0], curves[2]) << '\n';
    }
  }

  // ---- evaluate ----
  void evaluate() const {
    const auto agent = evaluation_agent();
    write_evaluation(out_, agent, config_.platform, clean_log());
  }

  // Fixed offer set: decisions of `agent` acting greedily for offer_days
  // under the configured platform.
  std::vector<Offer> evaluation_offers(const CategoricalQAgent& agent) const {
    auto sim = sim_config();
    sim.days = config_.offer_days;
    Rng rng = stream("evaluate.offers");
    AgentPolicy policy{&agent, 0.0};
    return run_episode(sim, policy, rng).offers;
  }

  // ---- sweep ----
  void sweep() const {
    const auto base_agent = load_agent(artifact::kAgentBc, "train-bc");
    const auto records = clean_log();
    const auto offers = evaluation_offers(base_agent);
    const auto root = out_ / "sweep";
    std::vector<std::string> labels;
    std::vector<std::vector<Offer>> decisions;
    std::vector<PlatformParams> point_params;
    for (std::size_t i = 0; i < config_.sweep_values.size(); ++i) {
      const auto& value = config_.sweep_values[i];
      RunConfig point = config_;
      set_config_value(point, config_.sweep_key, value);
      point.validate();
      const auto dir = root / fmt::format("{:02d}_{}", i, value);
      auto agent = base_agent;
      const auto report = fine_tune(agent, point.platform, true);
      {
        auto os = create(dir, artifact::kRlReport);
        write_train_report(os, report);
      }
      {
        auto os = create(dir, artifact::kAgentRl);
        write_agent(os, agent);
      }
      write_evaluation(dir, agent, point.platform, records);
      labels.push_back(value);
      decisions.push_back(relabel_offers(agent, offers, point.platform));
      point_params.push_back(point.platform);
    }
    for (auto axis : {CurveAxis::kHourOfDay, CurveAxis::kTripDistance}) {
      std::vector<AcceptanceCurve> curves;
      for (const auto& d : decisions) curves.push_back(acceptance_by_bin(d, axis, default_edges(axis)));
      auto os = create(root, axis == CurveAxis::kHourOfDay ? artifact::kByHour
                                                           : artifact::kByDistance);
      write_curve_comparison(os, labels, curves);
    }
    // Paired bootstrap of each point against the first on the fixed offers.
    auto os = create(root, artifact::kSweepSummary);
    os << "value,acceptance,peak_acceptance,delta_acceptance,delta_lower,delta_upper,"
          "delta_peak,delta_peak_lower,delta_peak_upper\n";
    Rng rng = stream("sweep.bootstrap");
    const auto& base_params = point_params.front();
    for (std::size_t i = 0; i < decisions.size(); ++i) {
      const auto all = bootstrap_rate_difference(decisions[i], decisions.front(), nullptr, rng,
                                                 config_.bootstrap_resamples);
      const auto peak = bootstrap_rate_difference(
          decisions[i], decisions.front(),
          [&](const Offer& o) { return base_params.is_peak(o.inputs.minute_of_day); }, rng,
          config_.bootstrap_resamples);
      os << labels[i] << ',' << format_real(acceptance_rate(decisions[i])) << ','
         << format_real(acceptance_rate(decisions[i], [&](const Offer& o) {
              return base_params.is_peak(o.inputs.minute_of_day);
            }))
         << ',' << format_real(all.estimate) << ',' << format_real(all.lower) << ','
         << format_real(all.upper) << ',' << format_real(peak.estimate) << ','
         << format_real(peak.lower) << ',' << format_real(peak.upper) << '\n';
    }
  }

 private:
  RunConfig config_;
  std::string hash_;
  std::filesystem::path out_;
};

}  // namespace ridesim

#endif  // RIDESIM_PIPELINE_HPP_
