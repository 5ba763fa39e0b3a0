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

// Two-phase training: behavioral cloning from logged demonstrations, then
// fine-tuning inside the simulator.

#ifndef RIDESIM_TRAINING_HPP_
#define RIDESIM_TRAINING_HPP_

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ridesim/agent.hpp"
#include "ridesim/common.hpp"
#include "ridesim/observation.hpp"
#include "ridesim/sim.hpp"

namespace ridesim {

struct BcConfig {
  int iterations = 150;
  std::size_t buffer_trajectories = 1000;
  std::size_t batch_size = 64;
  double eval_fraction = 0.1;
  // Mini-batches per iteration; 0 means buffer transitions / batch size.
  std::size_t batches_per_iteration = 0;
  // Imitation margin as a fraction of the value support width, and its
  // weight relative to the distributional loss.
  double margin_fraction = 0.05;
  double margin_weight = 1.0;

  void validate() const {
    if (iterations < 0) throw ValidationError("bc.iterations must be >= 0");
    if (buffer_trajectories == 0) throw ValidationError("bc.buffer_trajectories must be > 0");
    if (batch_size == 0) throw ValidationError("bc.batch_size must be > 0");
    if (!(eval_fraction > 0.0 && eval_fraction < 1.0)) {
      throw ValidationError("bc.eval_fraction must be in (0, 1)");
    }
    if (!(margin_fraction >= 0.0) || !(margin_weight >= 0.0)) {
      throw ValidationError("bc margin settings must be >= 0");
    }
  }
};

struct RlConfig {
  int iterations = 50;
  double epsilon = 0.05;
  int patience = 5;
  std::size_t batch_size = 64;
  // Passes over each iteration's fresh transitions.
  double sweeps = 1.0;
  std::size_t buffer_trajectories = 1000;
  // Overrides the agent's Adam learning rate when set.
  std::optional<double> learning_rate = 1e-4;
  // Allows training an agent that was never cloned.
  bool cold_start = false;

  void validate() const {
    if (iterations < 1) throw ValidationError("rl.iterations must be > 0");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ValidationError("rl.epsilon must be in [0, 1]");
    if (patience < 1) throw ValidationError("rl.patience must be >= 1");
    if (batch_size == 0) throw ValidationError("rl.batch_size must be > 0");
    if (!(sweeps >= 0.0)) throw ValidationError("rl.sweeps must be >= 0");
    if (buffer_trajectories == 0) throw ValidationError("rl.buffer_trajectories must be > 0");
    if (learning_rate && !(*learning_rate >= 0.0)) {
      throw ValidationError("rl.learning_rate must be >= 0");
    }
  }
};

struct IterationRecord {
  int iteration = 0;
  double loss = 0.0;
  // Held-out agreement for cloning, mean driver reward for fine-tuning.
  double metric = 0.0;
  double acceptance = 0.0;
};

struct TrainReport {
  std::string phase;
  std::string metric_name;
  std::vector<IterationRecord> iterations;
  std::string stop_reason;
  int best_iteration = -1;
  double best_metric = 0.0;
  // Not written to artifacts so reruns stay byte-identical.
  double wall_seconds = 0.0;
};

inline void write_train_report(std::ostream& os, const TrainReport& report) {
  os << "iteration,loss," << report.metric_name << ",acceptance\n";
  for (const auto& it : report.iterations) {
    os << it.iteration << ',' << format_real(it.loss) << ',' << format_real(it.metric) << ','
       << format_real(it.acceptance) << '\n';
  }
  os << "# summary phase=" << report.phase << " iterations=" << report.iterations.size()
     << " stop=" << report.stop_reason << " best_iteration=" << report.best_iteration
     << " best_" << report.metric_name << '=' << format_real(report.best_metric) << '\n';
}

// Fraction of transitions whose greedy action matches the logged one.
inline double action_agreement(const CategoricalQAgent& agent,
                               std::span<const Transition> transitions) {
  if (transitions.empty()) return 0.0;
  std::size_t same = 0;
  for (const auto& t : transitions) same += greedy_action(expected_q(agent, t.s)) == t.a;
  return static_cast<double>(same) / static_cast<double>(transitions.size());
}

inline double accept_fraction(std::span<const Transition> transitions) {
  if (transitions.empty()) return 0.0;
  std::size_t n = 0;
  for (const auto& t : transitions) n += t.a == Action::kAccept;
  return static_cast<double>(n) / static_cast<double>(transitions.size());
}

// Demonstrations split into a training part (still whole trajectories,
// minus held-out steps) and a held-out transition set.
struct DemonstrationSplit {
  std::vector<Trajectory> train;
  std::vector<Transition> held_out;
};

inline DemonstrationSplit split_demonstrations(std::span<const Trajectory> demos,
                                               double eval_fraction, Rng& rng) {
  DemonstrationSplit out;
  for (const auto& traj : demos) {
    Trajectory kept;
    kept.driver_id = traj.driver_id;
    for (const auto& t : traj.steps) {
      if (rng.uniform() < eval_fraction) {
        out.held_out.push_back(t);
      } else {
        kept.steps.push_back(t);
      }
    }
    if (!kept.steps.empty()) out.train.push_back(std::move(kept));
  }
  return out;
}

// Cloning: offline distributional Q-learning on demonstration transitions
// plus a large-margin term toward the logged action. Touches no simulator.
// On return `held_out`, if given, holds the evaluation transitions.
inline TrainReport train_bc(CategoricalQAgent& agent, std::span<const Trajectory> demonstrations,
                            const BcConfig& config, Rng& rng,
                            std::vector<Transition>* held_out = nullptr) {
  config.validate();
  std::size_t total = 0;
  for (const auto& t : demonstrations) total += t.steps.size();
  if (total == 0) throw ValidationError("train_bc needs non-empty demonstrations");

  const auto start = std::chrono::steady_clock::now();
  auto split = split_demonstrations(demonstrations, config.eval_fraction, rng);
  ReplayBuffer buffer(config.buffer_trajectories);
  for (const auto& t : split.train) buffer.push(t.steps);
  if (buffer.size() == 0) throw ValidationError("no demonstration transitions left for training");
  const std::size_t batches = config.batches_per_iteration > 0
                                  ? config.batches_per_iteration
                                  : std::max<std::size_t>(1, buffer.size() / config.batch_size);
  const double width = agent.config.v_max - agent.config.v_min;
  TrainStepOptions options;
  options.margin = config.margin_fraction * width;
  options.margin_weight = config.margin_weight / width;

  TrainReport report;
  report.phase = "bc";
  report.metric_name = "agreement";
  report.stop_reason = "completed";
  for (int it = 0; it < config.iterations; ++it) {
    double loss = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      const auto batch = buffer.sample(config.batch_size, rng);
      loss += train_step(agent, batch, options);
    }
    IterationRecord rec;
    rec.iteration = it + 1;
    rec.loss = loss / static_cast<double>(batches);
    const std::span<const Transition> eval(split.held_out);
    rec.metric = action_agreement(agent, eval);
    std::size_t accepted = 0;
    for (const auto& t : eval) {
      accepted += greedy_action(expected_q(agent, t.s)) == Action::kAccept;
    }
    rec.acceptance =
        eval.empty() ? 0.0 : static_cast<double>(accepted) / static_cast<double>(eval.size());
    report.iterations.push_back(rec);
    if (report.best_iteration < 0 || rec.metric > report.best_metric) {
      report.best_iteration = rec.iteration;
      report.best_metric = rec.metric;
    }
  }
  if (held_out) *held_out = std::move(split.held_out);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

// Mean driver reward of the greedy policy on one episode drawn from a fixed
// seed; a deterministic function of the agent.
inline double greedy_episode_reward(const CategoricalQAgent& agent, const SimConfig& sim,
                                    std::uint64_t seed) {
  AgentPolicy policy{&agent, 0.0};
  Rng rng(seed);
  return run_episode(sim, policy, rng).mean_driver_reward();
}

// Fine-tuning: each iteration collects one full episode with an
// epsilon-greedy policy, appends its trajectories to a fresh buffer and
// runs `sweeps` passes of train_step over that episode's volume. The
// monitored metric is the greedy mean driver reward on a fixed-seed episode,
// starting from the incoming agent; training stops once it has not improved
// for `patience` iterations and the agent is left at its best snapshot.
inline TrainReport train_rl(CategoricalQAgent& agent, const SimConfig& sim,
                            const RlConfig& config, Rng& rng, bool warm_started) {
  config.validate();
  sim.validate();
  if (!warm_started && !config.cold_start) {
    throw ValidationError("train_rl needs a cloned agent or rl.cold_start = true");
  }
  if (config.learning_rate) agent.adam.config.learning_rate = *config.learning_rate;

  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t eval_seed = rng.next_u64();
  ReplayBuffer buffer(config.buffer_trajectories);
  TrainReport report;
  report.phase = "rl";
  report.metric_name = "mean_driver_reward";
  report.stop_reason = "completed";
  report.best_iteration = 0;
  report.best_metric = greedy_episode_reward(agent, sim, eval_seed);
  CategoricalQAgent best = agent;
  int since_best = 0;

  for (int it = 0; it < config.iterations; ++it) {
    AgentPolicy policy{&agent, config.epsilon};
    const EpisodeLog log = run_episode(sim, policy, rng);
    for (const auto& traj : log.trajectories()) buffer.push(traj.steps);

    IterationRecord rec;
    rec.iteration = it + 1;
    rec.acceptance = log.acceptance_rate();
    const auto steps = static_cast<std::size_t>(
        std::ceil(config.sweeps * static_cast<double>(log.offers.size()) /
                  static_cast<double>(config.batch_size)));
    double loss = 0.0;
    if (buffer.size() > 0) {
      for (std::size_t b = 0; b < steps; ++b) {
        loss += train_step(agent, buffer.sample(config.batch_size, rng));
      }
    }
    rec.loss = steps > 0 ? loss / static_cast<double>(steps) : 0.0;
    rec.metric = greedy_episode_reward(agent, sim, eval_seed);
    report.iterations.push_back(rec);

    if (rec.metric > report.best_metric) {
      best = agent;
      report.best_metric = rec.metric;
      report.best_iteration = rec.iteration;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      report.stop_reason = "early_stop";
      break;
    }
  }
  // Keep the optimizer moments of the final agent; only weights revert.
  best.adam = agent.adam;
  agent = std::move(best);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

// Greedy decisions of `agent` on a fixed offer set; rewards are recomputed
// for the new actions.
inline std::vector<Offer> relabel_offers(const CategoricalQAgent& agent,
                                         std::span<const Offer> offers,
                                         const PlatformParams& params) {
  std::vector<Offer> out(offers.begin(), offers.end());
  for (auto& o : out) {
    o.action = greedy_action(expected_q(agent, o.obs));
    o.reward = compute_reward(params, o.inputs, o.action);
  }
  return out;
}

}  // namespace ridesim

#endif  // RIDESIM_TRAINING_HPP_
