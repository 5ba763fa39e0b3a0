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

// Categorical (distributional) deep-Q driver agent. Each action's return is
// a distribution over a fixed support of atoms; the scalar Q value is its
// expectation.

#ifndef RIDESIM_AGENT_HPP_
#define RIDESIM_AGENT_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ridesim/common.hpp"
#include "ridesim/distributions.hpp"
#include "ridesim/nn.hpp"
#include "ridesim/observation.hpp"

namespace ridesim {

struct AgentConfig {
  std::vector<std::size_t> hidden = {64, 64};
  std::size_t atoms = 51;
  double v_min = -100.0;
  double v_max = 100.0;
  double gamma = 0.9;
  double epsilon = 0.05;
  int sync_interval = 100;
  ObservationScale scale;
  nn::AdamConfig adam;

  void validate() const {
    if (atoms < 2) throw ValidationError("need at least 2 atoms");
    if (!(v_min < v_max)) throw ValidationError("v_min must be < v_max");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ValidationError("gamma must lie in [0, 1)");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
      throw ValidationError("epsilon must lie in [0, 1]");
    }
    if (sync_interval < 1) throw ValidationError("sync_interval must be >= 1");
    scale.validate();
  }
};

inline std::vector<double> make_support(double v_min, double v_max, std::size_t n) {
  std::vector<double> z(n);
  const double dz = (v_max - v_min) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) z[i] = v_min + static_cast<double>(i) * dz;
  z.back() = v_max;
  return z;
}

// Value support from the 1st/99th reward percentiles, widened by the
// discounted-return horizon 1/(1 - gamma) and always containing 0.
inline std::pair<double, double> support_from_rewards(std::span<const double> rewards,
                                                      double gamma) {
  if (rewards.size() < 2) return {-1.0, 1.0};
  const auto dist = fit_empirical({rewards.begin(), rewards.end()});
  const double horizon = 1.0 / (1.0 - gamma);
  double lo = std::min(0.0, dist.quantile(0.01)) * horizon;
  double hi = std::max(0.0, dist.quantile(0.99)) * horizon;
  if (hi - lo < 1e-6) {
    lo -= 1.0;
    hi += 1.0;
  }
  return {lo, hi};
}

struct CategoricalQAgent {
  AgentConfig config;
  std::vector<double> atoms;
  nn::Mlp online;
  nn::Mlp target;
  nn::AdamState adam;
  std::int64_t train_steps = 0;

  std::size_t num_atoms() const { return atoms.size(); }
};

inline CategoricalQAgent make_agent(const AgentConfig& config, Rng& rng) {
  config.validate();
  std::vector<std::size_t> dims{kNumFeatures};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(kNumActions * config.atoms);
  CategoricalQAgent agent;
  agent.config = config;
  agent.atoms = make_support(config.v_min, config.v_max, config.atoms);
  agent.online = nn::make_mlp(dims, rng);
  agent.target = agent.online;
  agent.adam = nn::make_adam(agent.online, config.adam);
  return agent;
}

// Per-action atom probabilities of `net` at `obs`.
inline std::array<std::vector<double>, kNumActions> action_distributions(
    const nn::Mlp& net, const ObservationVector& obs, std::size_t atoms) {
  const auto logits = nn::forward(net, obs);
  std::array<std::vector<double>, kNumActions> out;
  for (std::size_t a = 0; a < kNumActions; ++a) {
    out[a] = nn::softmax(std::span<const double>(logits).subspan(a * atoms, atoms));
  }
  return out;
}

inline double expectation(std::span<const double> probs, std::span<const double> atoms) {
  double q = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) q += probs[i] * atoms[i];
  return q;
}

inline std::array<double, kNumActions> expected_q(const nn::Mlp& net,
                                                  std::span<const double> atoms,
                                                  const ObservationVector& obs) {
  const auto dists = action_distributions(net, obs, atoms.size());
  return {expectation(dists[0], atoms), expectation(dists[1], atoms)};
}

inline std::array<double, kNumActions> expected_q(const CategoricalQAgent& agent,
                                                  const ObservationVector& obs) {
  return expected_q(agent.online, agent.atoms, obs);
}

// Ties go to accept.
inline Action greedy_action(const std::array<double, kNumActions>& q) {
  return q[0] >= q[1] ? Action::kAccept : Action::kReject;
}

inline Action act(const CategoricalQAgent& agent, const ObservationVector& obs,
                  Rng& rng, double epsilon) {
  if (epsilon > 0.0 && rng.uniform() < epsilon) {
    return rng.below(2) == 0 ? Action::kAccept : Action::kReject;
  }
  return greedy_action(expected_q(agent, obs));
}

inline Action act(const CategoricalQAgent& agent, const ObservationVector& obs,
                  Rng& rng) {
  return act(agent, obs, rng, agent.config.epsilon);
}

// Adapts an agent to the simulator's policy interface.
struct AgentPolicy {
  const CategoricalQAgent* agent;
  double epsilon;

  Action operator()(const ObservationVector& obs, Rng& rng) const {
    return act(*agent, obs, rng, epsilon);
  }
};

// Distributional Bellman target: the mass of each atom z_i moves to
// r + gamma * z_i (clamped to the support) and is split linearly between
// the two bracketing atoms.
inline std::vector<double> project_target(std::span<const double> probs, double r,
                                          double gamma,
                                          std::span<const double> atoms) {
  const std::size_t n = atoms.size();
  if (probs.size() != n || n < 2) {
    throw ValidationError("distribution and support sizes differ");
  }
  double mass = 0.0;
  for (double p : probs) mass += p;
  if (std::abs(mass - 1.0) > 1e-6) {
    throw ValidationError(fmt::format("distribution sums to {}, not 1", mass));
  }
  const double v_min = atoms.front();
  const double v_max = atoms.back();
  const double dz = (v_max - v_min) / static_cast<double>(n - 1);
  std::vector<double> m(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (probs[j] == 0.0) continue;
    const double tz = std::clamp(r + gamma * atoms[j], v_min, v_max);
    const double b = std::clamp((tz - v_min) / dz, 0.0, static_cast<double>(n - 1));
    const auto l = static_cast<std::size_t>(std::floor(b));
    const auto u = static_cast<std::size_t>(std::ceil(b));
    if (l == u) {
      m[l] += probs[j];
    } else {
      m[l] += probs[j] * (static_cast<double>(u) - b);
      m[u] += probs[j] * (b - static_cast<double>(l));
    }
  }
  return m;
}

// Q(s,a) := Q(s,a) + alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)).
inline double tabular_q_update(double q, double r, double max_next_q, double alpha,
                               double gamma) {
  return q + alpha * (r + gamma * max_next_q - q);
}

inline void sync_target(CategoricalQAgent& agent) { agent.target = agent.online; }

struct TrainStepOptions {
  // Large-margin imitation term: pushes Q of the logged action above every
  // other action by `margin`. Zero weight disables it.
  double margin = 0.0;
  double margin_weight = 0.0;
};

// One Adam step on the online network: cross-entropy between the online
// distribution of the taken action and the projected target-network
// distribution of the greedy next action. Terminal steps use gamma = 0.
// Returns the batch mean loss; a non-finite loss throws before any update.
inline double train_step(CategoricalQAgent& agent, std::span<const Transition> batch,
                         const TrainStepOptions& options = {}) {
  if (batch.empty()) throw ValidationError("train_step needs a non-empty batch");
  const std::size_t n = agent.num_atoms();
  const std::span<const double> atoms(agent.atoms);
  auto grads = nn::zero_gradients(agent.online);
  nn::ForwardCache cache;
  nn::ForwardCache target_cache;
  std::vector<double> dlogits(kNumActions * n);
  std::array<std::vector<double>, kNumActions> probs;
  for (auto& p : probs) p.resize(n);
  std::vector<double> next(n);
  double total = 0.0;

  for (const auto& t : batch) {
    std::vector<double> target_dist;
    if (t.terminal) {
      // With gamma = 0 every source atom lands on r.
      std::vector<double> point(n, 0.0);
      point[0] = 1.0;
      target_dist = project_target(point, t.r, 0.0, atoms);
    } else {
      const auto tl = nn::forward(agent.target, t.s_prime, target_cache);
      std::array<double, kNumActions> q_next{};
      std::array<std::vector<double>, kNumActions> next_probs;
      for (std::size_t a = 0; a < kNumActions; ++a) {
        next_probs[a] = nn::softmax(tl.subspan(a * n, n));
        q_next[a] = expectation(next_probs[a], atoms);
      }
      const auto best = static_cast<std::size_t>(greedy_action(q_next));
      target_dist = project_target(next_probs[best], t.r, agent.config.gamma, atoms);
    }

    const auto logits = nn::forward(agent.online, t.s, cache);
    const auto a = static_cast<std::size_t>(t.a);
    std::fill(dlogits.begin(), dlogits.end(), 0.0);
    for (std::size_t b = 0; b < kNumActions; ++b) {
      nn::softmax(logits.subspan(b * n, n), probs[b]);
    }
    const auto block = logits.subspan(a * n, n);
    const double mx = *std::max_element(block.begin(), block.end());
    double z = 0.0;
    for (double v : block) z += std::exp(v - mx);
    const double log_z = mx + std::log(z);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (target_dist[i] > 0.0) loss -= target_dist[i] * (block[i] - log_z);
      dlogits[a * n + i] = probs[a][i] - target_dist[i];
    }

    if (options.margin_weight > 0.0) {
      std::array<double, kNumActions> q{};
      for (std::size_t b = 0; b < kNumActions; ++b) q[b] = expectation(probs[b], atoms);
      std::size_t worst = a;
      double best_value = q[a];
      for (std::size_t b = 0; b < kNumActions; ++b) {
        const double v = q[b] + (b == a ? 0.0 : options.margin);
        if (v > best_value) {
          best_value = v;
          worst = b;
        }
      }
      if (worst != a) {
        loss += options.margin_weight * (best_value - q[a]);
        // dQ_b / dlogit_{b,i} = p_{b,i} (z_i - Q_b)
        for (std::size_t i = 0; i < n; ++i) {
          dlogits[worst * n + i] +=
              options.margin_weight * probs[worst][i] * (atoms[i] - q[worst]);
          dlogits[a * n + i] -= options.margin_weight * probs[a][i] * (atoms[i] - q[a]);
        }
      }
    }

    total += loss;
    nn::backward(agent.online, cache, dlogits, grads);
  }

  const double mean = total / static_cast<double>(batch.size());
  if (!std::isfinite(mean)) throw std::runtime_error("non-finite training loss");
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto& l : grads) {
    for (auto& g : l.w) g *= inv;
    for (auto& g : l.b) g *= inv;
  }
  nn::adam_step(agent.online, grads, agent.adam);
  ++agent.train_steps;
  if (agent.train_steps % agent.config.sync_interval == 0) sync_target(agent);
  return mean;
}

// FIFO of whole trajectories, bounded by a trajectory count. Sampling is
// uniform over the stored transitions.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity_trajectories)
      : capacity_(capacity_trajectories) {
    if (capacity_ == 0) throw ValidationError("replay capacity must be positive");
  }

  void push(std::span<const Transition> trajectory) {
    if (trajectory.empty()) return;
    items_.insert(items_.end(), trajectory.begin(), trajectory.end());
    lengths_.push_back(trajectory.size());
    while (lengths_.size() > capacity_) {
      items_.erase(items_.begin(),
                   items_.begin() + static_cast<std::ptrdiff_t>(lengths_.front()));
      lengths_.pop_front();
    }
  }

  std::size_t size() const { return items_.size(); }
  std::size_t trajectories() const { return lengths_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t i) const { return items_[i]; }

  std::vector<Transition> sample(std::size_t batch, Rng& rng) const {
    if (items_.empty()) throw ValidationError("cannot sample an empty replay buffer");
    std::vector<Transition> out;
    out.reserve(batch);
    for (std::size_t k = 0; k < batch; ++k) out.push_back(items_[rng.below(items_.size())]);
    return out;
  }

 private:
  std::size_t capacity_;
  std::deque<Transition> items_;
  std::deque<std::size_t> lengths_;
};

// Agent checkpoint: metadata block, then the online and target networks.
inline void write_agent(std::ostream& os, const CategoricalQAgent& agent) {
  const auto& c = agent.config;
  os << "ridesim-agent v1\n";
  os << "atoms " << c.atoms << '\n';
  os << "v_min " << format_real(c.v_min) << '\n';
  os << "v_max " << format_real(c.v_max) << '\n';
  os << "gamma " << format_real(c.gamma) << '\n';
  os << "epsilon " << format_real(c.epsilon) << '\n';
  os << "sync_interval " << c.sync_interval << '\n';
  os << "learning_rate " << format_real(c.adam.learning_rate) << '\n';
  os << "scale_pickup_km " << format_real(c.scale.pickup_km) << '\n';
  os << "scale_trip_km " << format_real(c.scale.trip_km) << '\n';
  os << "scale_trips_left " << format_real(c.scale.trips_left) << '\n';
  os << "scale_idle_minutes " << format_real(c.scale.idle_minutes) << '\n';
  os << "train_steps " << agent.train_steps << '\n';
  os << "online\n";
  nn::write_mlp(os, agent.online);
  os << "target\n";
  nn::write_mlp(os, agent.target);
}

inline CategoricalQAgent read_agent(std::istream& is) {
  std::string line;
  while (std::getline(is, line) && !line.empty() && line[0] == '#') {
  }
  if (trim(line) != "ridesim-agent v1") throw ValidationError("not an agent checkpoint");
  std::map<std::string, double> meta;
  while (std::getline(is, line) && trim(line) != "online") {
    const auto cells = split(trim(line), ' ');
    const auto v = cells.size() == 2 ? parse_real(cells[1]) : std::nullopt;
    if (!v) throw ValidationError(fmt::format("bad agent metadata '{}'", line));
    meta[cells[0]] = *v;
  }
  auto get = [&](const char* key) {
    const auto it = meta.find(key);
    if (it == meta.end()) throw ValidationError(fmt::format("agent checkpoint lacks {}", key));
    return it->second;
  };
  CategoricalQAgent agent;
  auto& c = agent.config;
  c.atoms = static_cast<std::size_t>(get("atoms"));
  c.v_min = get("v_min");
  c.v_max = get("v_max");
  c.gamma = get("gamma");
  c.epsilon = get("epsilon");
  c.sync_interval = static_cast<int>(get("sync_interval"));
  c.adam.learning_rate = get("learning_rate");
  c.scale.pickup_km = get("scale_pickup_km");
  c.scale.trip_km = get("scale_trip_km");
  c.scale.trips_left = get("scale_trips_left");
  c.scale.idle_minutes = get("scale_idle_minutes");
  agent.train_steps = static_cast<std::int64_t>(get("train_steps"));
  agent.online = nn::read_mlp(is);
  if (!std::getline(is, line) || trim(line) != "target") {
    throw ValidationError("agent checkpoint lacks the target network");
  }
  agent.target = nn::read_mlp(is);
  c.hidden.assign(agent.online.dims.begin() + 1, agent.online.dims.end() - 1);
  c.validate();
  agent.atoms = make_support(c.v_min, c.v_max, c.atoms);
  if (agent.online.output_size() != kNumActions * c.atoms ||
      agent.online.input_size() != kNumFeatures || !(agent.online.dims == agent.target.dims)) {
    throw ValidationError("agent checkpoint network shapes are inconsistent");
  }
  agent.adam = nn::make_adam(agent.online, c.adam);
  return agent;
}

}  // namespace ridesim

#endif  // RIDESIM_AGENT_HPP_
