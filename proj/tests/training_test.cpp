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

#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ridesim/synthetic.hpp"
#include "ridesim/training.hpp"

namespace ridesim {
namespace {

ObservationVector random_obs(Rng& rng) {
  ObservationVector o;
  for (auto& x : o) x = rng.uniform();
  return o;
}

// Hand-built demonstrations; no simulator is involved anywhere.
std::vector<Trajectory> demonstrations(Action (*label)(const ObservationVector&), int drivers,
                                       int steps, Rng& rng) {
  std::vector<Trajectory> out;
  for (int d = 0; d < drivers; ++d) {
    Trajectory t;
    t.driver_id = "D" + std::to_string(d);
    for (int k = 0; k < steps; ++k) {
      Transition tr;
      tr.s = random_obs(rng);
      tr.a = label(tr.s);
      tr.r = tr.a == Action::kAccept ? rng.uniform(0, 10) : 0.0;
      t.steps.push_back(tr);
    }
    for (int k = 0; k < steps; ++k) {
      auto& tr = t.steps[static_cast<std::size_t>(k)];
      tr.terminal = k + 1 == steps;
      tr.s_prime = tr.terminal ? tr.s : t.steps[static_cast<std::size_t>(k + 1)].s;
    }
    out.push_back(std::move(t));
  }
  return out;
}

AgentConfig small_agent() {
  AgentConfig c;
  c.hidden = {16, 16};
  c.v_min = -20;
  c.v_max = 100;
  return c;
}

TEST(TrainBc, ZeroIterationsLeaveTheAgentUnchanged) {
  Rng rng(1);
  auto agent = make_agent(small_agent(), rng);
  const auto before = agent;
  const auto demos =
      demonstrations([](const ObservationVector&) { return Action::kAccept; }, 5, 20, rng);
  BcConfig cfg;
  cfg.iterations = 0;
  const auto report = train_bc(agent, demos, cfg, rng);
  EXPECT_TRUE(report.iterations.empty());
  for (std::size_t l = 0; l < before.online.layers.size(); ++l) {
    EXPECT_EQ(agent.online.layers[l].w, before.online.layers[l].w);
    EXPECT_EQ(agent.online.layers[l].b, before.online.layers[l].b);
  }
}

TEST(TrainBc, AlwaysAcceptOracleIsRecovered) {
  Rng rng(2);
  auto agent = make_agent(small_agent(), rng);
  const auto demos =
      demonstrations([](const ObservationVector&) { return Action::kAccept; }, 20, 50, rng);
  BcConfig cfg;
  cfg.iterations = 10;
  cfg.batches_per_iteration = 20;
  std::vector<Transition> held_out;
  const auto report = train_bc(agent, demos, cfg, rng, &held_out);
  ASSERT_FALSE(held_out.empty());
  EXPECT_GE(action_agreement(agent, held_out), 0.99);
  EXPECT_EQ(report.iterations.back().metric, action_agreement(agent, held_out));
}

TEST(TrainBc, ThresholdOracleIsMostlyRecovered) {
  Rng rng(3);
  auto agent = make_agent(small_agent(), rng);
  const auto demos = demonstrations(
      [](const ObservationVector& s) {
        return s[kTripDistance] > 0.4 ? Action::kAccept : Action::kReject;
      },
      20, 100, rng);
  BcConfig cfg;
  cfg.iterations = 20;
  cfg.batches_per_iteration = 30;
  std::vector<Transition> held_out;
  train_bc(agent, demos, cfg, rng, &held_out);
  EXPECT_GE(action_agreement(agent, held_out), 0.9);
}

TEST(TrainBc, EmptyDemonstrationsAreAnError) {
  Rng rng(4);
  auto agent = make_agent(small_agent(), rng);
  EXPECT_THROW(train_bc(agent, std::vector<Trajectory>{}, BcConfig{}, rng), ValidationError);
}

TEST(SplitDemonstrations, HoldsOutRoughlyTheFraction) {
  Rng rng(5);
  const auto demos =
      demonstrations([](const ObservationVector&) { return Action::kReject; }, 10, 200, rng);
  const auto split = split_demonstrations(demos, 0.1, rng);
  std::size_t kept = 0;
  for (const auto& t : split.train) kept += t.steps.size();
  EXPECT_EQ(kept + split.held_out.size(), 2000u);
  EXPECT_NEAR(static_cast<double>(split.held_out.size()) / 2000.0, 0.1, 0.03);
}

SimConfig tiny_world(const PlatformParams& params) {
  SyntheticPolicySpec spec;
  spec.driver_count = 8;
  spec.weekly_rides = 700;
  spec.params = params;
  Rng rng(42);
  SimConfig sim = synthetic_world(spec, rng);
  sim.days = 1;
  return sim;
}

std::vector<Offer> fixed_offers(const CategoricalQAgent& agent, const SimConfig& sim) {
  AgentPolicy policy{&agent, 0.0};
  Rng rng(77);
  return run_episode(sim, policy, rng).offers;
}

TEST(TrainRl, ColdStartMustBeExplicit) {
  Rng rng(6);
  auto agent = make_agent(small_agent(), rng);
  const auto sim = tiny_world(PlatformParams{});
  EXPECT_THROW(train_rl(agent, sim, RlConfig{}, rng, false), ValidationError);
  RlConfig cfg;
  cfg.cold_start = true;
  cfg.iterations = 1;
  EXPECT_NO_THROW(train_rl(agent, sim, cfg, rng, false));
}

TEST(TrainRl, OneIterationCollectsOneEpisode) {
  Rng rng(7);
  auto agent = make_agent(small_agent(), rng);
  RlConfig cfg;
  cfg.iterations = 1;
  const auto report = train_rl(agent, tiny_world(PlatformParams{}), cfg, rng, true);
  ASSERT_EQ(report.iterations.size(), 1u);
  EXPECT_EQ(report.iterations[0].iteration, 1);
}

TEST(TrainRl, FrozenGreedyAgentKeepsItsDecisions) {
  Rng rng(8);
  auto agent = make_agent(small_agent(), rng);
  const auto sim = tiny_world(PlatformParams{});
  const auto offers = fixed_offers(agent, sim);
  const auto before = relabel_offers(agent, offers, sim.params);
  RlConfig cfg;
  cfg.iterations = 3;
  cfg.epsilon = 0.0;
  cfg.learning_rate = 0.0;
  train_rl(agent, sim, cfg, rng, true);
  const auto after = relabel_offers(agent, offers, sim.params);
  ASSERT_EQ(before.size(), after.size());
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(before[i].action, after[i].action);
}

TEST(TrainRl, TrivialEconomyStopsAtThePatienceBoundary) {
  // Every reward is zero, so the greedy episode reward never improves.
  PlatformParams params;
  params.w = params.x = params.y = params.z = 0.0;
  Rng rng(9);
  auto agent = make_agent(small_agent(), rng);
  RlConfig cfg;
  cfg.iterations = 20;
  cfg.epsilon = 0.0;
  cfg.patience = 3;
  const auto report = train_rl(agent, tiny_world(params), cfg, rng, true);
  EXPECT_EQ(report.stop_reason, "early_stop");
  EXPECT_EQ(report.iterations.size(), 3u);
  EXPECT_EQ(report.best_iteration, 0);
  EXPECT_EQ(report.best_metric, 0.0);
}

TEST(TrainRl, ReportsAreReproducible) {
  auto run = [] {
    Rng rng(10);
    auto agent = make_agent(small_agent(), rng);
    RlConfig cfg;
    cfg.iterations = 3;
    const auto report = train_rl(agent, tiny_world(PlatformParams{}), cfg, rng, true);
    std::ostringstream os;
    write_train_report(os, report);
    write_agent(os, agent);
    return os.str();
  };
  EXPECT_EQ(run(), run());
}

TEST(TrainRl, BestSnapshotIsKept) {
  Rng rng(11);
  auto agent = make_agent(small_agent(), rng);
  const auto sim = tiny_world(PlatformParams{});
  RlConfig cfg;
  cfg.iterations = 4;
  cfg.learning_rate = 1e-3;
  Rng train_rng(12);
  const auto report = train_rl(agent, sim, cfg, train_rng, true);
  // The incoming agent is iteration 0; the returned agent scores the best
  // metric on the same fixed-seed evaluation episode.
  Rng replay(12);
  const auto eval_seed = replay.next_u64();
  EXPECT_EQ(greedy_episode_reward(agent, sim, eval_seed), report.best_metric);
  for (const auto& it : report.iterations) EXPECT_LE(it.metric, report.best_metric);
}

TEST(RelabelOffers, RecomputesRewardsForNewActions) {
  Rng rng(13);
  auto agent = make_agent(small_agent(), rng);
  const auto sim = tiny_world(PlatformParams{});
  auto offers = fixed_offers(agent, sim);
  ASSERT_FALSE(offers.empty());
  for (auto& o : offers) {
    o.action = Action::kReject;
    o.reward = 0.0;
  }
  PlatformParams richer = sim.params;
  richer.fare_per_km *= 2;
  for (const auto& o : relabel_offers(agent, offers, richer)) {
    EXPECT_EQ(o.reward, compute_reward(richer, o.inputs, o.action));
  }
}

}  // namespace
}  // namespace ridesim
