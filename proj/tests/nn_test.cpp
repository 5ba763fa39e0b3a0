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
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "ridesim/nn.hpp"

namespace ridesim::nn {
namespace {

std::vector<double> random_vector(std::size_t n, Rng& rng, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-scale, scale);
  return v;
}

std::vector<double> random_distribution(std::size_t n, Rng& rng) {
  std::vector<double> p(n);
  double s = 0.0;
  for (auto& x : p) s += (x = rng.uniform());
  for (auto& x : p) x /= s;
  return p;
}

// Reference cross-entropy computed from scratch for the finite-difference
// oracle.
double ce_oracle(const Mlp& net, const std::vector<double>& input,
                 const std::vector<double>& target, std::size_t action) {
  const auto logits = forward(net, input);
  const std::size_t n = target.size();
  double mx = -1e300;
  for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, logits[action * n + i]);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) z += std::exp(logits[action * n + i] - mx);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    loss -= target[i] * (logits[action * n + i] - mx - std::log(z));
  }
  return loss;
}

TEST(Forward, ZeroNetworkGivesZeroLogits) {
  const Mlp net = zero_mlp({6, 8, 4});
  for (double v : forward(net, std::vector<double>{1, 2, 3, 4, 5, 6})) EXPECT_EQ(v, 0.0);
}

TEST(Forward, IdentityLayerCopiesTheInput) {
  Mlp net = zero_mlp({3, 3});
  for (std::size_t i = 0; i < 3; ++i) net.layers[0].w[i * 3 + i] = 1.0;
  const std::vector<double> x = {-1.5, 0.25, 7.0};
  EXPECT_EQ(forward(net, x), x);
}

TEST(Forward, HandComputedTwoTwoTwo) {
  Mlp net = zero_mlp({2, 2, 2});
  net.layers[0].w = {1.0, -2.0, 0.5, 0.25};
  net.layers[0].b = {0.1, -0.2};
  net.layers[1].w = {2.0, -1.0, 0.0, 3.0};
  net.layers[1].b = {0.5, -0.5};
  // Input (1, 0.5): hidden pre-activations 1 - 1 + 0.1 = 0.1 and
  // 0.5 + 0.125 - 0.2 = 0.425; outputs 0.2 - 0.425 + 0.5 and 1.275 - 0.5.
  const auto y = forward(net, std::vector<double>{1.0, 0.5});
  EXPECT_NEAR(y[0], 0.275, 1e-12);
  EXPECT_NEAR(y[1], 0.775, 1e-12);
  // A negative pre-activation is clipped by the ReLU.
  const auto z = forward(net, std::vector<double>{-1.0, 0.0});
  // Hidden: (-1 + 0.1) -> 0, (-0.5 - 0.2) -> 0.
  EXPECT_NEAR(z[0], 0.5, 1e-12);
  EXPECT_NEAR(z[1], -0.5, 1e-12);
}

TEST(Forward, DeterministicAndPure) {
  Rng rng(3);
  const Mlp net = make_mlp({6, 32, 32, 102}, rng);
  std::ostringstream before;
  write_mlp(before, net);
  const auto x = random_vector(6, rng);
  const auto a = forward(net, x);
  const auto b = forward(net, x);
  EXPECT_EQ(a, b);
  std::ostringstream after;
  write_mlp(after, net);
  EXPECT_EQ(before.str(), after.str());
}

TEST(Forward, WrongInputSizeIsAnError) {
  const Mlp net = zero_mlp({3, 2});
  EXPECT_THROW(forward(net, std::vector<double>{1, 2}), ValidationError);
}

TEST(LossAndGrad, SoftmaxTargetHasZeroLogitGradient) {
  Rng rng(5);
  const Mlp net = make_mlp({4, 8, 10}, rng);
  const auto x = random_vector(4, rng);
  const auto logits = forward(net, x);
  const auto target = softmax(std::span<const double>(logits).subspan(5, 5));
  const auto out = loss_and_grad(net, x, target, 1);
  // The output layer's bias gradient is the logit gradient itself.
  for (double g : out.grads.back().b) EXPECT_NEAR(g, 0.0, 1e-12);
}

TEST(LossAndGrad, OneHotOnArgmaxIsMinusLogMaxProbability) {
  Rng rng(6);
  const Mlp net = make_mlp({4, 8, 10}, rng);
  const auto x = random_vector(4, rng);
  const auto logits = forward(net, x);
  const auto probs = softmax(std::span<const double>(logits).subspan(0, 5));
  const auto best = static_cast<std::size_t>(
      std::max_element(probs.begin(), probs.end()) - probs.begin());
  std::vector<double> target(5, 0.0);
  target[best] = 1.0;
  EXPECT_NEAR(loss_and_grad(net, x, target, 0).loss, -std::log(probs[best]), 1e-12);
}

TEST(LossAndGrad, TargetMustBeADistribution) {
  Rng rng(7);
  const Mlp net = make_mlp({2, 4}, rng);
  EXPECT_THROW(loss_and_grad(net, std::vector<double>{0, 1}, std::vector<double>{0.7, 0.7}, 0),
               ValidationError);
  EXPECT_THROW(loss_and_grad(net, std::vector<double>{0, 1}, std::vector<double>{0.3, 0.3, 0.4},
                             0),
               ValidationError);
}

// Central differences on every parameter of a 6-32-32-102 network.
TEST(LossAndGrad, MatchesFiniteDifferencesOnTwentySeeds) {
  const double h = 1e-5;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    Mlp net = make_mlp({6, 32, 32, 102}, rng);
    const auto x = random_vector(6, rng);
    const auto target = random_distribution(51, rng);
    const std::size_t action = seed % 2;
    const auto analytic = loss_and_grad(net, x, target, action);
    EXPECT_NEAR(analytic.loss, ce_oracle(net, x, target, action), 1e-10);

    double worst = 0.0;
    auto check = [&](std::vector<double>& params, const std::vector<double>& grads) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        const double keep = params[i];
        params[i] = keep + h;
        const double up = ce_oracle(net, x, target, action);
        params[i] = keep - h;
        const double down = ce_oracle(net, x, target, action);
        params[i] = keep;
        const double numeric = (up - down) / (2 * h);
        const double scale = std::max(std::abs(numeric), std::abs(grads[i]));
        // Gradients this small are compared in absolute terms.
        const double err = scale > 1e-4 ? std::abs(numeric - grads[i]) / scale
                                         : std::abs(numeric - grads[i]) * 1e4;
        worst = std::max(worst, err);
      }
    };
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      check(net.layers[l].w, analytic.grads[l].w);
      check(net.layers[l].b, analytic.grads[l].b);
    }
    EXPECT_LT(worst, 1e-4) << "seed " << seed;
  }
}

TEST(Adam, ZeroGradientsLeaveParametersAndCountStep) {
  Rng rng(8);
  Mlp net = make_mlp({3, 4, 2}, rng);
  const Mlp before = net;
  auto state = make_adam(net);
  adam_step(net, zero_gradients(net), state);
  EXPECT_EQ(state.step, 1);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    EXPECT_EQ(net.layers[l].w, before.layers[l].w);
    EXPECT_EQ(net.layers[l].b, before.layers[l].b);
  }
}

TEST(Adam, TwoStepsOfAScalarByHand) {
  Mlp net = zero_mlp({1, 1});
  net.layers[0].w = {1.0};
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  auto state = make_adam(net, cfg);
  auto grads = zero_gradients(net);

  // Step 1, g = 0.5: m = 0.05, v = 0.00025, mhat = 0.5, vhat = 0.25.
  grads[0].w = {0.5};
  adam_step(net, grads, state);
  const double w1 = 1.0 - 0.1 * 0.5 / (0.5 + 1e-8);
  EXPECT_NEAR(net.layers[0].w[0], w1, 1e-10);

  // Step 2, g = -1: m = 0.045 - 0.1 = -0.055, v = 0.00024975 + 0.001.
  grads[0].w = {-1.0};
  adam_step(net, grads, state);
  const double m = 0.9 * 0.05 + 0.1 * -1.0;
  const double v = 0.999 * 0.00025 + 0.001 * 1.0;
  const double mhat = m / (1 - 0.81);
  const double vhat = v / (1 - 0.999 * 0.999);
  EXPECT_NEAR(net.layers[0].w[0], w1 - 0.1 * mhat / (std::sqrt(vhat) + 1e-8), 1e-10);
  EXPECT_EQ(net.layers[0].b[0], 0.0);
}

TEST(Adam, QuadraticLossFallsAfterWarmup) {
  // Minimise (w - 3)^2 from w = 0.
  Mlp net = zero_mlp({1, 1});
  AdamConfig cfg;
  cfg.learning_rate = 0.05;
  auto state = make_adam(net, cfg);
  auto grads = zero_gradients(net);
  double prev = 9.0;
  for (int step = 0; step < 40; ++step) {
    grads[0].w = {2.0 * (net.layers[0].w[0] - 3.0)};
    adam_step(net, grads, state);
    const double loss = (net.layers[0].w[0] - 3.0) * (net.layers[0].w[0] - 3.0);
    EXPECT_LT(loss, prev) << step;
    prev = loss;
  }
}

TEST(Adam, NonFiniteGradientLeavesStateUntouched) {
  Mlp net = zero_mlp({1, 1});
  auto state = make_adam(net);
  auto grads = zero_gradients(net);
  grads[0].b = {std::nan("")};
  EXPECT_THROW(adam_step(net, grads, state), std::runtime_error);
  EXPECT_EQ(state.step, 0);
}

TEST(Training, LinearlySeparableToySetIsLearned) {
  // Two-class softmax head on one 2-atom block: label 0 when the weighted
  // feature sum is positive.
  Rng rng(10);
  const std::vector<double> w = {1.0, -2.0, 0.5, 1.5, -1.0, 0.75};
  std::vector<std::vector<double>> xs;
  std::vector<int> ys;
  while (xs.size() < 400) {
    auto x = random_vector(6, rng);
    double s = 0.0;
    for (std::size_t i = 0; i < 6; ++i) s += w[i] * x[i];
    if (std::abs(s) < 0.2) continue;
    xs.push_back(x);
    ys.push_back(s > 0 ? 0 : 1);
  }
  Mlp net = make_mlp({6, 16, 2}, rng);
  AdamConfig cfg;
  cfg.learning_rate = 0.01;
  auto state = make_adam(net, cfg);
  for (int step = 0; step < 500; ++step) {
    auto grads = zero_gradients(net);
    for (int b = 0; b < 32; ++b) {
      const auto k = rng.below(xs.size());
      const std::vector<double> target = ys[k] == 0 ? std::vector<double>{1, 0}
                                                     : std::vector<double>{0, 1};
      const auto g = loss_and_grad(net, xs[k], target, 0);
      for (std::size_t l = 0; l < grads.size(); ++l) {
        for (std::size_t i = 0; i < grads[l].w.size(); ++i) grads[l].w[i] += g.grads[l].w[i] / 32;
        for (std::size_t i = 0; i < grads[l].b.size(); ++i) grads[l].b[i] += g.grads[l].b[i] / 32;
      }
    }
    adam_step(net, grads, state);
  }
  std::size_t right = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const auto y = forward(net, xs[k]);
    right += (y[0] > y[1] ? 0 : 1) == ys[k];
  }
  EXPECT_GE(static_cast<double>(right) / static_cast<double>(xs.size()), 0.99);
}

TEST(Checkpoint, WriteReadRoundTripsExactly) {
  Rng rng(11);
  const Mlp net = make_mlp({6, 5, 4}, rng);
  std::stringstream io;
  write_mlp(io, net);
  const Mlp back = read_mlp(io);
  ASSERT_EQ(back.dims, net.dims);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    EXPECT_EQ(back.layers[l].w, net.layers[l].w);
    EXPECT_EQ(back.layers[l].b, net.layers[l].b);
  }
}

}  // namespace
}  // namespace ridesim::nn
