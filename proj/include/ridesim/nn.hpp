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

// Small fully connected network with ReLU hidden layers, hand-written
// backpropagation and an Adam optimizer.

#ifndef RIDESIM_NN_HPP_
#define RIDESIM_NN_HPP_

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ridesim/common.hpp"

namespace ridesim::nn {

// Dense layer; weights are row-major out x in.
struct Layer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> w;
  std::vector<double> b;

  bool operator==(const Layer&) const = default;
};

struct Mlp {
  std::vector<std::size_t> dims;
  std::vector<Layer> layers;

  std::size_t input_size() const { return dims.front(); }
  std::size_t output_size() const { return dims.back(); }

  bool operator==(const Mlp&) const = default;
};

// Same shape as an Mlp's parameters.
using Gradients = std::vector<Layer>;

inline Mlp zero_mlp(const std::vector<std::size_t>& dims) {
  if (dims.size() < 2) throw ValidationError("an Mlp needs at least 2 dims");
  for (auto d : dims) {
    if (d == 0) throw ValidationError("layer dims must be positive");
  }
  Mlp net;
  net.dims = dims;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    net.layers.push_back(
        {dims[l], dims[l + 1], std::vector<double>(dims[l] * dims[l + 1], 0.0),
         std::vector<double>(dims[l + 1], 0.0)});
  }
  return net;
}

// He-uniform weights, zero biases.
inline Mlp make_mlp(const std::vector<std::size_t>& dims, Rng& rng) {
  Mlp net = zero_mlp(dims);
  for (auto& layer : net.layers) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in));
    for (auto& w : layer.w) w = rng.uniform(-limit, limit);
  }
  return net;
}

inline Gradients zero_gradients(const Mlp& net) {
  Gradients g = net.layers;
  for (auto& l : g) {
    std::fill(l.w.begin(), l.w.end(), 0.0);
    std::fill(l.b.begin(), l.b.end(), 0.0);
  }
  return g;
}

// Per-layer activations from one forward pass; acts[0] is the input and
// acts.back() the output logits.
struct ForwardCache {
  std::vector<std::vector<double>> acts;
};

inline std::span<const double> forward(const Mlp& net, std::span<const double> input,
                                       ForwardCache& cache) {
  if (input.size() != net.input_size()) {
    throw ValidationError(fmt::format("input has {} values, network expects {}",
                                      input.size(), net.input_size()));
  }
  cache.acts.resize(net.layers.size() + 1);
  cache.acts[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    const auto& x = cache.acts[l];
    auto& y = cache.acts[l + 1];
    y.resize(layer.out);
    const bool hidden = l + 1 < net.layers.size();
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double* row = layer.w.data() + o * layer.in;
      double s = layer.b[o];
      for (std::size_t i = 0; i < layer.in; ++i) s += row[i] * x[i];
      y[o] = hidden && s < 0.0 ? 0.0 : s;
    }
  }
  return cache.acts.back();
}

inline std::vector<double> forward(const Mlp& net, std::span<const double> input) {
  ForwardCache cache;
  const auto out = forward(net, input, cache);
  return {out.begin(), out.end()};
}

// Accumulates d(loss)/d(params) into `grads` given d(loss)/d(logits) for the
// pass stored in `cache`.
inline void backward(const Mlp& net, const ForwardCache& cache,
                     std::span<const double> dlogits, Gradients& grads) {
  std::vector<double> delta(dlogits.begin(), dlogits.end());
  std::vector<double> prev;
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    const auto& layer = net.layers[l];
    auto& g = grads[l];
    const auto& x = cache.acts[l];
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      g.b[o] += d;
      double* grow = g.w.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) grow[i] += d * x[i];
    }
    if (l == 0) break;
    prev.assign(layer.in, 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* row = layer.w.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) prev[i] += d * row[i];
    }
    // ReLU mask from the stored post-activation.
    for (std::size_t i = 0; i < layer.in; ++i) {
      if (x[i] <= 0.0) prev[i] = 0.0;
    }
    delta.swap(prev);
  }
}

inline void softmax(std::span<const double> logits, std::span<double> out) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    z += out[i];
  }
  for (auto& p : out) p /= z;
}

inline std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  softmax(logits, out);
  return out;
}

struct LossAndGrad {
  double loss = 0.0;
  Gradients grads;
};

// Cross-entropy between `target` and softmax(logits block of `action`),
// where the output holds consecutive blocks of `target.size()` atoms per
// action.
inline LossAndGrad loss_and_grad(const Mlp& net, std::span<const double> input,
                                 std::span<const double> target,
                                 std::size_t action) {
  const std::size_t atoms = target.size();
  if (atoms == 0 || net.output_size() % atoms != 0 ||
      (action + 1) * atoms > net.output_size()) {
    throw ValidationError("target does not match the network output layout");
  }
  double mass = 0.0;
  for (double t : target) {
    if (!(t >= 0.0)) throw ValidationError("target has a negative probability");
    mass += t;
  }
  if (std::abs(mass - 1.0) > 1e-6) {
    throw ValidationError(fmt::format("target sums to {}, not 1", mass));
  }
  ForwardCache cache;
  const auto logits = forward(net, input, cache);
  const auto block = logits.subspan(action * atoms, atoms);
  const double mx = *std::max_element(block.begin(), block.end());
  double z = 0.0;
  for (double v : block) z += std::exp(v - mx);
  const double log_z = mx + std::log(z);

  LossAndGrad out;
  std::vector<double> dlogits(net.output_size(), 0.0);
  for (std::size_t i = 0; i < atoms; ++i) {
    const double log_p = block[i] - log_z;
    if (target[i] > 0.0) out.loss -= target[i] * log_p;
    dlogits[action * atoms + i] = std::exp(log_p) * mass - target[i];
  }
  out.grads = zero_gradients(net);
  backward(net, cache, dlogits, out.grads);
  return out;
}

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  Gradients m;
  Gradients v;
  std::int64_t step = 0;
};

inline AdamState make_adam(const Mlp& net, AdamConfig config = {}) {
  return {config, zero_gradients(net), zero_gradients(net), 0};
}

// One bias-corrected Adam update. Throws, leaving net and state untouched,
// if any gradient is non-finite.
inline void adam_step(Mlp& net, const Gradients& grads, AdamState& state) {
  if (grads.size() != net.layers.size() || state.m.size() != net.layers.size()) {
    throw ValidationError("gradient shape does not match the network");
  }
  for (std::size_t l = 0; l < grads.size(); ++l) {
    if (grads[l].w.size() != net.layers[l].w.size() ||
        grads[l].b.size() != net.layers[l].b.size()) {
      throw ValidationError("gradient shape does not match the network");
    }
    for (double g : grads[l].w) {
      if (!std::isfinite(g)) throw std::runtime_error("non-finite gradient");
    }
    for (double g : grads[l].b) {
      if (!std::isfinite(g)) throw std::runtime_error("non-finite gradient");
    }
  }
  ++state.step;
  const auto& c = state.config;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                    std::vector<double>& m, std::vector<double>& v) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= c.learning_rate * mhat / (std::sqrt(vhat) + c.epsilon);
    }
  };
  for (std::size_t l = 0; l < grads.size(); ++l) {
    update(net.layers[l].w, grads[l].w, state.m[l].w, state.v[l].w);
    update(net.layers[l].b, grads[l].b, state.m[l].b, state.v[l].b);
  }
}

// Plain-text checkpoint: a version line, the dims line, then for each layer
// one line per weight row followed by one line of biases.
inline void write_mlp(std::ostream& os, const Mlp& net) {
  os << "ridesim-mlp v1\n";
  for (std::size_t i = 0; i < net.dims.size(); ++i) {
    os << (i ? " " : "") << net.dims[i];
  }
  os << '\n';
  for (const auto& layer : net.layers) {
    for (std::size_t o = 0; o < layer.out; ++o) {
      for (std::size_t i = 0; i < layer.in; ++i) {
        os << (i ? " " : "") << format_real(layer.w[o * layer.in + i]);
      }
      os << '\n';
    }
    for (std::size_t o = 0; o < layer.out; ++o) {
      os << (o ? " " : "") << format_real(layer.b[o]);
    }
    os << '\n';
  }
}

inline Mlp read_mlp(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != "ridesim-mlp v1") {
    throw ValidationError("not an mlp checkpoint");
  }
  if (!std::getline(is, line)) throw ValidationError("truncated mlp checkpoint");
  std::vector<std::size_t> dims;
  {
    std::istringstream ss(line);
    std::size_t d;
    while (ss >> d) dims.push_back(d);
  }
  Mlp net = zero_mlp(dims);
  auto read_values = [&](std::vector<double>& dst, std::size_t offset,
                         std::size_t n) {
    if (!std::getline(is, line)) throw ValidationError("truncated mlp checkpoint");
    const auto cells = split(trim(line), ' ');
    if (cells.size() != n) throw ValidationError("bad mlp checkpoint row");
    for (std::size_t k = 0; k < n; ++k) {
      const auto v = parse_real(cells[k]);
      if (!v) throw ValidationError("bad mlp checkpoint value");
      dst[offset + k] = *v;
    }
  };
  for (auto& layer : net.layers) {
    for (std::size_t o = 0; o < layer.out; ++o) read_values(layer.w, o * layer.in, layer.in);
    read_values(layer.b, 0, layer.out);
  }
  return net;
}

}  // namespace ridesim::nn

#endif  // RIDESIM_NN_HPP_
