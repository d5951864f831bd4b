#pragma once

// Dense feed-forward network: ReLU hidden layers, Softmax (or linear) head,
// mean-squared-error loss, backpropagation and Adam. Batch size 1, doubles
// throughout.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hanabi_td/codec.hpp"
#include "hanabi_td/rng.hpp"

namespace hanabi {

enum class OutputHead : std::uint8_t { softmax, linear };

/// out x in weights, row-major, plus out biases.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  DenseLayer() = default;
  DenseLayer(std::size_t in_dim, std::size_t out_dim)
      : in(in_dim), out(out_dim), weights(in_dim * out_dim, 0.0), bias(out_dim, 0.0) {}

  double& w(std::size_t o, std::size_t i) { return weights[o * in + i]; }
  double w(std::size_t o, std::size_t i) const { return weights[o * in + i]; }

  bool operator==(const DenseLayer&) const = default;
};

/// Parameter-shaped container: gradients and Adam moments use it too.
using LayerStack = std::vector<DenseLayer>;

inline LayerStack zeros_like(const LayerStack& layers) {
  LayerStack z;
  z.reserve(layers.size());
  for (const auto& l : layers) z.emplace_back(l.in, l.out);
  return z;
}

class Network {
 public:
  Network() = default;
  Network(LayerStack layers, OutputHead head) : layers_(std::move(layers)), head_(head) {
    if (layers_.empty()) throw std::invalid_argument("network needs at least one layer");
    for (std::size_t i = 1; i < layers_.size(); ++i) {
      if (layers_[i].in != layers_[i - 1].out) {
        throw std::invalid_argument("layer dimensions do not chain");
      }
    }
  }

  const LayerStack& layers() const noexcept { return layers_; }
  /// Mutable parameter access bumps the revision, invalidating caches.
  LayerStack& mutable_layers() noexcept {
    ++revision_;
    return layers_;
  }

  OutputHead head() const noexcept { return head_; }
  std::size_t input_dim() const { return layers_.front().in; }
  std::size_t output_dim() const { return layers_.back().out; }
  int hidden_count() const noexcept { return static_cast<int>(layers_.size()) - 1; }
  std::size_t hidden_width() const { return layers_.size() > 1 ? layers_.front().out : 0; }
  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
    return n;
  }
  std::uint64_t revision() const noexcept { return revision_; }

  /// Parameter equality (the revision counter is bookkeeping, not state).
  friend bool operator==(const Network& a, const Network& b) {
    return a.head_ == b.head_ && a.layers_ == b.layers_;
  }

 private:
  LayerStack layers_;
  OutputHead head_ = OutputHead::softmax;
  std::uint64_t revision_ = 0;
};

/// Scaled-uniform init, bound sqrt(6 / (fan_in + fan_out)); biases zero.
inline Network init_network(int hidden_count, std::size_t hidden_width, std::uint64_t seed,
                            std::size_t input_dim = kFeatureSize,
                            std::size_t output_dim = kNumMoves,
                            OutputHead head = OutputHead::softmax) {
  if (hidden_count < 1 || hidden_count > 4) {
    throw std::invalid_argument("hidden layer count must be in [1,4], got " +
                                std::to_string(hidden_count));
  }
  if (hidden_width == 0) throw std::invalid_argument("hidden width must be positive");
  Rng rng(seed);
  LayerStack layers;
  std::size_t in = input_dim;
  for (int l = 0; l <= hidden_count; ++l) {
    const std::size_t out = l == hidden_count ? output_dim : hidden_width;
    DenseLayer layer(in, out);
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    for (double& w : layer.weights) w = (2.0 * rng.uniform01() - 1.0) * bound;
    layers.push_back(std::move(layer));
    in = out;
  }
  return Network(std::move(layers), head);
}

/// Per-layer inputs and pre-activations from one forward pass.
struct ForwardCache {
  std::vector<std::vector<double>> inputs;          // inputs[l] feeds layer l
  std::vector<std::vector<double>> preactivations;  // z of layer l
  std::vector<double> output;
  std::uint64_t revision = 0;
  std::size_t parameter_count = 0;
};

struct ForwardResult {
  std::vector<double> output;
  ForwardCache cache;
};

inline void softmax_in_place(std::span<double> z) {
  const double top = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - top);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

inline ForwardResult forward(const Network& net, std::span<const double> x) {
  if (x.size() != net.input_dim()) {
    throw std::invalid_argument("forward: input has " + std::to_string(x.size()) +
                                " entries, network expects " +
                                std::to_string(net.input_dim()));
  }
  ForwardResult r;
  auto& cache = r.cache;
  const auto& layers = net.layers();
  cache.inputs.reserve(layers.size());
  cache.preactivations.reserve(layers.size());
  std::vector<double> a(x.begin(), x.end());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const DenseLayer& layer = layers[l];
    std::vector<double> z(layer.bias);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double* row = &layer.weights[o * layer.in];
      double acc = 0.0;
      for (std::size_t i = 0; i < layer.in; ++i) acc += row[i] * a[i];
      z[o] += acc;
    }
    cache.inputs.push_back(std::move(a));
    cache.preactivations.push_back(z);
    const bool last = l + 1 == layers.size();
    if (!last) {
      for (double& v : z) v = v > 0.0 ? v : 0.0;
    } else if (net.head() == OutputHead::softmax) {
      softmax_in_place(z);
    }
    a = std::move(z);
  }
  cache.output = a;
  cache.revision = net.revision();
  cache.parameter_count = net.parameter_count();
  r.output = std::move(a);
  return r;
}

/// (1/n) sum (pred - target)^2.
inline double mse_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size() || pred.empty()) {
    throw std::invalid_argument("mse_loss: length mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    sum += d * d;
  }
  return sum / static_cast<double>(pred.size());
}

/// d mse_loss(forward(x), target) / d theta for every parameter.
inline LayerStack backward(const Network& net, const ForwardCache& cache,
                           std::span<const double> target) {
  if (cache.revision != net.revision() || cache.parameter_count != net.parameter_count() ||
      cache.inputs.size() != net.layers().size()) {
    throw std::invalid_argument("backward: stale forward cache");
  }
  const auto& layers = net.layers();
  const std::size_t n_out = net.output_dim();
  if (target.size() != n_out) throw std::invalid_argument("backward: target length mismatch");

  // dL/dy for the MSE loss.
  std::vector<double> delta(n_out);
  for (std::size_t i = 0; i < n_out; ++i) {
    delta[i] = 2.0 * (cache.output[i] - target[i]) / static_cast<double>(n_out);
  }
  // Through the softmax Jacobian: dL/dz_j = y_j (g_j - sum_i g_i y_i).
  if (net.head() == OutputHead::softmax) {
    const auto& y = cache.output;
    double dot = 0.0;
    for (std::size_t i = 0; i < n_out; ++i) dot += delta[i] * y[i];
    for (std::size_t j = 0; j < n_out; ++j) delta[j] = y[j] * (delta[j] - dot);
  }

  LayerStack grads = zeros_like(layers);
  for (std::size_t l = layers.size(); l-- > 0;) {
    const DenseLayer& layer = layers[l];
    DenseLayer& g = grads[l];
    const auto& in = cache.inputs[l];
    for (std::size_t o = 0; o < layer.out; ++o) {
      g.bias[o] = delta[o];
      double* row = &g.weights[o * layer.in];
      for (std::size_t i = 0; i < layer.in; ++i) row[i] = delta[o] * in[i];
    }
    if (l == 0) break;
    std::vector<double> prev(layer.in, 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double* row = &layer.weights[o * layer.in];
      for (std::size_t i = 0; i < layer.in; ++i) prev[i] += row[i] * delta[o];
    }
    const auto& z_prev = cache.preactivations[l - 1];
    for (std::size_t i = 0; i < layer.in; ++i) {
      if (!(z_prev[i] > 0.0)) prev[i] = 0.0;
    }
    delta = std::move(prev);
  }
  return grads;
}

struct AdamState {
  LayerStack m;
  LayerStack v;
  std::uint64_t t = 0;
  double beta1 = 0.900;
  double beta2 = 0.999;
  double eps = 1e-07;
  /// Accepted from configuration and stored, but Adam has no separate
  /// momentum term; beta1 plays that role.
  double momentum = 0.990;

  AdamState() = default;
  explicit AdamState(const Network& net) : m(zeros_like(net.layers())), v(zeros_like(net.layers())) {}
};

inline void adam_step(Network& net, const LayerStack& grads, AdamState& st, double lr) {
  if (!(lr >= 0.0)) throw std::invalid_argument("adam_step: learning rate must be >= 0");
  auto& layers = net.mutable_layers();
  if (grads.size() != layers.size() || st.m.size() != layers.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  ++st.t;
  const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.t));
  auto update = [&](std::vector<double>& theta, const std::vector<double>& g,
                    std::vector<double>& m, std::vector<double>& v) {
    if (theta.size() != g.size()) throw std::invalid_argument("adam_step: shape mismatch");
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = st.beta1 * m[i] + (1.0 - st.beta1) * g[i];
      v[i] = st.beta2 * v[i] + (1.0 - st.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      theta[i] -= lr * m_hat / (std::sqrt(v_hat) + st.eps);
    }
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].weights, grads[l].weights, st.m[l].weights, st.v[l].weights);
    update(layers[l].bias, grads[l].bias, st.m[l].bias, st.v[l].bias);
  }
}

// Checkpoint format (all integers and doubles little-endian):
//   8 bytes   magic "HNABINET"
//   u32       format version (1)
//   u32       head (0 softmax, 1 linear)
//   u32       layer count L
//   L times:  u32 in, u32 out, f64[out*in] weights (row-major), f64[out] bias
inline constexpr char kCheckpointMagic[8] = {'H', 'N', 'A', 'B', 'I', 'N', 'E', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(b, 8);
}
inline void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(b, 4);
}
inline std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}
inline std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("checkpoint truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace detail

inline void save_checkpoint(const Network& net, std::ostream& os) {
  os.write(kCheckpointMagic, sizeof kCheckpointMagic);
  detail::put_u32(os, kCheckpointVersion);
  detail::put_u32(os, static_cast<std::uint32_t>(net.head()));
  detail::put_u32(os, static_cast<std::uint32_t>(net.layers().size()));
  for (const auto& l : net.layers()) {
    detail::put_u32(os, static_cast<std::uint32_t>(l.in));
    detail::put_u32(os, static_cast<std::uint32_t>(l.out));
    for (double w : l.weights) detail::put_u64(os, std::bit_cast<std::uint64_t>(w));
    for (double b : l.bias) detail::put_u64(os, std::bit_cast<std::uint64_t>(b));
  }
  if (!os) throw std::runtime_error("checkpoint write failed");
}

inline Network load_checkpoint(std::istream& is) {
  char magic[sizeof kCheckpointMagic];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw std::runtime_error("not a network checkpoint");
  }
  const std::uint32_t version = detail::get_u32(is);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t head = detail::get_u32(is);
  if (head > 1) throw std::runtime_error("bad output head in checkpoint");
  const std::uint32_t count = detail::get_u32(is);
  if (count == 0 || count > 64) throw std::runtime_error("bad layer count in checkpoint");
  LayerStack layers;
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::uint32_t in = detail::get_u32(is);
    const std::uint32_t out = detail::get_u32(is);
    if (in == 0 || out == 0 || in > (1u << 20) || out > (1u << 20)) {
      throw std::runtime_error("bad layer shape in checkpoint");
    }
    DenseLayer l(in, out);
    for (double& w : l.weights) w = std::bit_cast<double>(detail::get_u64(is));
    for (double& b : l.bias) b = std::bit_cast<double>(detail::get_u64(is));
    layers.push_back(std::move(l));
  }
  return Network(std::move(layers), static_cast<OutputHead>(head));
}

inline void save_checkpoint(const Network& net, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  save_checkpoint(net, os);
}

inline Network load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  return load_checkpoint(is);
}

}  // namespace hanabi
