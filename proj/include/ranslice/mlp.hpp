#pragma once

// Fully connected tanh network with a linear output layer, plus Adam.
//
// All parameters live in one flat vector: for each layer the weight matrix
// (out x in, row-major) followed by the bias. Training in the DQN only ever
// needs the gradient of a single output per sample, so backprop is written
// for that case.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ranslice/error.hpp"
#include "ranslice/rng.hpp"

namespace ranslice {

class Mlp {
 public:
  Mlp() = default;

  /// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  Mlp(std::vector<int> sizes, Rng& rng) : sizes_(std::move(sizes)) {
    require(sizes_.size() >= 2, "Mlp needs input and output sizes");
    layout();
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      const int in = sizes_[l];
      const int out = sizes_[l + 1];
      const double r = std::sqrt(6.0 / (in + out));
      double* w = params_.data() + offset_[l];
      for (int i = 0; i < in * out; ++i) w[i] = rng.uniform(-r, r);
    }
  }

  const std::vector<int>& sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  std::size_t layer_count() const { return sizes_.size() - 1; }
  std::size_t param_count() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  /// Activations of every hidden layer for one input; act[0] is the input.
  struct Cache {
    std::vector<std::vector<double>> act;
  };

  void hidden(std::span<const double> x, Cache& c) const {
    require(static_cast<int>(x.size()) == input_size(), "Mlp: input size mismatch");
    c.act.resize(layer_count());
    c.act[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l + 1 < layer_count(); ++l) {
      const int in = sizes_[l];
      const int out = sizes_[l + 1];
      const double* w = params_.data() + offset_[l];
      const double* b = w + static_cast<std::ptrdiff_t>(in) * out;
      const auto& a = c.act[l];
      auto& h = c.act[l + 1];
      h.resize(static_cast<std::size_t>(out));
      for (int o = 0; o < out; ++o) {
        double s = b[o];
        const double* row = w + static_cast<std::ptrdiff_t>(o) * in;
        for (int i = 0; i < in; ++i) s += row[i] * a[static_cast<std::size_t>(i)];
        h[static_cast<std::size_t>(o)] = std::tanh(s);
      }
    }
  }

  /// Single output unit `k` given cached hidden activations.
  double output(const Cache& c, int k) const {
    const std::size_t l = layer_count() - 1;
    const int in = sizes_[l];
    const double* w = params_.data() + offset_[l];
    const double* b = w + static_cast<std::ptrdiff_t>(in) * sizes_[l + 1];
    const double* row = w + static_cast<std::ptrdiff_t>(k) * in;
    const auto& a = c.act[l];
    double s = b[k];
    for (int i = 0; i < in; ++i) s += row[i] * a[static_cast<std::size_t>(i)];
    return s;
  }

  void outputs(const Cache& c, std::vector<double>& y) const {
    y.resize(static_cast<std::size_t>(output_size()));
    for (int k = 0; k < output_size(); ++k) y[static_cast<std::size_t>(k)] = output(c, k);
  }

  std::vector<double> forward(std::span<const double> x) const {
    Cache c;
    hidden(x, c);
    std::vector<double> y;
    outputs(c, y);
    return y;
  }

  /// Accumulates g * d(output k)/d(params) into `grad`.
  void backward_single(const Cache& c, int k, double g, std::span<double> grad) const {
    require(grad.size() == params_.size(), "Mlp: gradient size mismatch");
    std::size_t l = layer_count() - 1;
    std::vector<double> delta;  // d output / d activations of layer l
    {
      const int in = sizes_[l];
      const int out = sizes_[l + 1];
      const double* w = params_.data() + offset_[l];
      double* gw = grad.data() + offset_[l];
      double* gb = gw + static_cast<std::ptrdiff_t>(in) * out;
      const auto& a = c.act[l];
      const double* row = w + static_cast<std::ptrdiff_t>(k) * in;
      double* grow = gw + static_cast<std::ptrdiff_t>(k) * in;
      delta.resize(static_cast<std::size_t>(in));
      for (int i = 0; i < in; ++i) {
        grow[i] += g * a[static_cast<std::size_t>(i)];
        delta[static_cast<std::size_t>(i)] = g * row[i];
      }
      gb[k] += g;
    }
    while (l-- > 0) {
      const int in = sizes_[l];
      const int out = sizes_[l + 1];
      const double* w = params_.data() + offset_[l];
      double* gw = grad.data() + offset_[l];
      double* gb = gw + static_cast<std::ptrdiff_t>(in) * out;
      const auto& a = c.act[l];
      const auto& h = c.act[l + 1];
      std::vector<double> prev(l > 0 ? static_cast<std::size_t>(in) : 0, 0.0);
      for (int o = 0; o < out; ++o) {
        const double hv = h[static_cast<std::size_t>(o)];
        const double d = delta[static_cast<std::size_t>(o)] * (1.0 - hv * hv);
        if (d == 0.0) continue;
        double* grow = gw + static_cast<std::ptrdiff_t>(o) * in;
        const double* row = w + static_cast<std::ptrdiff_t>(o) * in;
        for (int i = 0; i < in; ++i) grow[i] += d * a[static_cast<std::size_t>(i)];
        gb[o] += d;
        if (l > 0)
          for (int i = 0; i < in; ++i) prev[static_cast<std::size_t>(i)] += d * row[i];
      }
      delta.swap(prev);
    }
  }

  friend bool operator==(const Mlp& a, const Mlp& b) { return a.sizes_ == b.sizes_ && a.params_ == b.params_; }

  /// Restores a network from sizes and raw parameters (checkpoints).
  static Mlp from_params(std::vector<int> sizes, std::vector<double> params) {
    Mlp m;
    m.sizes_ = std::move(sizes);
    m.layout();
    require(params.size() == m.params_.size(), "Mlp: parameter count mismatch");
    m.params_ = std::move(params);
    return m;
  }

 private:
  void layout() {
    offset_.clear();
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      require(sizes_[l] > 0 && sizes_[l + 1] > 0, "Mlp: layer sizes must be positive");
      offset_.push_back(n);
      n += static_cast<std::size_t>(sizes_[l]) * sizes_[l + 1] + static_cast<std::size_t>(sizes_[l + 1]);
    }
    params_.assign(n, 0.0);
  }

  std::vector<int> sizes_;
  std::vector<std::size_t> offset_;
  std::vector<double> params_;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  AdamState(std::size_t n, double step_size_, double beta1_, double beta2_, double eps_)
      : m(n, 0.0), v(n, 0.0), step_size(step_size_), beta1(beta1_), beta2(beta2_), eps(eps_) {}

  /// One bias-corrected Adam step, params -= lr * mhat / (sqrt(vhat) + eps).
  void apply(std::span<double> params, std::span<const double> grad) {
    require(params.size() == m.size() && grad.size() == m.size(), "Adam: size mismatch");
    ++step;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
      params[i] -= step_size * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
  }
};

}  // namespace ranslice
