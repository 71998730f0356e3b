#include "dehaze/nn/network.hpp"

#include <algorithm>
#include <cmath>

#include "dehaze/error.hpp"
#include "dehaze/random.hpp"

namespace dehaze::nn {
namespace {

constexpr LayerDescriptor conv(std::uint32_t k, std::uint32_t in, std::uint32_t out) {
  return {LayerKind::kConv, k, in, out};
}
constexpr LayerDescriptor dense(std::uint32_t in, std::uint32_t out) {
  return {LayerKind::kDense, 1, in, out};
}

const std::vector<std::size_t>& offsets() {
  static const std::vector<std::size_t> table = [] {
    std::vector<std::size_t> t;
    std::size_t acc = 0;
    for (const auto& d : architecture()) {
      t.push_back(acc);
      acc += d.weight_count() + d.bias_count();
    }
    t.push_back(acc);
    return t;
  }();
  return table;
}

kernels::ConvShape conv_shape(std::size_t l) {
  const auto& d = architecture()[l];
  return {d.in_channels, d.out_channels, d.kernel, kPatchSize, kPatchSize};
}

void relu_inplace(std::span<double> v) {
  for (double& x : v) x = std::max(x, 0.0);
}

// Converts a gradient w.r.t. a ReLU output into one w.r.t. its input.
void relu_backward(std::span<const double> act, std::span<double> grad) {
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!(act[i] > 0.0)) grad[i] = 0.0;
  }
}

bool is_path_start(std::size_t l) {
  return l == layer::kBottom0 || l == layer::kMiddle0 || l == layer::kTop0;
}

}  // namespace

std::string LayerDescriptor::describe() const {
  if (kind == LayerKind::kDense) {
    return "dense " + std::to_string(in_channels) + "->" + std::to_string(out_channels);
  }
  return "conv " + std::to_string(kernel) + "x" + std::to_string(kernel) + " " +
         std::to_string(in_channels) + "->" + std::to_string(out_channels);
}

const std::vector<LayerDescriptor>& architecture() {
  static const std::vector<LayerDescriptor> layers = {
      // bottom
      conv(1, 3, 8), conv(5, 8, 8), conv(3, 8, 8), conv(3, 8, 8), conv(3, 8, 8), conv(3, 8, 8),
      // middle
      conv(1, 3, 8), conv(7, 8, 8), conv(5, 8, 16),
      // fuse1 over bottom ++ middle
      conv(3, 24, 8),
      // top
      conv(1, 3, 8), conv(7, 8, 8), conv(5, 8, 16), conv(3, 16, 8),
      // head over top ++ fuse1
      dense(kFlattened, kHidden), dense(kHidden, kOutputs)};
  return layers;
}

std::size_t parameter_count() { return offsets().back(); }

std::size_t layer_offset(std::size_t layer) { return offsets().at(layer); }

NetworkParams NetworkParams::zeros() {
  const std::size_t n = parameter_count();
  return NetworkParams{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                       std::vector<double>(n, 0.0)};
}

NetworkParams NetworkParams::initialized(std::uint64_t seed) {
  NetworkParams p = zeros();
  Rng rng(seed);
  for (std::size_t l = 0; l < layer::kCount; ++l) {
    const auto& d = architecture()[l];
    const double fan_in = double(d.in_channels) * d.kernel * d.kernel;
    const double fan_out = double(d.out_channels) * d.kernel * d.kernel;
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& w : p.weights(l)) w = rng.uniform(-limit, limit);
  }
  return p;
}

std::span<double> NetworkParams::weights(std::size_t l) {
  return std::span<double>(values).subspan(layer_offset(l), architecture()[l].weight_count());
}
std::span<const double> NetworkParams::weights(std::size_t l) const {
  return std::span<const double>(values).subspan(layer_offset(l), architecture()[l].weight_count());
}
std::span<double> NetworkParams::bias(std::size_t l) {
  const auto& d = architecture()[l];
  return std::span<double>(values).subspan(layer_offset(l) + d.weight_count(), d.bias_count());
}
std::span<const double> NetworkParams::bias(std::size_t l) const {
  const auto& d = architecture()[l];
  return std::span<const double>(values).subspan(layer_offset(l) + d.weight_count(), d.bias_count());
}

// ---------------------------------------------------------------- workspace

Workspace::Workspace()
    : input_(3 * kPatchPixels),
      cat1_(24 * kPatchPixels),
      cat2_(16 * kPatchPixels),
      dcat1_(24 * kPatchPixels),
      dcat2_(16 * kPatchPixels),
      acts_(layer::kCount),
      grads_(layer::kCount) {
  for (std::size_t l = 0; l < layer::kCount; ++l) {
    const auto& d = architecture()[l];
    const std::size_t n =
        d.kind == LayerKind::kConv ? std::size_t{d.out_channels} * kPatchPixels : d.out_channels;
    acts_[l].resize(n);
    grads_[l].resize(n);
  }
}

std::span<double> Workspace::act(std::size_t l) {
  switch (l) {
    case layer::kMiddle0 - 1:
      return std::span<double>(cat1_).first(8 * kPatchPixels);
    case layer::kFuse1 - 1:
      return std::span<double>(cat1_).subspan(8 * kPatchPixels);
    case layer::kDenseHidden - 1:
      return std::span<double>(cat2_).first(8 * kPatchPixels);
    case layer::kFuse1:
      return std::span<double>(cat2_).subspan(8 * kPatchPixels);
    default:
      return acts_[l];
  }
}

std::span<double> Workspace::grad(std::size_t l) {
  switch (l) {
    case layer::kMiddle0 - 1:
      return std::span<double>(dcat1_).first(8 * kPatchPixels);
    case layer::kFuse1 - 1:
      return std::span<double>(dcat1_).subspan(8 * kPatchPixels);
    case layer::kDenseHidden - 1:
      return std::span<double>(dcat2_).first(8 * kPatchPixels);
    case layer::kFuse1:
      return std::span<double>(dcat2_).subspan(8 * kPatchPixels);
    default:
      return grads_[l];
  }
}

std::span<const double> Workspace::activation(std::size_t l) const {
  return const_cast<Workspace*>(this)->act(l);
}

// ---------------------------------------------------------------- forward

std::vector<double> to_network_input(const PatchSample& patch) {
  if (patch.size != kPatchSize || patch.pixels.size() != kPatchPixels * 3) {
    throw ShapeError("network input must be a " + std::to_string(kPatchSize) + "x" +
                     std::to_string(kPatchSize) + "x3 patch");
  }
  std::vector<double> chw(3 * kPatchPixels);
  for (std::size_t i = 0; i < kPatchPixels; ++i) {
    for (std::size_t c = 0; c < 3; ++c) chw[c * kPatchPixels + i] = patch.pixels[3 * i + c];
  }
  return chw;
}

namespace {

void check_params(const NetworkParams& params) {
  if (params.values.size() != parameter_count()) {
    throw ShapeError("parameter vector has " + std::to_string(params.values.size()) +
                     " entries, architecture needs " + std::to_string(parameter_count()));
  }
}

}  // namespace

RawOutput forward(const NetworkParams& params, std::span<const double> input, Workspace& ws) {
  check_params(params);
  if (input.size() != 3 * kPatchPixels) throw ShapeError("network input must have 675 values");
  std::copy(input.begin(), input.end(), ws.input_.begin());

  for (std::size_t l = 0; l < layer::kDenseHidden; ++l) {
    std::span<const double> in;
    if (is_path_start(l)) {
      in = ws.input_;
    } else if (l == layer::kFuse1) {
      in = ws.cat1_;
    } else {
      in = ws.act(l - 1);
    }
    kernels::conv2d_forward(conv_shape(l), in, params.weights(l), params.bias(l), ws.act(l),
                            ws.scratch_);
    relu_inplace(ws.act(l));
  }
  kernels::dense_forward(kFlattened, kHidden, ws.cat2_, params.weights(layer::kDenseHidden),
                         params.bias(layer::kDenseHidden), ws.act(layer::kDenseHidden));
  relu_inplace(ws.act(layer::kDenseHidden));
  kernels::dense_forward(kHidden, kOutputs, ws.act(layer::kDenseHidden),
                         params.weights(layer::kDenseOut), params.bias(layer::kDenseOut),
                         ws.act(layer::kDenseOut));
  const auto out = ws.act(layer::kDenseOut);
  return {out[0], out[1], out[2], out[3]};
}

RawOutput forward(const NetworkParams& params, const PatchSample& patch) {
  Workspace ws;
  return forward(params, to_network_input(patch), ws);
}

EstimatorOutput to_estimate(const RawOutput& raw) {
  EstimatorOutput e{};
  e.t = std::isfinite(raw[0]) ? std::clamp(raw[0], 0.0, 1.0) : 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    const double v = std::isfinite(raw[c + 1]) ? raw[c + 1] : 1.0;
    e.a[c] = std::clamp(v, Airlight::kMinChannel, 1.0);
  }
  return e;
}

EstimatorOutput infer(const NetworkParams& params, const PatchSample& patch, Workspace& ws) {
  return to_estimate(forward(params, to_network_input(patch), ws));
}

double mse_loss(std::span<const double> predicted, std::span<const double> target) {
  if (predicted.size() != target.size() || predicted.empty()) {
    throw ShapeError("mse_loss: operand length mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - target[i];
    sum += d * d;
  }
  return sum / static_cast<double>(predicted.size());
}

RawOutput label_target(const PatchLabel& label) {
  return {label.t, label.a[0], label.a[1], label.a[2]};
}

// ---------------------------------------------------------------- backward

double accumulate_gradient(const NetworkParams& params, std::span<const double> input,
                           const RawOutput& target, Workspace& ws, std::span<double> gradient) {
  if (gradient.size() != parameter_count()) throw ShapeError("gradient buffer has wrong size");
  const RawOutput out = forward(params, input, ws);
  const double loss = mse_loss(out, target);

  auto grad_w = [&](std::size_t l) {
    return gradient.subspan(layer_offset(l), architecture()[l].weight_count());
  };
  auto grad_b = [&](std::size_t l) {
    const auto& d = architecture()[l];
    return gradient.subspan(layer_offset(l) + d.weight_count(), d.bias_count());
  };

  auto g_out = ws.grad(layer::kDenseOut);
  for (std::size_t i = 0; i < kOutputs; ++i) {
    g_out[i] = 2.0 * (out[i] - target[i]) / static_cast<double>(kOutputs);
  }

  kernels::dense_backward(kHidden, kOutputs, ws.act(layer::kDenseHidden),
                          params.weights(layer::kDenseOut), g_out, ws.grad(layer::kDenseHidden),
                          grad_w(layer::kDenseOut), grad_b(layer::kDenseOut));
  relu_backward(ws.act(layer::kDenseHidden), ws.grad(layer::kDenseHidden));

  kernels::dense_backward(kFlattened, kHidden, ws.cat2_, params.weights(layer::kDenseHidden),
                          ws.grad(layer::kDenseHidden), ws.dcat2_, grad_w(layer::kDenseHidden),
                          grad_b(layer::kDenseHidden));
  relu_backward(ws.cat2_, ws.dcat2_);

  // Walk conv layers in reverse index order; each layer's output gradient is
  // complete (and ReLU-masked) by the time it is visited.
  for (std::size_t l = layer::kDenseHidden; l-- > 0;) {
    std::span<const double> in;
    std::span<double> grad_in;
    if (is_path_start(l)) {
      in = ws.input_;
    } else if (l == layer::kFuse1) {
      in = ws.cat1_;
      grad_in = ws.dcat1_;
    } else {
      in = ws.act(l - 1);
      grad_in = ws.grad(l - 1);
    }
    kernels::conv2d_backward(conv_shape(l), in, params.weights(l), ws.grad(l), grad_in,
                             grad_w(l), grad_b(l), ws.scratch_);
    if (l == layer::kFuse1) {
      relu_backward(ws.cat1_, ws.dcat1_);
    } else if (!grad_in.empty()) {
      relu_backward(ws.act(l - 1), grad_in);
    }
  }
  return loss;
}

std::vector<double> backward(const NetworkParams& params, const PatchSample& patch,
                             const RawOutput& target) {
  std::vector<double> gradient(parameter_count(), 0.0);
  Workspace ws;
  accumulate_gradient(params, to_network_input(patch), target, ws, gradient);
  return gradient;
}

}  // namespace dehaze::nn
