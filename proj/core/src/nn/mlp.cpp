#include "forkrl/nn/mlp.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <string>

#include "forkrl/errors.hpp"

namespace forkrl::nn {

namespace {

std::string dims_text(std::size_t got, std::size_t want) {
  return "got " + std::to_string(got) + ", expected " + std::to_string(want);
}

void apply_output(const OutputActivation& act, RowMatrix& z) {
  if (act.kind == OutputKind::TanhScaled) z = act.scale * z.array().tanh();
}

}  // namespace

std::uint64_t MlpParams::next_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

MlpParams::MlpParams(std::vector<Layer> layers, OutputActivation output)
    : layers_(std::move(layers)), output_(output) {
  if (layers_.empty()) throw ShapeError("MlpParams: at least one layer required");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (static_cast<std::size_t>(l.bias.size()) != l.weight.rows()) {
      throw ShapeError("MlpParams: bias of layer " + std::to_string(i) + " " +
                       dims_text(static_cast<std::size_t>(l.bias.size()), l.weight.rows()));
    }
    if (!l.bias.allFinite()) throw ShapeError("MlpParams: non-finite bias");
    if (i > 0 && layers_[i - 1].weight.rows() != l.weight.cols()) {
      throw ShapeError("MlpParams: layer " + std::to_string(i) + " input " +
                       dims_text(l.weight.cols(), layers_[i - 1].weight.rows()));
    }
  }
  if (output_.kind == OutputKind::TanhScaled && !(output_.scale > 0.0)) {
    throw ShapeError("MlpParams: TanhScaled requires scale > 0");
  }
}

MlpParams::MlpParams(const MlpParams& other)
    : layers_(other.layers_), output_(other.output_), id_(next_id()), revision_(0) {}

MlpParams& MlpParams::operator=(const MlpParams& other) {
  if (this != &other) {
    layers_ = other.layers_;
    output_ = other.output_;
    ++revision_;
  }
  return *this;
}

MlpParams MlpParams::uniform_init(std::span<const std::size_t> dims, OutputActivation output,
                                  std::mt19937_64& rng) {
  if (dims.size() < 2) throw ShapeError("uniform_init: need input and output dims");
  std::vector<Layer> layers;
  layers.reserve(dims.size() - 1);
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const std::size_t fan_in = dims[i];
    const std::size_t fan_out = dims[i + 1];
    if (fan_in == 0 || fan_out == 0) throw ShapeError("uniform_init: zero-width layer");
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    RowMatrix w(static_cast<Eigen::Index>(fan_out), static_cast<Eigen::Index>(fan_in));
    for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = dist(rng);
    Vector b(static_cast<Eigen::Index>(fan_out));
    for (Eigen::Index k = 0; k < b.size(); ++k) b[k] = dist(rng);
    layers.push_back({Matrix(std::move(w)), std::move(b)});
  }
  return MlpParams(std::move(layers), output);
}

std::size_t MlpParams::input_dim() const { return layers_.empty() ? 0 : layers_.front().weight.cols(); }

std::size_t MlpParams::output_dim() const { return layers_.empty() ? 0 : layers_.back().weight.rows(); }

std::size_t MlpParams::num_params() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.size() + static_cast<std::size_t>(l.bias.size());
  return n;
}

std::vector<Layer>& MlpParams::mutable_layers() {
  ++revision_;
  return layers_;
}

bool MlpParams::same_shape(const MlpParams& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].weight.rows() != other.layers_[i].weight.rows() ||
        layers_[i].weight.cols() != other.layers_[i].weight.cols()) {
      return false;
    }
  }
  return true;
}

std::vector<double> MlpParams::flatten() const {
  std::vector<double> out;
  out.reserve(num_params());
  for (const auto& l : layers_) {
    auto w = l.weight.values();
    out.insert(out.end(), w.begin(), w.end());
    out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return out;
}

void MlpParams::assign_flat(std::span<const double> values) {
  if (values.size() != num_params()) {
    throw ShapeError("assign_flat: " + dims_text(values.size(), num_params()));
  }
  std::size_t k = 0;
  for (auto& l : mutable_layers()) {
    auto& w = l.weight.eigen();
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = values[k++];
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = values[k++];
  }
}

bool operator==(const MlpParams& a, const MlpParams& b) {
  if (!(a.output_ == b.output_) || !a.same_shape(b)) return false;
  for (std::size_t i = 0; i < a.layers_.size(); ++i) {
    if (!(a.layers_[i].weight == b.layers_[i].weight) || a.layers_[i].bias != b.layers_[i].bias) {
      return false;
    }
  }
  return true;
}

double ForwardCache::min_relu_margin() const {
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < pre.size(); ++i) {
    if (pre[i].size() > 0) margin = std::min(margin, pre[i].cwiseAbs().minCoeff());
  }
  return margin;
}

Gradients Gradients::zeros_like(const MlpParams& params) {
  Gradients g;
  g.layers.reserve(params.num_layers());
  for (const auto& l : params.layers()) {
    g.layers.push_back({RowMatrix::Zero(l.weight.eigen().rows(), l.weight.eigen().cols()),
                        Vector::Zero(l.bias.size())});
  }
  return g;
}

Gradients& Gradients::operator+=(const Gradients& other) {
  if (layers.size() != other.layers.size()) throw ShapeError("Gradients: layer count mismatch");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].weight.rows() != other.layers[i].weight.rows() ||
        layers[i].weight.cols() != other.layers[i].weight.cols()) {
      throw ShapeError("Gradients: layer shape mismatch");
    }
    layers[i].weight += other.layers[i].weight;
    layers[i].bias += other.layers[i].bias;
  }
  return *this;
}

Gradients& Gradients::operator*=(double factor) {
  for (auto& l : layers) {
    l.weight *= factor;
    l.bias *= factor;
  }
  if (input_gradient) *input_gradient *= factor;
  return *this;
}

std::vector<double> Gradients::flatten() const {
  std::vector<double> out;
  for (const auto& l : layers) {
    out.insert(out.end(), l.weight.data(), l.weight.data() + l.weight.size());
    out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return out;
}

bool Gradients::matches(const MlpParams& params) const {
  if (layers.size() != params.num_layers()) return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& w = params.layers()[i].weight;
    if (static_cast<std::size_t>(layers[i].weight.rows()) != w.rows() ||
        static_cast<std::size_t>(layers[i].weight.cols()) != w.cols() ||
        layers[i].bias.size() != params.layers()[i].bias.size()) {
      return false;
    }
  }
  return true;
}

ForwardResult mlp_forward(const MlpParams& params, const RowMatrix& input) {
  if (static_cast<std::size_t>(input.cols()) != params.input_dim()) {
    throw ShapeError("mlp_forward: input dim " +
                     dims_text(static_cast<std::size_t>(input.cols()), params.input_dim()));
  }
  ForwardResult result;
  auto& cache = result.cache;
  cache.params_id = params.id();
  cache.params_revision = params.revision();
  const auto& layers = params.layers();
  cache.inputs.reserve(layers.size());
  cache.pre.reserve(layers.size());

  RowMatrix x = input;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    RowMatrix z = x * layers[i].weight.eigen().transpose();
    z.rowwise() += layers[i].bias.transpose();
    cache.inputs.push_back(std::move(x));
    cache.pre.push_back(z);
    if (i + 1 < layers.size()) {
      x = z.cwiseMax(0.0);
    } else {
      apply_output(params.output_activation(), z);
      result.output = std::move(z);
    }
  }
  return result;
}

ForwardResult mlp_forward(const MlpParams& params, const Vector& input) {
  return mlp_forward(params, RowMatrix(input.transpose()));
}

RowMatrix mlp_predict(const MlpParams& params, const RowMatrix& input) {
  if (static_cast<std::size_t>(input.cols()) != params.input_dim()) {
    throw ShapeError("mlp_predict: input dim " +
                     dims_text(static_cast<std::size_t>(input.cols()), params.input_dim()));
  }
  const auto& layers = params.layers();
  RowMatrix x = input;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    RowMatrix z = x * layers[i].weight.eigen().transpose();
    z.rowwise() += layers[i].bias.transpose();
    if (i + 1 < layers.size()) {
      x = z.cwiseMax(0.0);
    } else {
      apply_output(params.output_activation(), z);
      x = std::move(z);
    }
  }
  return x;
}

Vector mlp_predict(const MlpParams& params, const Vector& input) {
  return mlp_predict(params, RowMatrix(input.transpose())).row(0).transpose();
}

Gradients mlp_backward(const MlpParams& params, const ForwardCache& cache,
                       const RowMatrix& upstream, BackwardOptions options) {
  if (cache.params_id != params.id() || cache.params_revision != params.revision()) {
    throw UsageError("mlp_backward: cache does not belong to the current parameters");
  }
  const auto& layers = params.layers();
  if (cache.pre.size() != layers.size() || cache.inputs.size() != layers.size()) {
    throw UsageError("mlp_backward: cache layer count mismatch");
  }
  const Eigen::Index batch = cache.pre.back().rows();
  if (upstream.rows() != batch ||
      static_cast<std::size_t>(upstream.cols()) != params.output_dim()) {
    throw ShapeError("mlp_backward: upstream must be batch x output_dim");
  }

  Gradients grads;
  if (options.parameter_gradients) grads.layers.resize(layers.size());

  // dZ of the output layer.
  RowMatrix delta = upstream;
  const auto& out = params.output_activation();
  if (out.kind == OutputKind::TanhScaled) {
    const auto t = cache.pre.back().array().tanh();
    delta = (delta.array() * out.scale * (1.0 - t.square())).matrix();
  }

  for (std::size_t idx = layers.size(); idx-- > 0;) {
    if (options.parameter_gradients) {
      grads.layers[idx].weight = delta.transpose() * cache.inputs[idx];
      grads.layers[idx].bias = delta.colwise().sum().transpose();
    }
    if (idx == 0 && !options.input_gradient) break;
    RowMatrix dx = delta * layers[idx].weight.eigen();
    if (idx == 0) {
      grads.input_gradient = std::move(dx);
      break;
    }
    // ReLU derivative taken as 0 at the kink.
    delta = (cache.pre[idx - 1].array() > 0.0).select(dx, 0.0);
  }
  return grads;
}

}  // namespace forkrl::nn
