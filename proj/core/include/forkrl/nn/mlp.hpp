#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "forkrl/nn/matrix.hpp"

namespace forkrl::nn {

enum class HiddenActivation { ReLU };

enum class OutputKind { Identity, TanhScaled };

struct OutputActivation {
  OutputKind kind = OutputKind::Identity;
  double scale = 1.0;  // only meaningful for TanhScaled

  static OutputActivation identity() { return {}; }
  static OutputActivation tanh_scaled(double scale) { return {OutputKind::TanhScaled, scale}; }

  friend bool operator==(const OutputActivation&, const OutputActivation&) = default;
};

// Affine layer y = W x + b with W stored out_dim x in_dim.
struct Layer {
  Matrix weight;
  Vector bias;
};

/// Parameters of a fully connected network with ReLU hidden layers.
///
/// Every instance carries an identity and a revision counter. Forward caches
/// record both so that a backward pass against modified or different
/// parameters is rejected instead of silently producing wrong gradients.
/// Copies receive a fresh identity.
class MlpParams {
 public:
  MlpParams() = default;
  MlpParams(std::vector<Layer> layers, OutputActivation output);

  MlpParams(const MlpParams& other);
  MlpParams& operator=(const MlpParams& other);
  MlpParams(MlpParams&&) noexcept = default;
  MlpParams& operator=(MlpParams&&) noexcept = default;

  // Weights and biases drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  static MlpParams uniform_init(std::span<const std::size_t> dims, OutputActivation output,
                                std::mt19937_64& rng);

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t num_layers() const { return layers_.size(); }
  std::size_t num_params() const;

  HiddenActivation hidden_activation() const { return HiddenActivation::ReLU; }
  const OutputActivation& output_activation() const { return output_; }
  const std::vector<Layer>& layers() const { return layers_; }
  // Invalidates outstanding forward caches.
  std::vector<Layer>& mutable_layers();

  std::uint64_t id() const { return id_; }
  std::uint64_t revision() const { return revision_; }

  bool same_shape(const MlpParams& other) const;

  // Row-major weights then bias, layer by layer.
  std::vector<double> flatten() const;
  void assign_flat(std::span<const double> values);

  friend bool operator==(const MlpParams& a, const MlpParams& b);

 private:
  static std::uint64_t next_id();

  std::vector<Layer> layers_;
  OutputActivation output_;
  std::uint64_t id_ = next_id();
  std::uint64_t revision_ = 0;
};

struct ForwardCache {
  std::uint64_t params_id = 0;
  std::uint64_t params_revision = 0;
  std::vector<RowMatrix> inputs;  // input to each layer
  std::vector<RowMatrix> pre;     // pre-activation of each layer

  // Smallest |pre-activation| over all ReLU units; distance to the kink.
  double min_relu_margin() const;
};

struct ForwardResult {
  RowMatrix output;
  ForwardCache cache;
};

struct LayerGrad {
  RowMatrix weight;
  Vector bias;
};

struct Gradients {
  std::vector<LayerGrad> layers;
  std::optional<RowMatrix> input_gradient;

  static Gradients zeros_like(const MlpParams& params);
  // Accumulates parameter gradients; input gradients are not combined.
  Gradients& operator+=(const Gradients& other);
  Gradients& operator*=(double factor);
  std::vector<double> flatten() const;
  bool matches(const MlpParams& params) const;
};

// Batched forward pass: one sample per row.
ForwardResult mlp_forward(const MlpParams& params, const RowMatrix& input);
// Single-sample forward pass.
ForwardResult mlp_forward(const MlpParams& params, const Vector& input);
// Forward pass without keeping activations.
RowMatrix mlp_predict(const MlpParams& params, const RowMatrix& input);
Vector mlp_predict(const MlpParams& params, const Vector& input);

struct BackwardOptions {
  bool parameter_gradients = true;
  bool input_gradient = true;
};

/// Backpropagates `upstream` (dLoss/dOutput, batch x out_dim). Parameter
/// gradients are summed over the batch; the input gradient has one row per
/// sample. Throws UsageError if the cache was produced by other parameters
/// or by an older revision of these.
Gradients mlp_backward(const MlpParams& params, const ForwardCache& cache,
                       const RowMatrix& upstream, BackwardOptions options = {});

}  // namespace forkrl::nn
