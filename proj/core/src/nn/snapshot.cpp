#include "forkrl/nn/snapshot.hpp"

#include <cstring>
#include <fstream>

namespace forkrl::nn {

namespace {

constexpr std::string_view kMagic = "FORKMLP";

void write_grads(BinaryWriter& w, const Gradients& g) {
  w.u32(static_cast<std::uint32_t>(g.layers.size()));
  for (const auto& l : g.layers) {
    w.f64s(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
    w.f64s(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
}

Gradients read_grads(BinaryReader& r, const MlpParams& owner) {
  Gradients g = Gradients::zeros_like(owner);
  if (r.u32() != g.layers.size()) throw FormatError("optimizer state: layer count mismatch");
  for (auto& l : g.layers) {
    auto w = r.f64s();
    auto b = r.f64s();
    if (w.size() != static_cast<std::size_t>(l.weight.size()) ||
        b.size() != static_cast<std::size_t>(l.bias.size())) {
      throw FormatError("optimizer state: layer size mismatch");
    }
    std::memcpy(l.weight.data(), w.data(), w.size() * sizeof(double));
    std::memcpy(l.bias.data(), b.data(), b.size() * sizeof(double));
  }
  return g;
}

}  // namespace

void write_params(BinaryWriter& w, const MlpParams& params) {
  w.u32(static_cast<std::uint32_t>(params.num_layers()));
  w.u8(params.output_activation().kind == OutputKind::TanhScaled ? 1 : 0);
  w.f64(params.output_activation().scale);
  for (const auto& l : params.layers()) {
    w.u64(l.weight.rows());
    w.u64(l.weight.cols());
    auto values = l.weight.values();
    w.f64s(values.data(), values.size());
    w.f64s(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
}

MlpParams read_params(BinaryReader& r) {
  const auto n_layers = r.u32();
  const auto kind = r.u8();
  if (kind > 1) throw FormatError("snapshot: unknown output activation");
  const double scale = r.f64();
  const OutputActivation out =
      kind == 1 ? OutputActivation::tanh_scaled(scale) : OutputActivation::identity();
  std::vector<Layer> layers;
  layers.reserve(n_layers);
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    const auto rows = r.u64();
    const auto cols = r.u64();
    auto values = r.f64s();
    auto bias = r.f64s();
    if (bias.size() != rows) throw FormatError("snapshot: bias length mismatch");
    Vector b = Eigen::Map<const Vector>(bias.data(), static_cast<Eigen::Index>(bias.size()));
    try {
      layers.push_back({Matrix(rows, cols, std::move(values)), std::move(b)});
    } catch (const ShapeError& e) {
      throw FormatError(std::string("snapshot: ") + e.what());
    }
  }
  try {
    return MlpParams(std::move(layers), out);
  } catch (const ShapeError& e) {
    throw FormatError(std::string("snapshot: ") + e.what());
  }
}

void write_adam(BinaryWriter& w, const AdamState& state) {
  const auto& h = state.hyper();
  w.f64(h.learning_rate);
  w.f64(h.beta1);
  w.f64(h.beta2);
  w.f64(h.epsilon);
  w.u64(state.step_count());
  write_grads(w, state.first_moment());
  write_grads(w, state.second_moment());
}

AdamState read_adam(BinaryReader& r, const MlpParams& owner) {
  AdamHyper h;
  h.learning_rate = r.f64();
  h.beta1 = r.f64();
  h.beta2 = r.f64();
  h.epsilon = r.f64();
  AdamState state(owner, h);
  AdamStateAccess::steps(state) = r.u64();
  AdamStateAccess::first(state) = read_grads(r, owner);
  AdamStateAccess::second(state) = read_grads(r, owner);
  return state;
}

void save_params(const std::filesystem::path& path, const MlpParams& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  BinaryWriter w(out);
  w.magic(kMagic);
  w.u32(kSnapshotVersion);
  write_params(w, params);
}

MlpParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  BinaryReader r(in);
  r.expect_magic(kMagic);
  const auto version = r.u32();
  if (version != kSnapshotVersion) {
    throw FormatError("snapshot version " + std::to_string(version) + " is not supported");
  }
  return read_params(r);
}

std::uint64_t checksum(const MlpParams& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const double* p, std::size_t n) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n * sizeof(double); ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& l : params.layers()) {
    auto v = l.weight.values();
    mix(v.data(), v.size());
    mix(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
  return h;
}

}  // namespace forkrl::nn
