#pragma once

#include <filesystem>

#include "forkrl/binary_io.hpp"
#include "forkrl/nn/adam.hpp"
#include "forkrl/nn/mlp.hpp"

namespace forkrl::nn {

inline constexpr std::uint32_t kSnapshotVersion = 1;

// Parameter snapshot file: "FORKMLP" magic, u32 version, then the body
// written by write_params. See docs/formats.md.
void save_params(const std::filesystem::path& path, const MlpParams& params);
MlpParams load_params(const std::filesystem::path& path);

// Unframed bodies, embedded in checkpoints.
void write_params(BinaryWriter& w, const MlpParams& params);
MlpParams read_params(BinaryReader& r);
void write_adam(BinaryWriter& w, const AdamState& state);
AdamState read_adam(BinaryReader& r, const MlpParams& owner);

// FNV-1a over the raw bytes of every parameter, for trajectory comparisons.
std::uint64_t checksum(const MlpParams& params);

}  // namespace forkrl::nn
