#pragma once

#include <filesystem>

#include "dehaze/nn/network.hpp"

namespace dehaze::nn {

// Model container layout (all integers and floats little-endian):
//
//   "dehaze-joint-estimator three-path-r1\n"   architecture revision line
//   "DHZM"                                      magic
//   u32  format version (1)
//   u32  layer count
//   per layer: u8 kind (0 conv, 1 dense), u32 kernel, u32 in, u32 out
//   u8   1 if optimizer state follows, else 0
//   f64  parameters, per layer weights then biases, in descriptor order
//   f64  E[g^2] and then E[dx^2] arrays, same order (only with optimizer state)

inline constexpr const char* kModelHeaderLine = "dehaze-joint-estimator three-path-r1";
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<unsigned char> encode_model(const NetworkParams& params);
/// Throws FormatError (not a model), CorruptFileError (truncated/trailing bytes)
/// or ShapeError naming the first layer that disagrees with the architecture.
NetworkParams decode_model(std::span<const unsigned char> bytes, const std::string& name = "model");

void save_model(const NetworkParams& params, const std::filesystem::path& path);
NetworkParams load_model(const std::filesystem::path& path);

}  // namespace dehaze::nn
