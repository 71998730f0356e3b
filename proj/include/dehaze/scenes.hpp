#pragma once

// Procedural clean-image + depth pairs for smoke training, tests and demos.

#include <cstdint>

#include "dehaze/dataset.hpp"

namespace dehaze {

/// Random-coloured Voronoi cells (roughly `cell` pixels across) with fine
/// per-pixel noise; values in [0,1].
RgbImage procedural_texture(std::size_t height, std::size_t width, Rng& rng, double cell = 8.0);

/// Linear ramp in a random direction spanning [0,1] over the image.
GrayMap depth_ramp(std::size_t height, std::size_t width, Rng& rng);

/// Texture plus ramp with a fully valid mask.
DepthItem procedural_scene(std::size_t height, std::size_t width, std::uint64_t seed);

DepthDataset procedural_dataset(std::size_t count, std::size_t height, std::size_t width,
                                std::uint64_t seed);

}  // namespace dehaze
