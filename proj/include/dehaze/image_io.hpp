#pragma once

#include <cstdint>
#include <filesystem>

#include "dehaze/image.hpp"

namespace dehaze {

// Supported rasters: PNG (8/16-bit) and binary PNM (P6 colour, P5 gray).
// The format is detected from the file signature on read and from the
// extension (.png, .ppm, .pgm) on write.

/// Reads an RGB raster scaled to [0,1]. Grayscale files are replicated to three channels.
/// Throws IoError (unreadable), FormatError (unknown signature), CorruptFileError (bad contents).
RgbImage read_image(const std::filesystem::path& path);

/// Clamps to [0,1] and stores round(v*255) as 8-bit RGB.
void write_image(const RgbImage& image, const std::filesystem::path& path);

/// Reads a single-channel raster (P5 or gray PNG) scaled by its maximum code value.
GrayMap read_gray(const std::filesystem::path& path);

enum class GrayBits { k8 = 8, k16 = 16 };

/// Clamps to [0,1] and quantizes to the requested bit depth.
void write_gray(const GrayMap& map, const std::filesystem::path& path, GrayBits bits = GrayBits::k16);

/// Clamp-and-round quantizer shared by the writers.
std::uint16_t quantize(double value, std::uint16_t max_code);

}  // namespace dehaze
