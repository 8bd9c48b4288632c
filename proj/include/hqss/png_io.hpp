#pragma once

#include <filesystem>

#include "hqss/image.hpp"

namespace hqss {

/// Reads any 8/16-bit PNG as RGB in [0,1]. Gray is replicated, alpha dropped.
RgbImage read_png_rgb(const std::filesystem::path& path);

/// Writes 8-bit RGB, rounding to nearest and clamping to [0,1].
void write_png_rgb(const std::filesystem::path& path, const RgbImage& img);

/// Reads a PNG as a mask: pixels whose gray level is ≥ 128 (of 255) are set.
BinaryMask read_png_mask(const std::filesystem::path& path, MaskKind kind = MaskKind::kGeneric);

/// Writes a single-channel 8-bit mask (0 / 255).
void write_png_mask(const std::filesystem::path& path, const BinaryMask& mask);

}  // namespace hqss
