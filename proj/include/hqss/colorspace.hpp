#pragma once

#include "hqss/image.hpp"

namespace hqss {

/// Reference white for D65 / 2° observer, Y normalised to 1.
inline constexpr double kWhiteX = 0.95047;
inline constexpr double kWhiteY = 1.0;
inline constexpr double kWhiteZ = 1.08883;

inline constexpr float kLabLMin = 0.0f;
inline constexpr float kLabLMax = 100.0f;
inline constexpr float kLabAbMin = -128.0f;
inline constexpr float kLabAbMax = 127.0f;

/// sRGB → CIE L*a*b* (D65). Throws ValidationError if any channel lies outside [0,1].
LabImage rgb_to_lab(const RgbImage& img);

/// CIE L*a*b* → sRGB, clamping out-of-gamut results to [0,1].
RgbImage lab_to_rgb(const LabImage& img);

/// Channels a*, b* only.
AbImage take_ab(const LabImage& img);

/// Throws ValidationError unless every value is in [0,1] and finite.
void validate_rgb(const RgbImage& img);
/// Throws ValidationError unless L ∈ [0,100], a,b ∈ [-128,127] and all finite.
void validate_lab(const LabImage& img);

// Single-pixel helpers, exposed for tests and the toy generator.
struct Lab {
  double l, a, b;
};
struct Rgb {
  double r, g, b;
};
Lab srgb_to_lab(Rgb rgb);
/// Unclamped inverse; components may leave [0,1] for out-of-gamut input.
Rgb lab_to_srgb_unclamped(Lab lab);

}  // namespace hqss
