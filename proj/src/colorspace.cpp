#include "hqss/colorspace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace hqss {
namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

// IEC 61966-2-1 linear sRGB → XYZ (D65).
constexpr Mat3 kRgbToXyz = {{{0.4124564, 0.3575761, 0.1804375},
                             {0.2126729, 0.7151522, 0.0721750},
                             {0.0193339, 0.1191920, 0.9503041}}};

Mat3 invert(const Mat3& m) {
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  Mat3 r{};
  r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
  r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
  r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
  r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
  r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
  r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
  r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
  r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
  r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  return r;
}

const Mat3& xyz_to_rgb() {
  static const Mat3 inv = invert(kRgbToXyz);
  return inv;
}

constexpr double kDelta = 6.0 / 29.0;

double srgb_to_linear(double c) { return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4); }

double linear_to_srgb(double c) {
  if (c <= 0.0031308) return 12.92 * c;
  return 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

double lab_f(double t) {
  return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_f_inv(double t) { return t > kDelta ? t * t * t : 3.0 * kDelta * kDelta * (t - 4.0 / 29.0); }

}  // namespace

Lab srgb_to_lab(Rgb rgb) {
  const double lin[3] = {srgb_to_linear(rgb.r), srgb_to_linear(rgb.g), srgb_to_linear(rgb.b)};
  double xyz[3];
  for (int i = 0; i < 3; ++i)
    xyz[i] = kRgbToXyz[i][0] * lin[0] + kRgbToXyz[i][1] * lin[1] + kRgbToXyz[i][2] * lin[2];
  const double fx = lab_f(xyz[0] / kWhiteX);
  const double fy = lab_f(xyz[1] / kWhiteY);
  const double fz = lab_f(xyz[2] / kWhiteZ);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

Rgb lab_to_srgb_unclamped(Lab lab) {
  const double fy = (lab.l + 16.0) / 116.0;
  const double fx = fy + lab.a / 500.0;
  const double fz = fy - lab.b / 200.0;
  const double xyz[3] = {kWhiteX * lab_f_inv(fx), kWhiteY * lab_f_inv(fy), kWhiteZ * lab_f_inv(fz)};
  const Mat3& m = xyz_to_rgb();
  double out[3];
  for (int i = 0; i < 3; ++i)
    out[i] = linear_to_srgb(m[i][0] * xyz[0] + m[i][1] * xyz[1] + m[i][2] * xyz[2]);
  return {out[0], out[1], out[2]};
}

void validate_rgb(const RgbImage& img) {
  for (float v : img.data())
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f)
      throw ValidationError("RGB value " + std::to_string(v) + " outside [0,1]");
}

void validate_lab(const LabImage& img) {
  const auto d = img.data();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const float v = d[i];
    const bool is_l = i % 3 == 0;
    const bool ok = std::isfinite(v) && (is_l ? (v >= kLabLMin && v <= kLabLMax) : (v >= kLabAbMin && v <= kLabAbMax));
    if (!ok) throw ValidationError("LAB value " + std::to_string(v) + " outside valid range");
  }
}

LabImage rgb_to_lab(const RgbImage& img) {
  validate_rgb(img);
  LabImage out(img.height(), img.width());
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); i += 3) {
    const Lab lab = srgb_to_lab({src[i], src[i + 1], src[i + 2]});
    // Clamp the tiny negative L / overshoot that rounding can produce at black and white.
    dst[i] = static_cast<float>(std::clamp(lab.l, 0.0, 100.0));
    dst[i + 1] = static_cast<float>(lab.a);
    dst[i + 2] = static_cast<float>(lab.b);
  }
  return out;
}

RgbImage lab_to_rgb(const LabImage& img) {
  RgbImage out(img.height(), img.width());
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); i += 3) {
    const Rgb rgb = lab_to_srgb_unclamped({src[i], src[i + 1], src[i + 2]});
    const double v[3] = {rgb.r, rgb.g, rgb.b};
    for (int c = 0; c < 3; ++c)
      dst[i + c] = std::isfinite(v[c]) ? static_cast<float>(std::clamp(v[c], 0.0, 1.0)) : 0.0f;
  }
  return out;
}

AbImage take_ab(const LabImage& img) {
  AbImage out(img.height(), img.width());
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    dst[2 * p] = src[3 * p + 1];
    dst[2 * p + 1] = src[3 * p + 2];
  }
  return out;
}

}  // namespace hqss
