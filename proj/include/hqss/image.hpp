#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hqss/error.hpp"

namespace hqss {

/// Interleaved H×W×C float image. `Tag` keeps colour spaces from mixing.
template <int Channels, class Tag>
class PixelBuffer {
 public:
  static constexpr int kChannels = Channels;

  PixelBuffer() = default;
  PixelBuffer(int height, int width) : height_(height), width_(width) {
    if (height < 1 || width < 1) throw ShapeError("image dimensions must be positive");
    pixels_.assign(static_cast<std::size_t>(height) * width * Channels, 0.0f);
  }
  PixelBuffer(int height, int width, std::vector<float> pixels)
      : height_(height), width_(width), pixels_(std::move(pixels)) {
    if (height < 1 || width < 1) throw ShapeError("image dimensions must be positive");
    if (pixels_.size() != static_cast<std::size_t>(height) * width * Channels)
      throw ShapeError("pixel buffer size does not match H*W*C");
  }

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(height_) * width_; }

  float& at(int y, int x, int c) { return pixels_[index(y, x, c)]; }
  float at(int y, int x, int c) const { return pixels_[index(y, x, c)]; }

  std::span<float> data() noexcept { return pixels_; }
  std::span<const float> data() const noexcept { return pixels_; }

  bool same_shape(int height, int width) const noexcept { return height_ == height && width_ == width; }
  template <class Other>
  bool same_shape(const Other& o) const noexcept {
    return height_ == o.height() && width_ == o.width();
  }

  friend bool operator==(const PixelBuffer&, const PixelBuffer&) = default;

 private:
  std::size_t index(int y, int x, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * Channels + c;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<float> pixels_;
};

struct RgbTag {};
struct LabTag {};
struct AbTag {};

/// sRGB (D65) values in [0,1].
using RgbImage = PixelBuffer<3, RgbTag>;
/// CIE L*a*b*: L in [0,100], a/b roughly [-128,127].
using LabImage = PixelBuffer<3, LabTag>;
/// The a*, b* planes of a LabImage.
using AbImage = PixelBuffer<2, AbTag>;

enum class MaskKind { kShadow, kNonShadow, kDilated, kGeneric };

/// H×W mask with values in {0,1}.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int height, int width, MaskKind kind = MaskKind::kGeneric);
  BinaryMask(int height, int width, std::vector<std::uint8_t> values, MaskKind kind = MaskKind::kGeneric);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  MaskKind kind() const noexcept { return kind_; }
  void set_kind(MaskKind kind) noexcept { kind_ = kind; }

  std::uint8_t at(int y, int x) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  void set(int y, int x, bool on) { values_[static_cast<std::size_t>(y) * width_ + x] = on ? 1 : 0; }
  std::span<const std::uint8_t> values() const noexcept { return values_; }

  std::size_t count() const noexcept;
  double area_fraction() const noexcept;
  bool empty() const noexcept { return count() == 0; }

  template <class Img>
  bool same_shape(const Img& o) const noexcept {
    return height_ == o.height() && width_ == o.width();
  }

  BinaryMask complement() const;
  /// Element-wise AND. Shapes must match.
  BinaryMask operator&(const BinaryMask& other) const;
  /// True when no pixel is set in both masks.
  bool disjoint(const BinaryMask& other) const;
  /// True when every pixel set here is also set in `other`.
  bool subset_of(const BinaryMask& other) const;

  static BinaryMask filled(int height, int width, bool on, MaskKind kind = MaskKind::kGeneric);

  friend bool operator==(const BinaryMask& a, const BinaryMask& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ && a.values_ == b.values_;
  }

 private:
  int height_ = 0;
  int width_ = 0;
  MaskKind kind_ = MaskKind::kGeneric;
  std::vector<std::uint8_t> values_;
};

std::string to_string(MaskKind kind);

// Resampling. Bilinear uses half-pixel centres; resizing to the same size is the identity.

template <int C, class Tag>
PixelBuffer<C, Tag> resize_bilinear(const PixelBuffer<C, Tag>& src, int height, int width);
BinaryMask resize_nearest(const BinaryMask& src, int height, int width);

template <int C, class Tag>
PixelBuffer<C, Tag> crop(const PixelBuffer<C, Tag>& src, int top, int left, int height, int width);
BinaryMask crop(const BinaryMask& src, int top, int left, int height, int width);

template <int C, class Tag>
PixelBuffer<C, Tag> flip_horizontal(const PixelBuffer<C, Tag>& src);
BinaryMask flip_horizontal(const BinaryMask& src);

}  // namespace hqss

#include "hqss/image_impl.hpp"
