#include "hqss/image.hpp"

#include <algorithm>
#include <numeric>

namespace hqss {

BinaryMask::BinaryMask(int height, int width, MaskKind kind) : height_(height), width_(width), kind_(kind) {
  if (height < 1 || width < 1) throw ShapeError("mask dimensions must be positive");
  values_.assign(static_cast<std::size_t>(height) * width, 0);
}

BinaryMask::BinaryMask(int height, int width, std::vector<std::uint8_t> values, MaskKind kind)
    : height_(height), width_(width), kind_(kind), values_(std::move(values)) {
  if (height < 1 || width < 1) throw ShapeError("mask dimensions must be positive");
  if (values_.size() != static_cast<std::size_t>(height) * width)
    throw ShapeError("mask buffer size does not match H*W");
  if (std::any_of(values_.begin(), values_.end(), [](std::uint8_t v) { return v > 1; }))
    throw ValidationError("mask values must be 0 or 1");
}

std::size_t BinaryMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), std::uint8_t{1}));
}

double BinaryMask::area_fraction() const noexcept {
  return values_.empty() ? 0.0 : static_cast<double>(count()) / static_cast<double>(values_.size());
}

BinaryMask BinaryMask::complement() const {
  BinaryMask out = *this;
  for (auto& v : out.values_) v = 1 - v;
  return out;
}

BinaryMask BinaryMask::operator&(const BinaryMask& other) const {
  if (!same_shape(other)) throw ShapeError("mask shapes differ");
  BinaryMask out = *this;
  for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] = values_[i] & other.values_[i];
  return out;
}

bool BinaryMask::disjoint(const BinaryMask& other) const {
  if (!same_shape(other)) throw ShapeError("mask shapes differ");
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (values_[i] && other.values_[i]) return false;
  return true;
}

bool BinaryMask::subset_of(const BinaryMask& other) const {
  if (!same_shape(other)) throw ShapeError("mask shapes differ");
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (values_[i] && !other.values_[i]) return false;
  return true;
}

BinaryMask BinaryMask::filled(int height, int width, bool on, MaskKind kind) {
  return BinaryMask(height, width,
                    std::vector<std::uint8_t>(static_cast<std::size_t>(height) * width, on ? 1 : 0), kind);
}

std::string to_string(MaskKind kind) {
  switch (kind) {
    case MaskKind::kShadow: return "shadow";
    case MaskKind::kNonShadow: return "nonshadow";
    case MaskKind::kDilated: return "dilated";
    case MaskKind::kGeneric: break;
  }
  return "generic";
}

BinaryMask resize_nearest(const BinaryMask& src, int height, int width) {
  if (src.height() == height && src.width() == width) return src;
  BinaryMask out(height, width, src.kind());
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(static_cast<int>((y + 0.5) * src.height() / height), src.height() - 1);
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(static_cast<int>((x + 0.5) * src.width() / width), src.width() - 1);
      out.set(y, x, src.at(sy, sx) != 0);
    }
  }
  return out;
}

BinaryMask crop(const BinaryMask& src, int top, int left, int height, int width) {
  if (top < 0 || left < 0 || top + height > src.height() || left + width > src.width())
    throw ShapeError("crop window exceeds mask bounds");
  BinaryMask out(height, width, src.kind());
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) out.set(y, x, src.at(top + y, left + x) != 0);
  return out;
}

BinaryMask flip_horizontal(const BinaryMask& src) {
  BinaryMask out(src.height(), src.width(), src.kind());
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x) out.set(y, x, src.at(y, src.width() - 1 - x) != 0);
  return out;
}

}  // namespace hqss
