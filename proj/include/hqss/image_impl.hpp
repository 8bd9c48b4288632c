#pragma once

// Template definitions for image.hpp.

#include <algorithm>
#include <cmath>

namespace hqss {

template <int C, class Tag>
PixelBuffer<C, Tag> resize_bilinear(const PixelBuffer<C, Tag>& src, int height, int width) {
  if (src.same_shape(height, width)) return src;
  PixelBuffer<C, Tag> out(height, width);
  const double sy = static_cast<double>(src.height()) / height;
  const double sx = static_cast<double>(src.width()) / width;
  for (int y = 0; y < height; ++y) {
    const double fy = std::max(0.0, (y + 0.5) * sy - 0.5);
    const int y0 = std::min(static_cast<int>(fy), src.height() - 1);
    const int y1 = std::min(y0 + 1, src.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::max(0.0, (x + 0.5) * sx - 0.5);
      const int x0 = std::min(static_cast<int>(fx), src.width() - 1);
      const int x1 = std::min(x0 + 1, src.width() - 1);
      const double wx = fx - x0;
      for (int c = 0; c < C; ++c) {
        const double top = src.at(y0, x0, c) * (1.0 - wx) + src.at(y0, x1, c) * wx;
        const double bottom = src.at(y1, x0, c) * (1.0 - wx) + src.at(y1, x1, c) * wx;
        out.at(y, x, c) = static_cast<float>(top * (1.0 - wy) + bottom * wy);
      }
    }
  }
  return out;
}

template <int C, class Tag>
PixelBuffer<C, Tag> crop(const PixelBuffer<C, Tag>& src, int top, int left, int height, int width) {
  if (top < 0 || left < 0 || top + height > src.height() || left + width > src.width())
    throw ShapeError("crop window exceeds image bounds");
  PixelBuffer<C, Tag> out(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < C; ++c) out.at(y, x, c) = src.at(top + y, left + x, c);
  return out;
}

template <int C, class Tag>
PixelBuffer<C, Tag> flip_horizontal(const PixelBuffer<C, Tag>& src) {
  PixelBuffer<C, Tag> out(src.height(), src.width());
  const int w = src.width();
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < C; ++c) out.at(y, x, c) = src.at(y, w - 1 - x, c);
  return out;
}

}  // namespace hqss
