#include "hqss/tensors.hpp"

#include <algorithm>

#include "hqss/colorspace.hpp"

namespace hqss {

torch::Tensor to_network(const LabImage& img) {
  const int h = img.height(), w = img.width();
  auto t = torch::empty({1, 3, h, w}, torch::kFloat32);
  auto acc = t.accessor<float, 4>();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      acc[0][0][y][x] = img.at(y, x, 0) / 50.0f - 1.0f;
      acc[0][1][y][x] = (img.at(y, x, 1) + 128.0f) / 127.5f - 1.0f;
      acc[0][2][y][x] = (img.at(y, x, 2) + 128.0f) / 127.5f - 1.0f;
    }
  return t;
}

LabImage from_network(const torch::Tensor& t) {
  torch::Tensor c = t.detach().to(torch::kCPU, torch::kFloat32).contiguous();
  if (c.dim() == 4) {
    if (c.size(0) != 1) throw ShapeError("from_network expects a single image");
    c = c[0];
  }
  if (c.dim() != 3 || c.size(0) != 3) throw ShapeError("from_network expects [3,H,W]");
  const int h = static_cast<int>(c.size(1)), w = static_cast<int>(c.size(2));
  LabImage out(h, w);
  auto acc = c.accessor<float, 3>();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      out.at(y, x, 0) = std::clamp((acc[0][y][x] + 1.0f) * 50.0f, kLabLMin, kLabLMax);
      out.at(y, x, 1) = std::clamp((acc[1][y][x] + 1.0f) * 127.5f - 128.0f, kLabAbMin, kLabAbMax);
      out.at(y, x, 2) = std::clamp((acc[2][y][x] + 1.0f) * 127.5f - 128.0f, kLabAbMin, kLabAbMax);
    }
  return out;
}

torch::Tensor mask_to_tensor(const BinaryMask& mask) {
  auto t = torch::empty({1, 1, mask.height(), mask.width()}, torch::kFloat32);
  auto acc = t.accessor<float, 4>();
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) acc[0][0][y][x] = mask.at(y, x) ? 1.0f : 0.0f;
  return t;
}

torch::Tensor region_tensor(const RegionIdentity& region) {
  return to_network(region.image) * mask_to_tensor(region.mask);
}

}  // namespace hqss
