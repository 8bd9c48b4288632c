#pragma once

#include <torch/torch.h>

#include "hqss/dataio.hpp"
#include "hqss/image.hpp"

namespace hqss {

// Networks see LAB affinely mapped to [-1,1] per channel:
//   L ∈ [0,100] ↦ L/50 − 1,   a,b ∈ [-128,127] ↦ (v + 128)/127.5 − 1.

/// [1,3,H,W] float tensor in network space.
torch::Tensor to_network(const LabImage& img);
/// Inverse of to_network, clamped to valid LAB ranges. Accepts [1,3,H,W] or [3,H,W].
LabImage from_network(const torch::Tensor& t);
/// [1,1,H,W] float tensor of 0/1.
torch::Tensor mask_to_tensor(const BinaryMask& mask);
/// Network-space image multiplied by its mask: zeros outside the region.
torch::Tensor region_tensor(const RegionIdentity& region);

}  // namespace hqss
