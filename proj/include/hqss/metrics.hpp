#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hqss/image.hpp"

namespace hqss {

/// How the three LAB channel differences of one pixel are combined.
enum class ChannelReduction { kSum, kMean };

/// PSNR reported for identical inputs.
inline constexpr double kPsnrCap = 100.0;

/// Global average of the per-pixel LAB error over every masked pixel of every image.
double rmse_star(std::span<const LabImage> preds, std::span<const LabImage> gts, std::span<const BinaryMask> masks,
                 ChannelReduction reduction = ChannelReduction::kSum);

/// Per-image masked mean, then the unweighted mean over images with a non-empty mask.
double rmse(std::span<const LabImage> preds, std::span<const LabImage> gts, std::span<const BinaryMask> masks,
            ChannelReduction reduction = ChannelReduction::kSum);

/// 10·log10(1/MSE) over (masked) pixels and channels of [0,1] RGB. Capped at kPsnrCap.
double psnr(const RgbImage& pred, const RgbImage& gt);
double psnr(const RgbImage& pred, const RgbImage& gt, const BinaryMask& mask);

/// Channel-averaged SSIM map: 11×11 Gaussian window (σ = 1.5), K1 = 0.01, K2 = 0.03,
/// data range 1, reflected borders. Same size as the input.
std::vector<double> ssim_map(const RgbImage& pred, const RgbImage& gt);
double ssim(const RgbImage& pred, const RgbImage& gt);
double ssim(const RgbImage& pred, const RgbImage& gt, const BinaryMask& mask);

struct RegionMetrics {
  double rmse_star = 0.0;
  double rmse = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct EvalReport {
  std::map<std::string, RegionMetrics> regions;  // "shadow", "nonshadow", "whole"
  std::size_t image_count = 0;
};

struct EvalItem {
  std::string name;
  RgbImage pred;
  RgbImage gt;
  BinaryMask mask;
};

struct EvalOptions {
  int resize_height = 256;
  int resize_width = 256;
  ChannelReduction reduction = ChannelReduction::kSum;
};

/// Resizes every item (bilinear images, nearest masks), then scores each region.
EvalReport evaluate(const std::vector<EvalItem>& items, const EvalOptions& opts = {});

/// Matches files by name across the three directories. Throws DataError listing unmatched names.
EvalReport evaluate(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir,
                    const std::filesystem::path& mask_dir, const EvalOptions& opts = {});

std::string format_table(const EvalReport& report);
std::string to_json_string(const EvalReport& report);

}  // namespace hqss
