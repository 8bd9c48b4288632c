#include "hqss/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <set>
#include <sstream>

#include "hqss/colorspace.hpp"
#include "hqss/png_io.hpp"

namespace hqss {

namespace fs = std::filesystem;

namespace {

void check_lists(std::size_t p, std::size_t g, std::size_t m) {
  if (p != g || p != m) throw ShapeError("prediction, ground-truth and mask lists differ in length");
}

struct MaskedSum {
  double error = 0.0;
  std::size_t pixels = 0;
};

MaskedSum masked_lab_error(const LabImage& pred, const LabImage& gt, const BinaryMask& mask,
                           ChannelReduction reduction) {
  if (!pred.same_shape(gt) || !mask.same_shape(pred)) throw ShapeError("metric inputs differ in shape");
  const double scale = reduction == ChannelReduction::kMean ? 1.0 / 3.0 : 1.0;
  MaskedSum s;
  for (int y = 0; y < pred.height(); ++y)
    for (int x = 0; x < pred.width(); ++x) {
      if (!mask.at(y, x)) continue;
      double e = 0.0;
      for (int c = 0; c < 3; ++c) e += std::abs(static_cast<double>(pred.at(y, x, c)) - gt.at(y, x, c));
      s.error += e * scale;
      ++s.pixels;
    }
  return s;
}

double psnr_from_mse(double mse) {
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double masked_mse(const RgbImage& pred, const RgbImage& gt, const BinaryMask* mask) {
  if (!pred.same_shape(gt) || (mask && !mask->same_shape(pred))) throw ShapeError("metric inputs differ in shape");
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < pred.height(); ++y)
    for (int x = 0; x < pred.width(); ++x) {
      if (mask && !mask->at(y, x)) continue;
      for (int c = 0; c < 3; ++c) {
        const double d = static_cast<double>(pred.at(y, x, c)) - gt.at(y, x, c);
        sum += d * d;
      }
      n += 3;
    }
  if (n == 0) throw ValidationError("PSNR over an empty mask");
  return sum / static_cast<double>(n);
}

constexpr int kSsimRadius = 5;
constexpr double kSsimSigma = 1.5;

std::array<double, 2 * kSsimRadius + 1> gaussian_taps() {
  std::array<double, 2 * kSsimRadius + 1> taps{};
  double total = 0.0;
  for (int i = -kSsimRadius; i <= kSsimRadius; ++i) {
    taps[i + kSsimRadius] = std::exp(-0.5 * i * i / (kSsimSigma * kSsimSigma));
    total += taps[i + kSsimRadius];
  }
  for (auto& t : taps) t /= total;
  return taps;
}

// Half-sample symmetric reflection: -1 → 0, n → n-1.
int reflect(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
  }
  return i;
}

std::vector<double> gaussian_blur(const std::vector<double>& src, int h, int w) {
  static const auto taps = gaussian_taps();
  std::vector<double> tmp(src.size()), out(src.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -kSsimRadius; k <= kSsimRadius; ++k)
        acc += taps[k + kSsimRadius] * src[static_cast<std::size_t>(y) * w + reflect(x + k, w)];
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -kSsimRadius; k <= kSsimRadius; ++k)
        acc += taps[k + kSsimRadius] * tmp[static_cast<std::size_t>(reflect(y + k, h)) * w + x];
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  return out;
}

}  // namespace

double rmse_star(std::span<const LabImage> preds, std::span<const LabImage> gts, std::span<const BinaryMask> masks,
                 ChannelReduction reduction) {
  check_lists(preds.size(), gts.size(), masks.size());
  double error = 0.0;
  std::size_t pixels = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const MaskedSum s = masked_lab_error(preds[i], gts[i], masks[i], reduction);
    error += s.error;
    pixels += s.pixels;
  }
  return pixels == 0 ? 0.0 : error / static_cast<double>(pixels);
}

double rmse(std::span<const LabImage> preds, std::span<const LabImage> gts, std::span<const BinaryMask> masks,
            ChannelReduction reduction) {
  check_lists(preds.size(), gts.size(), masks.size());
  double total = 0.0;
  std::size_t images = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const MaskedSum s = masked_lab_error(preds[i], gts[i], masks[i], reduction);
    if (s.pixels == 0) continue;
    total += s.error / static_cast<double>(s.pixels);
    ++images;
  }
  return images == 0 ? 0.0 : total / static_cast<double>(images);
}

double psnr(const RgbImage& pred, const RgbImage& gt) { return psnr_from_mse(masked_mse(pred, gt, nullptr)); }

double psnr(const RgbImage& pred, const RgbImage& gt, const BinaryMask& mask) {
  return psnr_from_mse(masked_mse(pred, gt, &mask));
}

std::vector<double> ssim_map(const RgbImage& pred, const RgbImage& gt) {
  if (!pred.same_shape(gt)) throw ShapeError("SSIM inputs differ in shape");
  const int h = pred.height(), w = pred.width();
  const std::size_t n = pred.pixel_count();
  constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
  constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);

  std::vector<double> result(n, 0.0);
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = pred.data()[3 * i + c];
      y[i] = gt.data()[3 * i + c];
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mx = gaussian_blur(x, h, w), my = gaussian_blur(y, h, w);
    const auto mxx = gaussian_blur(xx, h, w), myy = gaussian_blur(yy, h, w), mxy = gaussian_blur(xy, h, w);
    for (std::size_t i = 0; i < n; ++i) {
      const double vx = mxx[i] - mx[i] * mx[i];
      const double vy = myy[i] - my[i] * my[i];
      const double cov = mxy[i] - mx[i] * my[i];
      const double num = (2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2);
      const double den = (mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2);
      result[i] += num / den / 3.0;
    }
  }
  return result;
}

double ssim(const RgbImage& pred, const RgbImage& gt) {
  const auto map = ssim_map(pred, gt);
  double sum = 0.0;
  for (double v : map) sum += v;
  return sum / static_cast<double>(map.size());
}

double ssim(const RgbImage& pred, const RgbImage& gt, const BinaryMask& mask) {
  if (!mask.same_shape(pred)) throw ShapeError("SSIM mask differs in shape");
  const auto map = ssim_map(pred, gt);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < map.size(); ++i)
    if (mask.values()[i]) {
      sum += map[i];
      ++n;
    }
  if (n == 0) throw ValidationError("SSIM over an empty mask");
  return sum / static_cast<double>(n);
}

EvalReport evaluate(const std::vector<EvalItem>& items, const EvalOptions& opts) {
  const std::size_t n = items.size();
  std::vector<RgbImage> pred_rgb, gt_rgb;
  std::vector<LabImage> pred_lab, gt_lab;
  std::map<std::string, std::vector<BinaryMask>> masks;
  pred_rgb.reserve(n);
  gt_rgb.reserve(n);
  for (const auto& item : items) {
    if (!item.pred.same_shape(item.gt) || !item.mask.same_shape(item.pred))
      throw ShapeError("evaluation triple " + item.name + " differs in shape");
    pred_rgb.push_back(resize_bilinear(item.pred, opts.resize_height, opts.resize_width));
    gt_rgb.push_back(resize_bilinear(item.gt, opts.resize_height, opts.resize_width));
    // Bilinear interpolation of in-range values stays in range; clamp guards against rounding.
    for (auto* img : {&pred_rgb.back(), &gt_rgb.back()})
      for (float& v : img->data()) v = std::clamp(v, 0.0f, 1.0f);
    pred_lab.push_back(rgb_to_lab(pred_rgb.back()));
    gt_lab.push_back(rgb_to_lab(gt_rgb.back()));
    BinaryMask m = resize_nearest(item.mask, opts.resize_height, opts.resize_width);
    masks["nonshadow"].push_back(m.complement());
    masks["whole"].push_back(BinaryMask::filled(opts.resize_height, opts.resize_width, true));
    masks["shadow"].push_back(std::move(m));
  }

  EvalReport report;
  report.image_count = n;
  for (const auto& [region, region_masks] : masks) {
    RegionMetrics rm;
    rm.rmse_star = rmse_star(pred_lab, gt_lab, region_masks, opts.reduction);
    rm.rmse = rmse(pred_lab, gt_lab, region_masks, opts.reduction);
    double psnr_sum = 0.0, ssim_sum = 0.0;
    std::size_t scored = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (region_masks[i].empty()) continue;
      psnr_sum += psnr(pred_rgb[i], gt_rgb[i], region_masks[i]);
      ssim_sum += ssim(pred_rgb[i], gt_rgb[i], region_masks[i]);
      ++scored;
    }
    rm.psnr = scored ? psnr_sum / static_cast<double>(scored) : kPsnrCap;
    rm.ssim = scored ? ssim_sum / static_cast<double>(scored) : 1.0;
    report.regions[region] = rm;
  }
  return report;
}

EvalReport evaluate(const fs::path& pred_dir, const fs::path& gt_dir, const fs::path& mask_dir,
                    const EvalOptions& opts) {
  auto list = [](const fs::path& dir) {
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
    std::set<std::string> names;
    for (const auto& de : fs::directory_iterator(dir))
      if (de.is_regular_file() && de.path().extension() == ".png") names.insert(de.path().filename().string());
    return names;
  };
  const auto preds = list(pred_dir), gts = list(gt_dir), masks = list(mask_dir);
  std::vector<std::string> unmatched;
  for (const auto& s : {preds, gts, masks})
    for (const auto& name : s)
      if (!preds.count(name) || !gts.count(name) || !masks.count(name)) unmatched.push_back(name);
  if (!unmatched.empty()) {
    std::sort(unmatched.begin(), unmatched.end());
    unmatched.erase(std::unique(unmatched.begin(), unmatched.end()), unmatched.end());
    std::string msg = "unmatched files:";
    for (const auto& u : unmatched) msg += " " + u;
    throw DataError(msg);
  }
  std::vector<EvalItem> items;
  for (const auto& name : preds)
    items.push_back({name, read_png_rgb(pred_dir / name), read_png_rgb(gt_dir / name),
                     read_png_mask(mask_dir / name, MaskKind::kShadow)});
  return evaluate(items, opts);
}

std::string format_table(const EvalReport& report) {
  auto get = [&](const char* region) {
    auto it = report.regions.find(region);
    return it == report.regions.end() ? RegionMetrics{} : it->second;
  };
  const RegionMetrics s = get("shadow"), ns = get("nonshadow"), wh = get("whole");
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof(line), "%-14s| %-31s| %-23s| %-23s\n", "", "Shadow Region", "Non-Shadow Region",
                "Whole Image");
  os << line;
  std::snprintf(line, sizeof(line), "%-14s| %7s %7s %7s %7s | %7s %7s %7s | %7s %7s %7s\n", "images", "RMSE*",
                "RMSE", "PSNR", "SSIM", "RMSE", "PSNR", "SSIM", "RMSE", "PSNR", "SSIM");
  os << line;
  std::snprintf(line, sizeof(line), "%-14zu| %7.2f %7.2f %7.2f %7.3f | %7.2f %7.2f %7.3f | %7.2f %7.2f %7.3f\n",
                report.image_count, s.rmse_star, s.rmse, s.psnr, s.ssim, ns.rmse, ns.psnr, ns.ssim, wh.rmse, wh.psnr,
                wh.ssim);
  os << line;
  return os.str();
}

std::string to_json_string(const EvalReport& report) {
  nlohmann::json j;
  j["image_count"] = report.image_count;
  for (const auto& [region, m] : report.regions)
    j["regions"][region] = {{"rmse_star", m.rmse_star}, {"rmse", m.rmse}, {"psnr", m.psnr}, {"ssim", m.ssim}};
  return j.dump(2);
}

}  // namespace hqss
