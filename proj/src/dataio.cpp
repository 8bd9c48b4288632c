#include "hqss/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>

#include "hqss/colorspace.hpp"
#include "hqss/png_io.hpp"

namespace hqss {

namespace fs = std::filesystem;

namespace {

std::string mismatch_message(const std::string& name, const char* what, int h1, int w1, int h2, int w2) {
  return "dimension mismatch for " + name + ": image " + std::to_string(h1) + "x" + std::to_string(w1) + " vs " +
         what + " " + std::to_string(h2) + "x" + std::to_string(w2);
}

bool is_png(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png";
}

}  // namespace

Sample Dataset::load(std::size_t index) const {
  const Entry& e = entries_.at(index);
  Sample s{e.name, rgb_to_lab(read_png_rgb(e.image)), read_png_mask(e.mask, MaskKind::kShadow), std::nullopt};
  if (!s.shadow_mask.same_shape(s.shadow_image))
    throw DataError(mismatch_message(e.name, "mask", s.shadow_image.height(), s.shadow_image.width(),
                                     s.shadow_mask.height(), s.shadow_mask.width()));
  if (e.ground_truth) {
    LabImage gt = rgb_to_lab(read_png_rgb(*e.ground_truth));
    if (!gt.same_shape(s.shadow_image))
      throw DataError(mismatch_message(e.name, "gt", s.shadow_image.height(), s.shadow_image.width(),
                                       gt.height(), gt.width()));
    s.ground_truth = std::move(gt);
  }
  return s;
}

BinaryMask Dataset::load_mask(std::size_t index) const {
  return read_png_mask(entries_.at(index).mask, MaskKind::kShadow);
}

std::vector<BinaryMask> Dataset::load_all_masks() const {
  std::vector<BinaryMask> out;
  out.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) out.push_back(load_mask(i));
  return out;
}

Dataset load_dataset(const fs::path& root, std::string_view split) {
  const fs::path base = root / split;
  const fs::path images = base / "images";
  const fs::path masks = base / "masks";
  const fs::path gts = base / "gt";

  std::vector<fs::path> files;
  if (fs::is_directory(images))
    for (const auto& de : fs::directory_iterator(images))
      if (de.is_regular_file() && is_png(de.path())) files.push_back(de.path());
  std::sort(files.begin(), files.end());

  if (files.empty()) {
    std::cerr << "warning: no images found under " << images.string() << "\n";
    return {};
  }

  std::vector<Dataset::Entry> entries;
  entries.reserve(files.size());
  for (const auto& f : files) {
    Dataset::Entry e;
    e.name = f.filename().string();
    e.image = f;
    e.mask = masks / f.filename();
    if (!fs::exists(e.mask)) throw DataError("missing mask for " + e.name + " (expected " + e.mask.string() + ")");
    if (fs::exists(gts / f.filename())) e.ground_truth = gts / f.filename();
    entries.push_back(std::move(e));
  }
  return Dataset(std::move(entries));
}

AugmentWindow draw_augment_window(const AugmentConfig& cfg, Rng& rng) {
  if (cfg.crop > cfg.resize) throw ValidationError("crop size exceeds resize size");
  std::uniform_int_distribution<int> offset(0, cfg.resize - cfg.crop);
  AugmentWindow win;
  win.resize = cfg.resize;
  win.crop = cfg.crop;
  win.top = offset(rng);
  win.left = offset(rng);
  win.flip = std::bernoulli_distribution(cfg.flip_probability)(rng);
  return win;
}

LabImage apply_window(const AugmentWindow& win, const LabImage& img) {
  LabImage out = crop(resize_bilinear(img, win.resize, win.resize), win.top, win.left, win.crop, win.crop);
  return win.flip ? flip_horizontal(out) : out;
}

BinaryMask apply_window(const AugmentWindow& win, const BinaryMask& mask) {
  BinaryMask out = crop(resize_nearest(mask, win.resize, win.resize), win.top, win.left, win.crop, win.crop);
  return win.flip ? flip_horizontal(out) : out;
}

Sample augment(const Sample& sample, const AugmentConfig& cfg, Rng& rng) {
  const AugmentWindow win = draw_augment_window(cfg, rng);
  Sample out;
  out.name = sample.name;
  out.shadow_image = apply_window(win, sample.shadow_image);
  out.shadow_mask = apply_window(win, sample.shadow_mask);
  if (sample.ground_truth) out.ground_truth = apply_window(win, *sample.ground_truth);
  return out;
}

NonShadowDraw sample_nonshadow_mask(const Sample& sample, std::span<const BinaryMask> pool, Rng& rng,
                                    const NonShadowMaskOptions& opts, std::optional<std::size_t> exclude) {
  if (pool.empty()) throw ValidationError("non-shadow mask pool is empty");
  const bool skip_own = exclude && *exclude < pool.size() && pool.size() > 1;
  const std::size_t choices = skip_own ? pool.size() - 1 : pool.size();
  const BinaryMask free_area = sample.shadow_mask.complement();
  const auto min_count = static_cast<std::size_t>(std::ceil(opts.min_area_fraction * free_area.values().size()));

  std::uniform_int_distribution<std::size_t> pick(0, choices - 1);
  for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
    std::size_t index = pick(rng);
    if (skip_own && index >= *exclude) ++index;
    const BinaryMask& chosen = pool[index];
    BinaryMask candidate =
        resize_nearest(chosen, sample.shadow_mask.height(), sample.shadow_mask.width()) & free_area;
    if (candidate.count() >= min_count && !candidate.empty()) {
      candidate.set_kind(MaskKind::kNonShadow);
      return {std::move(candidate), index};
    }
  }
  throw ValidationError("no valid non-shadow mask after " + std::to_string(opts.max_attempts) + " attempts");
}

RegionIdentity restrict_to(const LabImage& image, const BinaryMask& mask) {
  if (!mask.same_shape(image)) throw ShapeError("mask and image dimensions differ");
  LabImage out(image.height(), image.width());
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x)
      if (mask.at(y, x))
        for (int c = 0; c < 3; ++c) out.at(y, x, c) = image.at(y, x, c);
  return {std::move(out), mask};
}

std::pair<RegionIdentity, RegionIdentity> decouple(const Sample& sample, const BinaryMask& nonshadow_mask) {
  if (!sample.shadow_mask.disjoint(nonshadow_mask)) throw ValidationError("shadow and non-shadow masks overlap");
  BinaryMask shadow = sample.shadow_mask;
  shadow.set_kind(MaskKind::kShadow);
  BinaryMask nonshadow = nonshadow_mask;
  nonshadow.set_kind(MaskKind::kNonShadow);
  return {restrict_to(sample.shadow_image, shadow), restrict_to(sample.shadow_image, nonshadow)};
}

BinaryMask dilate_mask(const BinaryMask& mask, int kernel_size) {
  if (kernel_size < 1) throw ValidationError("dilation kernel size must be >= 1");
  const int h = mask.height();
  const int w = mask.width();
  const int before = kernel_size / 2;
  const int after = kernel_size - 1 - before;

  // Separable: a square max-filter is a row max-filter followed by a column one.
  std::vector<int> prefix;
  std::vector<std::uint8_t> rows(static_cast<std::size_t>(h) * w);
  prefix.resize(static_cast<std::size_t>(w) + 1);
  for (int y = 0; y < h; ++y) {
    prefix[0] = 0;
    for (int x = 0; x < w; ++x) prefix[x + 1] = prefix[x] + mask.at(y, x);
    for (int x = 0; x < w; ++x) {
      const int lo = std::max(0, x - before);
      const int hi = std::min(w - 1, x + after);
      rows[static_cast<std::size_t>(y) * w + x] = prefix[hi + 1] - prefix[lo] > 0;
    }
  }
  BinaryMask out(h, w, MaskKind::kDilated);
  prefix.resize(static_cast<std::size_t>(h) + 1);
  for (int x = 0; x < w; ++x) {
    prefix[0] = 0;
    for (int y = 0; y < h; ++y) prefix[y + 1] = prefix[y] + rows[static_cast<std::size_t>(y) * w + x];
    for (int y = 0; y < h; ++y) {
      const int lo = std::max(0, y - before);
      const int hi = std::min(h - 1, y + after);
      out.set(y, x, prefix[hi + 1] - prefix[lo] > 0);
    }
  }
  return out;
}

namespace {

// Sum of a few low-frequency cosines, rescaled to [-1,1].
std::vector<double> smooth_field(int size, Rng& rng) {
  std::uniform_real_distribution<double> freq(0.3, 2.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> amp(0.5, 1.0);
  constexpr int kWaves = 4;
  double fx[kWaves], fy[kWaves], ph[kWaves], am[kWaves];
  for (int k = 0; k < kWaves; ++k) {
    fx[k] = freq(rng) * (rng() % 2 ? 1 : -1);
    fy[k] = freq(rng);
    ph[k] = phase(rng);
    am[k] = amp(rng);
  }
  std::vector<double> f(static_cast<std::size_t>(size) * size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      double v = 0.0;
      for (int k = 0; k < kWaves; ++k)
        v += am[k] * std::cos(2.0 * std::numbers::pi * (fx[k] * x + fy[k] * y) / size + ph[k]);
      f[static_cast<std::size_t>(y) * size + x] = v;
    }
  const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
  const double mn = *lo, span = std::max(*hi - *lo, 1e-9);
  for (auto& v : f) v = 2.0 * (v - mn) / span - 1.0;
  return f;
}

BinaryMask random_polygon(int size, Rng& rng, const ToyOptions& opts) {
  std::uniform_real_distribution<double> centre(0.3 * size, 0.7 * size);
  std::uniform_real_distribution<double> radius(0.15 * size, 0.38 * size);
  std::uniform_real_distribution<double> jitter(0.55, 1.0);
  std::uniform_int_distribution<int> vertices(5, 9);
  for (;;) {
    const double cx = centre(rng), cy = centre(rng), r = radius(rng);
    const int n = vertices(rng);
    std::vector<double> px(n), py(n);
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * std::numbers::pi * i / n;
      const double ri = r * jitter(rng);
      px[i] = cx + ri * std::cos(a);
      py[i] = cy + ri * std::sin(a);
    }
    BinaryMask m(size, size, MaskKind::kShadow);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double sx = x + 0.5, sy = y + 0.5;
        bool inside = false;
        for (int i = 0, j = n - 1; i < n; j = i++) {
          if ((py[i] > sy) != (py[j] > sy) && sx < (px[j] - px[i]) * (sy - py[i]) / (py[j] - py[i]) + px[i])
            inside = !inside;
        }
        m.set(y, x, inside);
      }
    const double area = m.area_fraction();
    if (area >= opts.min_area && area <= opts.max_area) return m;
  }
}

bool in_gamut(double l, double a, double b) {
  const Rgb rgb = lab_to_srgb_unclamped({l, a, b});
  constexpr double eps = 1e-6;
  return rgb.r >= -eps && rgb.r <= 1 + eps && rgb.g >= -eps && rgb.g <= 1 + eps && rgb.b >= -eps &&
         rgb.b <= 1 + eps;
}

}  // namespace

ToySample make_toy_sample(int size, Rng& rng, const ToyOptions& opts) {
  if (size < 16) throw ValidationError("toy image size must be >= 16");
  // Each image is one of a few fixed materials. A material pairs a base colour with a stripe texture of its own
  // orientation and period, so colour is recoverable from texture, as with surfaces in real photographs.
  // Periods stay above 8 px so the stripes survive the generators' 4× downsampling; orientations are 0° and 90°
  // and periods a factor 2 apart, so horizontal flips and the augmentation's rescaling cannot swap materials.
  struct Material {
    double l, a, b, angle, period;
  };
  static constexpr Material kMaterials[] = {
      {66.0, 12.0, 18.0, 0.0, 10.0},
      {60.0, -14.0, 10.0, 0.5 * std::numbers::pi, 10.0},
      {70.0, 4.0, -16.0, 0.0, 20.0},
      {56.0, -6.0, -8.0, 0.5 * std::numbers::pi, 20.0},
  };
  const Material& mat = kMaterials[std::uniform_int_distribution<int>(0, 3)(rng)];
  const double stripe_phase = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
  const auto lf = smooth_field(size, rng);
  const auto af = smooth_field(size, rng);
  const auto bf = smooth_field(size, rng);
  const double l0 = mat.l, a0 = mat.a, b0 = mat.b;
  const double cos_t = std::cos(mat.angle), sin_t = std::sin(mat.angle);

  BinaryMask mask = random_polygon(size, rng, opts);
  const double k = std::uniform_real_distribution<double>(opts.min_attenuation, opts.max_attenuation)(rng);

  // Soft shadow matte: box-filtered mask. Every interior pixel keeps alpha > 0.
  const int r = opts.soft_edge_radius;
  std::vector<double> alpha(static_cast<std::size_t>(size) * size, 0.0);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      int on = 0, total = 0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const int yy = std::clamp(y + dy, 0, size - 1), xx = std::clamp(x + dx, 0, size - 1);
          on += mask.at(yy, xx);
          ++total;
        }
      alpha[static_cast<std::size_t>(y) * size + x] = static_cast<double>(on) / total;
    }

  ToySample out{LabImage(size, size), LabImage(size, size), mask, k};
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * size + x;
      const double stripe = std::sin(2.0 * std::numbers::pi * (x * cos_t + y * sin_t) / mat.period + stripe_phase);
      const double l = l0 + 8.0 * lf[i] + 5.0 * stripe;
      const double ls = l * (1.0 - alpha[i] * (1.0 - k));
      double a = a0 + 6.0 * af[i];
      double b = b0 + 6.0 * bf[i];
      // Pull chroma in until both the lit and the shadowed colour are representable in sRGB.
      while (!(in_gamut(l, a, b) && in_gamut(ls, a, b))) {
        a *= 0.9;
        b *= 0.9;
      }
      out.ground_truth.at(y, x, 0) = static_cast<float>(l);
      out.ground_truth.at(y, x, 1) = static_cast<float>(a);
      out.ground_truth.at(y, x, 2) = static_cast<float>(b);
      out.shadow.at(y, x, 0) = static_cast<float>(ls);
      out.shadow.at(y, x, 1) = static_cast<float>(a);
      out.shadow.at(y, x, 2) = static_cast<float>(b);
    }
  return out;
}

void make_toy_dataset(const fs::path& root, std::string_view split, int n, int size, Rng& rng,
                      const ToyOptions& opts) {
  if (n < 1) throw ValidationError("toy dataset needs n >= 1");
  const fs::path base = root / split;
  for (const char* sub : {"images", "masks", "gt"}) fs::create_directories(base / sub);
  for (int i = 0; i < n; ++i) {
    const ToySample t = make_toy_sample(size, rng, opts);
    char name[32];
    std::snprintf(name, sizeof(name), "toy_%04d.png", i);
    write_png_rgb(base / "images" / name, lab_to_rgb(t.shadow));
    write_png_rgb(base / "gt" / name, lab_to_rgb(t.ground_truth));
    write_png_mask(base / "masks" / name, t.mask);
  }
}

}  // namespace hqss
