#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hqss/image.hpp"

namespace hqss {

using Rng = std::mt19937_64;

/// A LAB image pre-multiplied by its mask (zeros outside), plus the mask.
struct RegionIdentity {
  LabImage image;
  BinaryMask mask;
};

struct Sample {
  std::string name;
  LabImage shadow_image;
  BinaryMask shadow_mask;
  std::optional<LabImage> ground_truth;
};

/// Lazily loaded `<root>/<split>/{images,masks,gt}` directory.
class Dataset {
 public:
  struct Entry {
    std::string name;
    std::filesystem::path image;
    std::filesystem::path mask;
    std::optional<std::filesystem::path> ground_truth;
  };

  class iterator {
   public:
    using value_type = Sample;
    using difference_type = std::ptrdiff_t;
    iterator(const Dataset* ds, std::size_t i) : ds_(ds), i_(i) {}
    Sample operator*() const { return ds_->load(i_); }
    iterator& operator++() {
      ++i_;
      return *this;
    }
    bool operator==(const iterator& o) const { return i_ == o.i_; }

   private:
    const Dataset* ds_;
    std::size_t i_;
  };

  Dataset() = default;
  explicit Dataset(std::vector<Entry> entries) : entries_(std::move(entries)) {}

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }

  /// Reads one sample. Throws DataError on dimension mismatch.
  Sample load(std::size_t index) const;
  BinaryMask load_mask(std::size_t index) const;
  std::vector<BinaryMask> load_all_masks() const;

  iterator begin() const { return {this, 0}; }
  iterator end() const { return {this, entries_.size()}; }

 private:
  std::vector<Entry> entries_;
};

/// Indexes `<root>/<split>`. Missing masks are an error; an empty image dir yields an empty dataset.
Dataset load_dataset(const std::filesystem::path& root, std::string_view split);

struct AugmentConfig {
  int resize = 448;
  int crop = 400;
  double flip_probability = 0.5;
};

/// One draw of the augmentation randomness, applied identically to every image of a sample.
struct AugmentWindow {
  int resize = 0;
  int crop = 0;
  int top = 0;
  int left = 0;
  bool flip = false;
};

AugmentWindow draw_augment_window(const AugmentConfig& cfg, Rng& rng);
LabImage apply_window(const AugmentWindow& win, const LabImage& img);
BinaryMask apply_window(const AugmentWindow& win, const BinaryMask& mask);

/// Resize (bilinear image, nearest mask), random crop, random horizontal flip.
/// The same window and flip decision apply to every member of the sample.
Sample augment(const Sample& sample, const AugmentConfig& cfg, Rng& rng);

struct NonShadowMaskOptions {
  double min_area_fraction = 0.01;
  int max_attempts = 10;
};

struct NonShadowDraw {
  BinaryMask mask;
  std::size_t pool_index = 0;
};

/// Draws a mask from `pool`, resizes it to the sample and intersects it with the
/// complement of the shadow mask. Redraws while the result is below the minimum area.
/// `exclude` removes one pool entry (the sample's own mask) when the pool has others.
NonShadowDraw sample_nonshadow_mask(const Sample& sample, std::span<const BinaryMask> pool, Rng& rng,
                                    const NonShadowMaskOptions& opts = {},
                                    std::optional<std::size_t> exclude = std::nullopt);

/// Image restricted to `mask`, zeros elsewhere.
RegionIdentity restrict_to(const LabImage& image, const BinaryMask& mask);

/// Splits a sample into (shadow identity, non-shadow identity). Throws if the masks overlap.
std::pair<RegionIdentity, RegionIdentity> decouple(const Sample& sample, const BinaryMask& nonshadow_mask);

/// Binary dilation with a kernel_size × kernel_size square; even sizes anchor at kernel_size / 2.
BinaryMask dilate_mask(const BinaryMask& mask, int kernel_size);

struct ToySample {
  LabImage shadow;
  LabImage ground_truth;
  BinaryMask mask;
  double attenuation = 1.0;
};

struct ToyOptions {
  double min_area = 0.05;
  double max_area = 0.40;
  double min_attenuation = 0.3;
  double max_attenuation = 0.7;
  int soft_edge_radius = 1;
};

/// One of four textured materials (base colour + stripe pattern) with a darkened polygon. Only L changes inside the shadow.
ToySample make_toy_sample(int size, Rng& rng, const ToyOptions& opts = {});

/// Writes `n` toy triples under `<root>/<split>/{images,masks,gt}`.
void make_toy_dataset(const std::filesystem::path& root, std::string_view split, int n, int size, Rng& rng,
                      const ToyOptions& opts = {});

}  // namespace hqss
