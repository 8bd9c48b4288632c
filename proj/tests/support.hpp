#pragma once

#include <torch/torch.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "hqss/image.hpp"

namespace testing {

// Same generator as tests/oracles/reference_values.py.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

struct RgbPair {
  hqss::RgbImage pred, gt;
  hqss::BinaryMask mask;
};

// Pair k of the frozen SSIM table: seed 1000 + k, noise amplitude 0.04 (k + 1).
inline RgbPair random_rgb_pair(std::uint64_t seed, double amplitude, int size = 32) {
  SplitMix64 rng(seed);
  const std::size_t n = static_cast<std::size_t>(size) * size;
  std::vector<double> gt(3 * n), noise(3 * n);
  for (auto& v : gt) v = rng.uniform();
  for (auto& v : noise) v = rng.uniform();
  std::vector<std::uint8_t> mask(n);
  for (auto& m : mask) m = rng.uniform() < 0.5 ? 1 : 0;
  std::vector<float> g(3 * n), p(3 * n);
  for (std::size_t i = 0; i < 3 * n; ++i) {
    g[i] = static_cast<float>(gt[i]);
    p[i] = static_cast<float>(std::clamp(static_cast<double>(g[i]) + amplitude * (noise[i] - 0.5), 0.0, 1.0));
  }
  return {hqss::RgbImage(size, size, std::move(p)), hqss::RgbImage(size, size, std::move(g)),
          hqss::BinaryMask(size, size, std::move(mask))};
}

inline hqss::LabImage random_lab(std::mt19937_64& rng, int h, int w) {
  std::uniform_real_distribution<float> l(0.0f, 100.0f), ab(-100.0f, 100.0f);
  hqss::LabImage img(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      img.at(y, x, 0) = l(rng);
      img.at(y, x, 1) = ab(rng);
      img.at(y, x, 2) = ab(rng);
    }
  return img;
}

inline hqss::BinaryMask random_mask(std::mt19937_64& rng, int h, int w, double p) {
  std::bernoulli_distribution on(p);
  hqss::BinaryMask m(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.set(y, x, on(rng));
  return m;
}

// Brute-force metric oracles: flat lists of per-pixel errors, summed afresh.
inline std::vector<double> pixel_errors(const hqss::LabImage& a, const hqss::LabImage& b, const hqss::BinaryMask& m,
                                        bool channel_mean) {
  std::vector<double> out;
  const auto pa = a.data(), pb = b.data();
  const auto mv = m.values();
  for (std::size_t i = 0; i < mv.size(); ++i) {
    if (mv[i] == 0) continue;
    double e = std::fabs(double(pa[3 * i]) - pb[3 * i]) + std::fabs(double(pa[3 * i + 1]) - pb[3 * i + 1]) +
               std::fabs(double(pa[3 * i + 2]) - pb[3 * i + 2]);
    out.push_back(channel_mean ? e / 3.0 : e);
  }
  return out;
}

inline double mean_of(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : static_cast<double>(s / v.size());
}

inline double brute_psnr(const hqss::RgbImage& a, const hqss::RgbImage& b, const hqss::BinaryMask* m) {
  long double s = 0;
  std::size_t n = 0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      if (m && !m->at(y, x)) continue;
      for (int c = 0; c < 3; ++c) {
        const long double d = static_cast<long double>(a.at(y, x, c)) - b.at(y, x, c);
        s += d * d;
        ++n;
      }
    }
  const double mse = static_cast<double>(s / n);
  return mse == 0.0 ? 100.0 : std::min(100.0, -10.0 * std::log10(mse));
}

// ‖analytic − finite difference‖ / ‖finite difference‖ for the gradient of f w.r.t. x (double tensors).
inline double fd_relative_error(const std::function<torch::Tensor(const torch::Tensor&)>& f, const torch::Tensor& x0,
                                double h = 1e-6) {
  torch::Tensor x = x0.detach().clone().set_requires_grad(true);
  f(x).backward();
  const torch::Tensor analytic = x.grad().detach().clone();
  torch::NoGradGuard no_grad;
  torch::Tensor flat = x0.detach().clone().contiguous();
  auto acc = flat.view({-1});
  torch::Tensor numeric = torch::zeros_like(acc);
  for (int64_t i = 0; i < acc.numel(); ++i) {
    const double orig = acc[i].item<double>();
    acc[i] = orig + h;
    const double up = f(flat).item<double>();
    acc[i] = orig - h;
    const double down = f(flat).item<double>();
    acc[i] = orig;
    numeric[i] = (up - down) / (2.0 * h);
  }
  const double denom = std::max(numeric.norm().item<double>(), 1e-12);
  return (analytic.view({-1}) - numeric).norm().item<double>() / denom;
}

// Same, over a sample of entries from every parameter (the loss closure reads the parameters in place).
// The error is taken over the concatenated samples, so entries with a structurally zero gradient
// (a conv bias feeding instance norm) do not divide by zero.
inline double fd_parameter_error(const std::function<torch::Tensor()>& loss, const std::vector<torch::Tensor>& params,
                                 int samples_per_tensor, std::uint64_t seed, double h = 1e-6) {
  for (const auto& p : params)
    if (p.grad().defined()) p.grad().zero_();
  loss().backward();
  torch::NoGradGuard no_grad;
  std::mt19937_64 rng(seed);
  double num2 = 0.0, diff2 = 0.0;
  for (const auto& p : params) {
    const torch::Tensor grad = p.grad().detach().clone().view({-1});
    auto flat = p.data().view({-1});
    const int64_t n = flat.numel();
    const int64_t count = std::min<int64_t>(samples_per_tensor, n);
    std::uniform_int_distribution<int64_t> pick(0, n - 1);
    for (int64_t s = 0; s < count; ++s) {
      const int64_t i = count == n ? s : pick(rng);
      const double orig = flat[i].item<double>();
      flat[i] = orig + h;
      const double up = loss().item<double>();
      flat[i] = orig - h;
      const double down = loss().item<double>();
      flat[i] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = grad[i].item<double>();
      num2 += numeric * numeric;
      diff2 += (analytic - numeric) * (analytic - numeric);
    }
  }
  return std::sqrt(diff2) / std::max(std::sqrt(num2), 1e-12);
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("hqss_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
