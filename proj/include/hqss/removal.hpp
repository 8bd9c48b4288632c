#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "hqss/dataio.hpp"
#include "hqss/losses.hpp"
#include "hqss/nets.hpp"
#include "hqss/schedule.hpp"

namespace hqss {

struct RemovalConfig {
  int epochs = 150;
  int batch_size = 1;
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  int decay_epochs = 50;
  std::uint64_t seed = 0;
  long max_steps = -1;
  /// Square dilation kernel for the refinement loss; 0 scales 50 px at 400 px to the crop size.
  int dilation_kernel = 0;
  AugmentConfig augment;
  NetConfig net;

  LrSchedule schedule() const { return {lr, epochs, decay_epochs}; }
};

/// 50 at 400 px, proportional otherwise, never below 3.
int scaled_dilation_kernel(int image_size);

struct RemovalNets {
  Generator inverse{nullptr};  // N_iv
  Generator refine{nullptr};   // N_r
};

RemovalNets make_removal_nets(const NetConfig& cfg, std::uint64_t seed);

/// One exported training pair: pseudo shadow (zeros outside M′), target I_f, and the full source image.
struct PseudoPair {
  std::string name;
  LabImage pseudo_shadow;
  RegionIdentity target_nonshadow;  // its mask is M′
  LabImage source;
};

/// Lazily loaded `<dir>/{images,gt,masks,source}` written by export_pseudo_pairs.
class PseudoPairSet {
 public:
  explicit PseudoPairSet(const std::filesystem::path& dir);
  std::size_t size() const noexcept { return names_.size(); }
  bool empty() const noexcept { return names_.empty(); }
  PseudoPair load(std::size_t index) const;

 private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
};

/// R ⊗ M + I ⊗ (1 − M) on [N,C,H,W] tensors; M broadcasts over channels.
torch::Tensor compose(const torch::Tensor& coarse, const torch::Tensor& image, const torch::Tensor& mask);
/// Same on LAB images; pixels outside the mask are copied bit-for-bit.
LabImage compose(const LabImage& coarse, const LabImage& image, const BinaryMask& mask);

class RemovalTrainer {
 public:
  RemovalTrainer(RemovalNets nets, const RemovalConfig& cfg);

  /// R_i = N_iv(pseudo); R_e = compose(R_i, I, M′); R_f = N_r(R_e); one Adam step on inverse + refine.
  /// Inputs are network-space tensors; masks are [N,1,H,W].
  LossReport train_step(const torch::Tensor& pseudo_shadow, const torch::Tensor& nonshadow_target,
                        const torch::Tensor& source, const torch::Tensor& pair_mask,
                        const torch::Tensor& dilated_mask);

  void set_learning_rate(double lr);
  RemovalNets& nets() noexcept { return nets_; }
  const RemovalConfig& config() const noexcept { return cfg_; }

 private:
  RemovalNets nets_;
  RemovalConfig cfg_;
  torch::optim::Adam opt_;
};

using RemovalStepCallback = std::function<void(long step, int epoch, const LossReport& report)>;

struct RemovalRunSummary {
  long steps = 0;
  std::vector<LossReport> reports;
};

RemovalRunSummary train_removal(RemovalTrainer& trainer, const PseudoPairSet& pairs,
                                const RemovalStepCallback& on_step = {});

struct RemovalOutput {
  LabImage coarse;    // R_i
  LabImage composed;  // R_e
  LabImage refined;   // R_f
};

/// Inverse network on the masked shadow region, composition into the image, refinement.
/// Throws ShapeError unless H and W are divisible by 4.
RemovalOutput remove_shadow(RemovalNets& nets, const LabImage& image, const BinaryMask& mask);

}  // namespace hqss
