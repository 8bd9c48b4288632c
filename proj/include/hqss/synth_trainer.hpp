#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "hqss/dataio.hpp"
#include "hqss/losses.hpp"
#include "hqss/nets.hpp"
#include "hqss/schedule.hpp"

namespace hqss {

struct TrainConfig {
  int epochs = 100;
  int batch_size = 1;
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  int decay_epochs = 50;
  std::uint64_t seed = 0;
  /// Stop after this many optimisation steps; negative means run all epochs.
  long max_steps = -1;
  LossWeights weights;
  Ablation ablation;
  AugmentConfig augment;
  NonShadowMaskOptions nonshadow;
  /// Keep each image's first non-shadow pool choice for the whole run instead of redrawing per epoch.
  bool freeze_nonshadow_masks = false;
  NetConfig net;

  LrSchedule schedule() const { return {lr, epochs, decay_epochs}; }
};

double lr_at(int epoch, const TrainConfig& cfg);

struct SynthNets {
  Encoder encoder{nullptr};
  Generator generator{nullptr};
  Discriminator shadow_disc{nullptr};
  Discriminator nonshadow_disc{nullptr};
};

/// Builds E, G, D_s, D_f and initialises each from a seed derived from `seed`.
SynthNets make_synth_nets(const NetConfig& cfg, std::uint64_t seed);

/// Every intermediate of one synthesis pass.
struct SynthForward {
  torch::Tensor feat_s;            // E(I_s)
  torch::Tensor feat_f;            // E(I_f)
  torch::Tensor rec_s;             // G(C(F_s, I_s))
  torch::Tensor rec_f;             // G(C(F_f, I_f))
  torch::Tensor pseudo_shadow;     // G(C(F_s, I_f))
  torch::Tensor pseudo_nonshadow;  // G(C(F_f, I_s))
  torch::Tensor cycle_feat_s;      // E(pseudo_shadow)
  torch::Tensor cycle_feat_f;      // E(pseudo_nonshadow)
  torch::Tensor back_f;            // G(C(F_f, pseudo_shadow))
  torch::Tensor back_s;            // G(C(F_s, pseudo_nonshadow))
};

/// Which branches to evaluate; skipped branches stay undefined.
struct ForwardBranches {
  bool self = true;
  bool cycle = true;
  bool pseudo_nonshadow = true;
};

using NetFn = std::function<torch::Tensor(const torch::Tensor&)>;

SynthForward forward_synth(const NetFn& encoder, const NetFn& generator, const torch::Tensor& shadow_region,
                           const torch::Tensor& nonshadow_region, const ForwardBranches& branches = {});
SynthForward forward_synth(Encoder& encoder, Generator& generator, const torch::Tensor& shadow_region,
                           const torch::Tensor& nonshadow_region, const ForwardBranches& branches = {});

/// Alternating min-max optimisation: E∪G first with discriminators frozen, then D_s∪D_f on detached pseudo images.
class SynthTrainer {
 public:
  SynthTrainer(SynthNets nets, const TrainConfig& cfg);

  /// One generator phase and one discriminator phase on a batch of [N,3,H,W] region tensors.
  /// Throws TrainingDiverged on a non-finite loss, before any parameter changes.
  LossReport train_step(const torch::Tensor& shadow_region, const torch::Tensor& nonshadow_region);

  void set_learning_rate(double lr);
  /// Called between the generator update and the discriminator update of every step.
  void set_phase_hook(std::function<void()> hook) { phase_hook_ = std::move(hook); }
  SynthNets& nets() noexcept { return nets_; }
  const TrainConfig& config() const noexcept { return cfg_; }

 private:
  SynthNets nets_;
  TrainConfig cfg_;
  torch::optim::Adam gen_opt_;
  torch::optim::Adam disc_opt_;
  std::function<void()> phase_hook_;
};

using StepCallback = std::function<void(long step, int epoch, const LossReport& report)>;

struct SynthRunSummary {
  long steps = 0;
  int epochs_completed = 0;
  std::vector<LossReport> reports;
};

/// Full training loop over `data`: augmentation, non-shadow mask sampling, decoupling, train_step.
SynthRunSummary train_synth(SynthTrainer& trainer, const Dataset& data, const StepCallback& on_step = {});

struct ExportOptions {
  int pairs_per_image = 1;
  std::uint64_t seed = 0;
  NonShadowMaskOptions nonshadow;
};

/// Writes `<out>/{images,gt,masks,source}/<stem>_<k>.png`: pseudo shadow (restricted to M′),
/// non-shadow target I_f, mask M′, and the full source image. Returns the number of pairs written.
std::size_t export_pseudo_pairs(SynthNets& nets, const Dataset& data, const std::filesystem::path& out_dir,
                                const ExportOptions& opts = {});

/// Makes libtorch single-threaded and deterministic.
void enable_deterministic_mode();

}  // namespace hqss
