#pragma once

#include <torch/torch.h>

#include <array>
#include <map>
#include <string>

namespace hqss {

/// Trade-off weights of the synthesis objective, ω1..ω8 in order.
struct LossWeights {
  double self_shadow = 1.0;         // ω1
  double self_nonshadow = 1.0;      // ω2
  double adv_gen = 0.05;            // ω3
  double color = 0.01;              // ω4
  double adv_shadow_disc = 1.0;     // ω5
  double adv_nonshadow_disc = 1.0;  // ω6
  double cycle_rec = 0.1;           // ω7
  double cycle_feat = 0.01;         // ω8

  std::array<double, 8> as_array() const;
  static LossWeights from_array(const std::array<double, 8>& w);
  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

/// Component removals for ablation runs. Each flag drops its terms from the objective.
struct Ablation {
  bool no_self = false;              // ω1, ω2 terms
  bool no_cycle = false;             // ω7, ω8 terms
  bool no_color = false;             // ω4 term
  bool no_pseudo_nonshadow = false;  // every term touching the pseudo non-shadow image
  bool no_disc = false;              // ω3, ω5, ω6 terms; discriminators are not trained
  friend bool operator==(const Ablation&, const Ablation&) = default;
};

/// Named scalar loss values. Synthesis keys: self_rec_s, self_rec_f, adv_G, color, adv_Ds, adv_Df,
/// cycle_rec, cycle_feat, gen_total, disc_total, total. Removal keys: inverse, refine, removal_total.
class LossReport {
 public:
  void set(const std::string& name, double value) { values_[name] = value; }
  double at(const std::string& name) const { return values_.at(name); }
  bool contains(const std::string& name) const { return values_.count(name) != 0; }
  const std::map<std::string, double>& values() const noexcept { return values_; }
  bool all_finite() const;
  /// One JSON object on a single line; `step` is included when non-negative.
  std::string to_json_line(long step = -1) const;
  friend bool operator==(const LossReport&, const LossReport&) = default;

 private:
  std::map<std::string, double> values_;
};

/// Mean absolute difference.
torch::Tensor l1(const torch::Tensor& a, const torch::Tensor& b);

/// Focal-frequency weights |F_a − F_b|^alpha, normalised to max 1 per image and channel, detached.
torch::Tensor ffl_weights(const torch::Tensor& a, const torch::Tensor& b, double alpha = 1.0);
/// Mean over frequencies and channels of weight · |F_a − F_b|² with a caller-supplied weight matrix.
torch::Tensor ffl_weighted(const torch::Tensor& a, const torch::Tensor& b, const torch::Tensor& weights);
/// Focal frequency loss on [N,C,H,W] tensors, orthonormal 2-D DFT per channel.
torch::Tensor ffl(const torch::Tensor& a, const torch::Tensor& b, double alpha = 1.0);

/// ℓ1 + FFL.
torch::Tensor loss_rec(const torch::Tensor& target, const torch::Tensor& pseudo);
torch::Tensor loss_self(const torch::Tensor& shadow_region, const torch::Tensor& nonshadow_region,
                        const torch::Tensor& rec_shadow, const torch::Tensor& rec_nonshadow, const LossWeights& w);
/// Least-squares generator objective: ½(D_s − 1)² + ½(D_f − 1)², batch-averaged.
torch::Tensor loss_adv_gen(const torch::Tensor& d_shadow_out, const torch::Tensor& d_nonshadow_out);
/// Least-squares discriminator objective: D(fake)² + (D(real) − 1)², batch-averaged.
torch::Tensor loss_adv_disc(const torch::Tensor& d_fake, const torch::Tensor& d_real);
/// Channels a, b of a network-space LAB tensor.
torch::Tensor take_ab(const torch::Tensor& lab);
torch::Tensor loss_color(const torch::Tensor& pseudo_shadow, const torch::Tensor& nonshadow_region,
                         const torch::Tensor& pseudo_nonshadow, const torch::Tensor& shadow_region);
torch::Tensor loss_cycle_feat(const torch::Tensor& feat_s, const torch::Tensor& cycle_feat_s,
                              const torch::Tensor& feat_f, const torch::Tensor& cycle_feat_f);
torch::Tensor loss_cycle_rec(const torch::Tensor& nonshadow_region, const torch::Tensor& back_nonshadow,
                             const torch::Tensor& shadow_region, const torch::Tensor& back_shadow);

/// Unweighted parts of the synthesis objective. Undefined tensors count as ablated (exact 0).
struct SynthLossTerms {
  torch::Tensor self_rec_s, self_rec_f, adv_gen, color, adv_shadow_disc, adv_nonshadow_disc, cycle_rec, cycle_feat;
};

struct WeightedLoss {
  torch::Tensor total;
  LossReport report;
};

/// Σ ωᵢ·partᵢ. The report carries every part, gen_total (ω1–ω4, ω7, ω8), disc_total (ω5, ω6) and total.
WeightedLoss loss_total_synth(const SynthLossTerms& terms, const LossWeights& w);

/// inverse = ℓ1(R_i, I_f); refine = ℓ1(R_f, I) + ℓ1(M_d⊗R_f, M_d⊗I); total = inverse + refine.
WeightedLoss loss_removal(const torch::Tensor& coarse, const torch::Tensor& nonshadow_target,
                          const torch::Tensor& refined, const torch::Tensor& image, const torch::Tensor& dilated_mask);

}  // namespace hqss
