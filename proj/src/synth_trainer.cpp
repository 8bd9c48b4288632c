#include "hqss/synth_trainer.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>

#include "hqss/colorspace.hpp"
#include "hqss/error.hpp"
#include "hqss/png_io.hpp"
#include "hqss/tensors.hpp"

namespace hqss {

namespace fs = std::filesystem;

namespace {

void set_requires_grad(torch::nn::Module& m, bool on) {
  for (auto& p : m.parameters()) p.set_requires_grad(on);
}

std::vector<torch::Tensor> joint_parameters(torch::nn::Module& a, torch::nn::Module& b) {
  auto params = a.parameters();
  auto more = b.parameters();
  params.insert(params.end(), more.begin(), more.end());
  return params;
}

torch::optim::AdamOptions adam_options(const TrainConfig& cfg) {
  return torch::optim::AdamOptions(cfg.lr).betas({cfg.beta1, cfg.beta2});
}

}  // namespace

double lr_at(int epoch, const TrainConfig& cfg) { return lr_at(epoch, cfg.schedule()); }

SynthNets make_synth_nets(const NetConfig& cfg, std::uint64_t seed) {
  SynthNets n;
  n.encoder = build_encoder(3, cfg.feat_channels);
  n.generator = build_generator(3 + cfg.feat_channels, cfg);
  n.shadow_disc = build_discriminator(cfg);
  n.nonshadow_disc = build_discriminator(cfg);
  init_weights(*n.encoder, seed * 16 + 1);
  init_weights(*n.generator, seed * 16 + 2);
  init_weights(*n.shadow_disc, seed * 16 + 3);
  init_weights(*n.nonshadow_disc, seed * 16 + 4);
  return n;
}

SynthForward forward_synth(const NetFn& encoder, const NetFn& generator, const torch::Tensor& shadow_region,
                           const torch::Tensor& nonshadow_region, const ForwardBranches& branches) {
  if (shadow_region.sizes() != nonshadow_region.sizes()) throw ShapeError("region identities differ in shape");
  SynthForward f;
  f.feat_s = encoder(shadow_region);
  f.feat_f = encoder(nonshadow_region);
  if (branches.self) {
    f.rec_s = generator(concat_inputs(f.feat_s, shadow_region));
    f.rec_f = generator(concat_inputs(f.feat_f, nonshadow_region));
  }
  f.pseudo_shadow = generator(concat_inputs(f.feat_s, nonshadow_region));
  if (branches.pseudo_nonshadow) f.pseudo_nonshadow = generator(concat_inputs(f.feat_f, shadow_region));
  if (branches.cycle) {
    f.cycle_feat_s = encoder(f.pseudo_shadow);
    f.back_f = generator(concat_inputs(f.feat_f, f.pseudo_shadow));
    if (branches.pseudo_nonshadow) {
      f.cycle_feat_f = encoder(f.pseudo_nonshadow);
      f.back_s = generator(concat_inputs(f.feat_s, f.pseudo_nonshadow));
    }
  }
  return f;
}

SynthForward forward_synth(Encoder& encoder, Generator& generator, const torch::Tensor& shadow_region,
                           const torch::Tensor& nonshadow_region, const ForwardBranches& branches) {
  return forward_synth([&](const torch::Tensor& x) { return encoder->forward(x); },
                       [&](const torch::Tensor& x) { return generator->forward(x); }, shadow_region,
                       nonshadow_region, branches);
}

SynthTrainer::SynthTrainer(SynthNets nets, const TrainConfig& cfg)
    : nets_(std::move(nets)),
      cfg_(cfg),
      gen_opt_(joint_parameters(*nets_.encoder, *nets_.generator), adam_options(cfg)),
      disc_opt_(joint_parameters(*nets_.shadow_disc, *nets_.nonshadow_disc), adam_options(cfg)) {}

void SynthTrainer::set_learning_rate(double lr) {
  for (auto* opt : {&gen_opt_, &disc_opt_})
    for (auto& group : opt->param_groups()) static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
}

LossReport SynthTrainer::train_step(const torch::Tensor& shadow_region, const torch::Tensor& nonshadow_region) {
  const Ablation& ab = cfg_.ablation;
  const bool use_disc = !ab.no_disc;
  const bool with_pn = !ab.no_pseudo_nonshadow;
  const ForwardBranches branches{!ab.no_self, !ab.no_cycle, with_pn};
  auto& ds = nets_.shadow_disc;
  auto& df = nets_.nonshadow_disc;

  // Generator side: discriminators contribute to the graph but receive no gradient.
  set_requires_grad(*ds, false);
  set_requires_grad(*df, false);
  const SynthForward f = forward_synth(nets_.encoder, nets_.generator, shadow_region, nonshadow_region, branches);

  SynthLossTerms terms;
  if (branches.self) {
    terms.self_rec_s = loss_rec(shadow_region, f.rec_s);
    terms.self_rec_f = loss_rec(nonshadow_region, f.rec_f);
  }
  if (use_disc) {
    const auto d_pseudo_shadow = ds->forward(f.pseudo_shadow);
    terms.adv_gen = with_pn ? loss_adv_gen(d_pseudo_shadow, df->forward(f.pseudo_nonshadow))
                            : 0.5 * (d_pseudo_shadow - 1.0).square().mean();
  }
  if (!ab.no_color)
    terms.color = with_pn ? loss_color(f.pseudo_shadow, nonshadow_region, f.pseudo_nonshadow, shadow_region)
                          : l1(take_ab(f.pseudo_shadow), take_ab(nonshadow_region));
  if (branches.cycle) {
    terms.cycle_rec = with_pn ? loss_cycle_rec(nonshadow_region, f.back_f, shadow_region, f.back_s)
                              : loss_rec(nonshadow_region, f.back_f);
    terms.cycle_feat = with_pn ? loss_cycle_feat(f.feat_s, f.cycle_feat_s, f.feat_f, f.cycle_feat_f)
                               : l1(f.feat_s, f.cycle_feat_s);
  }

  // Discriminator side on detached pseudo images.
  if (use_disc) {
    set_requires_grad(*ds, true);
    set_requires_grad(*df, true);
    terms.adv_shadow_disc = loss_adv_disc(ds->forward(f.pseudo_shadow.detach()), ds->forward(shadow_region));
    if (with_pn)
      terms.adv_nonshadow_disc =
          loss_adv_disc(df->forward(f.pseudo_nonshadow.detach()), df->forward(nonshadow_region));
  }

  WeightedLoss loss = loss_total_synth(terms, cfg_.weights);
  if (!loss.report.all_finite()) throw TrainingDiverged("non-finite synthesis loss: " + loss.report.to_json_line());

  // Discriminator terms see only detached inputs and the generator terms see frozen discriminators,
  // so one backward pass yields exactly the per-player gradients.
  gen_opt_.zero_grad();
  disc_opt_.zero_grad();
  if (loss.total.requires_grad()) loss.total.backward();
  gen_opt_.step();
  if (phase_hook_) phase_hook_();
  if (use_disc) disc_opt_.step();
  set_requires_grad(*ds, true);
  set_requires_grad(*df, true);
  return loss.report;
}

SynthRunSummary train_synth(SynthTrainer& trainer, const Dataset& data, const StepCallback& on_step) {
  const TrainConfig& cfg = trainer.config();
  if (data.empty()) throw DataError("training dataset is empty");
  if (cfg.batch_size < 1) throw ValidationError("batch_size must be >= 1");

  Rng rng(cfg.seed);
  const std::vector<BinaryMask> pool = data.load_all_masks();
  std::vector<std::optional<std::size_t>> frozen_choice(data.size());
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  SynthRunSummary summary;
  std::vector<torch::Tensor> batch_s, batch_f;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    trainer.set_learning_rate(lr_at(epoch, cfg));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      const Sample sample = augment(data.load(idx), cfg.augment, rng);
      NonShadowDraw draw;
      try {
        if (frozen_choice[idx]) {
          const BinaryMask& m = pool[*frozen_choice[idx]];
          draw = sample_nonshadow_mask(sample, std::span<const BinaryMask>(&m, 1), rng, cfg.nonshadow);
          draw.pool_index = *frozen_choice[idx];
        } else {
          draw = sample_nonshadow_mask(sample, pool, rng, cfg.nonshadow, idx);
          if (cfg.freeze_nonshadow_masks) frozen_choice[idx] = draw.pool_index;
        }
      } catch (const ValidationError& e) {
        std::cerr << "warning: skipping " << sample.name << ": " << e.what() << "\n";
        continue;
      }
      const auto [shadow, nonshadow] = decouple(sample, draw.mask);
      batch_s.push_back(region_tensor(shadow));
      batch_f.push_back(region_tensor(nonshadow));
      if (static_cast<int>(batch_s.size()) < cfg.batch_size) continue;

      LossReport report = trainer.train_step(torch::cat(batch_s, 0), torch::cat(batch_f, 0));
      batch_s.clear();
      batch_f.clear();
      if (on_step) on_step(summary.steps, epoch, report);
      summary.reports.push_back(std::move(report));
      ++summary.steps;
      if (cfg.max_steps >= 0 && summary.steps >= cfg.max_steps) {
        summary.epochs_completed = epoch + 1;
        return summary;
      }
    }
    summary.epochs_completed = epoch + 1;
  }
  return summary;
}

std::size_t export_pseudo_pairs(SynthNets& nets, const Dataset& data, const fs::path& out_dir,
                                const ExportOptions& opts) {
  torch::NoGradGuard no_grad;
  nets.encoder->eval();
  nets.generator->eval();
  Rng rng(opts.seed);
  const std::vector<BinaryMask> pool = data.load_all_masks();
  for (const char* sub : {"images", "gt", "masks", "source"}) fs::create_directories(out_dir / sub);

  std::size_t written = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Sample sample = data.load(i);
    const std::string stem = fs::path(sample.name).stem().string();
    for (int k = 0; k < opts.pairs_per_image; ++k) {
      const NonShadowDraw draw = sample_nonshadow_mask(sample, pool, rng, opts.nonshadow, i);
      const auto [shadow, nonshadow] = decouple(sample, draw.mask);
      const torch::Tensor shadow_t = region_tensor(shadow);
      const torch::Tensor nonshadow_t = region_tensor(nonshadow);
      const torch::Tensor pseudo =
          nets.generator->forward(concat_inputs(nets.encoder->forward(shadow_t), nonshadow_t));
      const RegionIdentity pseudo_region = restrict_to(from_network(pseudo), draw.mask);
      validate_lab(pseudo_region.image);

      const std::string name = stem + "_" + std::to_string(k) + ".png";
      write_png_rgb(out_dir / "images" / name, lab_to_rgb(pseudo_region.image));
      write_png_rgb(out_dir / "gt" / name, lab_to_rgb(nonshadow.image));
      write_png_mask(out_dir / "masks" / name, draw.mask);
      fs::copy_file(data.entries()[i].image, out_dir / "source" / name, fs::copy_options::overwrite_existing);
      ++written;
    }
  }
  return written;
}

void enable_deterministic_mode() {
  torch::set_num_threads(1);
  at::globalContext().setDeterministicAlgorithms(true, false);
}

}  // namespace hqss
