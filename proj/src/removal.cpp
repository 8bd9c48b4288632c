#include "hqss/removal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hqss/colorspace.hpp"
#include "hqss/error.hpp"
#include "hqss/png_io.hpp"
#include "hqss/tensors.hpp"

namespace hqss {

namespace fs = std::filesystem;

int scaled_dilation_kernel(int image_size) {
  return std::max(3, static_cast<int>(std::lround(image_size * 50.0 / 400.0)));
}

RemovalNets make_removal_nets(const NetConfig& cfg, std::uint64_t seed) {
  auto [inverse, refine] = build_removal_nets(cfg);
  init_weights(*inverse, seed * 16 + 5);
  init_weights(*refine, seed * 16 + 6);
  return {inverse, refine};
}

PseudoPairSet::PseudoPairSet(const fs::path& dir) : dir_(dir) {
  const fs::path images = dir / "images";
  if (!fs::is_directory(images)) throw DataError("pseudo-pair directory lacks images/: " + dir.string());
  for (const auto& de : fs::directory_iterator(images))
    if (de.is_regular_file() && de.path().extension() == ".png") names_.push_back(de.path().filename().string());
  std::sort(names_.begin(), names_.end());
  for (const auto& n : names_)
    for (const char* sub : {"gt", "masks", "source"})
      if (!fs::exists(dir / sub / n)) throw DataError("missing " + std::string(sub) + "/" + n);
}

PseudoPair PseudoPairSet::load(std::size_t index) const {
  const std::string& n = names_.at(index);
  PseudoPair p;
  p.name = n;
  p.pseudo_shadow = rgb_to_lab(read_png_rgb(dir_ / "images" / n));
  const BinaryMask mask = read_png_mask(dir_ / "masks" / n, MaskKind::kNonShadow);
  p.target_nonshadow = restrict_to(rgb_to_lab(read_png_rgb(dir_ / "gt" / n)), mask);
  p.source = rgb_to_lab(read_png_rgb(dir_ / "source" / n));
  if (!p.pseudo_shadow.same_shape(p.source) || !mask.same_shape(p.source))
    throw DataError("dimension mismatch in pseudo pair " + n);
  p.pseudo_shadow = restrict_to(p.pseudo_shadow, mask).image;
  return p;
}

torch::Tensor compose(const torch::Tensor& coarse, const torch::Tensor& image, const torch::Tensor& mask) {
  if (coarse.sizes() != image.sizes()) throw ShapeError("compose: image shapes differ");
  return coarse * mask + image * (1.0 - mask);
}

LabImage compose(const LabImage& coarse, const LabImage& image, const BinaryMask& mask) {
  if (!coarse.same_shape(image) || !mask.same_shape(image)) throw ShapeError("compose: shapes differ");
  LabImage out = image;
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x)
      if (mask.at(y, x))
        for (int c = 0; c < 3; ++c) out.at(y, x, c) = coarse.at(y, x, c);
  return out;
}

RemovalTrainer::RemovalTrainer(RemovalNets nets, const RemovalConfig& cfg)
    : nets_(std::move(nets)),
      cfg_(cfg),
      opt_(
          [&] {
            auto p = nets_.inverse->parameters();
            auto q = nets_.refine->parameters();
            p.insert(p.end(), q.begin(), q.end());
            return p;
          }(),
          torch::optim::AdamOptions(cfg.lr).betas({cfg.beta1, cfg.beta2})) {}

void RemovalTrainer::set_learning_rate(double lr) {
  for (auto& group : opt_.param_groups()) static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
}

LossReport RemovalTrainer::train_step(const torch::Tensor& pseudo_shadow, const torch::Tensor& nonshadow_target,
                                      const torch::Tensor& source, const torch::Tensor& pair_mask,
                                      const torch::Tensor& dilated_mask) {
  nets_.inverse->train();
  nets_.refine->train();
  const auto coarse = nets_.inverse->forward(pseudo_shadow);
  const auto composed = compose(coarse, source, pair_mask);
  const auto refined = nets_.refine->forward(composed);
  WeightedLoss loss = loss_removal(coarse, nonshadow_target, refined, source, dilated_mask);
  if (!loss.report.all_finite()) throw TrainingDiverged("non-finite removal loss: " + loss.report.to_json_line());
  opt_.zero_grad();
  loss.total.backward();
  opt_.step();
  return loss.report;
}

RemovalRunSummary train_removal(RemovalTrainer& trainer, const PseudoPairSet& pairs,
                                const RemovalStepCallback& on_step) {
  const RemovalConfig& cfg = trainer.config();
  if (pairs.empty()) throw DataError("no pseudo pairs to train on");
  if (cfg.batch_size < 1) throw ValidationError("batch_size must be >= 1");
  const int kernel = cfg.dilation_kernel > 0 ? cfg.dilation_kernel : scaled_dilation_kernel(cfg.augment.crop);

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  RemovalRunSummary summary;
  std::vector<torch::Tensor> pseudo_b, target_b, source_b, mask_b, dilated_b;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    trainer.set_learning_rate(lr_at(epoch, cfg.schedule()));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      const PseudoPair p = pairs.load(idx);
      const AugmentWindow win = draw_augment_window(cfg.augment, rng);
      const BinaryMask mask = apply_window(win, p.target_nonshadow.mask);
      const torch::Tensor mask_t = mask_to_tensor(mask);
      pseudo_b.push_back(to_network(apply_window(win, p.pseudo_shadow)) * mask_t);
      target_b.push_back(to_network(apply_window(win, p.target_nonshadow.image)) * mask_t);
      source_b.push_back(to_network(apply_window(win, p.source)));
      mask_b.push_back(mask_t);
      dilated_b.push_back(mask_to_tensor(dilate_mask(mask, kernel)));
      if (static_cast<int>(pseudo_b.size()) < cfg.batch_size) continue;

      LossReport report = trainer.train_step(torch::cat(pseudo_b, 0), torch::cat(target_b, 0),
                                             torch::cat(source_b, 0), torch::cat(mask_b, 0),
                                             torch::cat(dilated_b, 0));
      for (auto* b : {&pseudo_b, &target_b, &source_b, &mask_b, &dilated_b}) b->clear();
      if (on_step) on_step(summary.steps, epoch, report);
      summary.reports.push_back(std::move(report));
      ++summary.steps;
      if (cfg.max_steps >= 0 && summary.steps >= cfg.max_steps) return summary;
    }
  }
  return summary;
}

RemovalOutput remove_shadow(RemovalNets& nets, const LabImage& image, const BinaryMask& mask) {
  if (!mask.same_shape(image)) throw ShapeError("image and mask dimensions differ");
  if (image.height() % 4 != 0 || image.width() % 4 != 0) throw ShapeError("dims must be divisible by 4");
  torch::NoGradGuard no_grad;
  nets.inverse->eval();
  nets.refine->eval();
  RemovalOutput out;
  const torch::Tensor shadow_region = region_tensor(restrict_to(image, mask));
  out.coarse = from_network(nets.inverse->forward(shadow_region));
  out.composed = compose(out.coarse, image, mask);
  out.refined = from_network(nets.refine->forward(to_network(out.composed)));
  return out;
}

}  // namespace hqss
