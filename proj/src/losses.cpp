#include "hqss/losses.hpp"

#include <cmath>
#include <json.hpp>

#include "hqss/error.hpp"

namespace hqss {

namespace {

void require_same_shape(const torch::Tensor& a, const torch::Tensor& b, const char* what) {
  if (a.sizes() != b.sizes()) throw ShapeError(std::string(what) + ": input shapes differ");
}

double scalar(const torch::Tensor& t) { return t.defined() ? t.detach().item<double>() : 0.0; }

}  // namespace

std::array<double, 8> LossWeights::as_array() const {
  return {self_shadow, self_nonshadow, adv_gen, color, adv_shadow_disc, adv_nonshadow_disc, cycle_rec, cycle_feat};
}

LossWeights LossWeights::from_array(const std::array<double, 8>& w) {
  return {w[0], w[1], w[2], w[3], w[4], w[5], w[6], w[7]};
}

bool LossReport::all_finite() const {
  for (const auto& [_, v] : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

std::string LossReport::to_json_line(long step) const {
  nlohmann::json j = nlohmann::json::object();
  if (step >= 0) j["step"] = step;
  for (const auto& [k, v] : values_) j[k] = v;
  return j.dump();
}

torch::Tensor l1(const torch::Tensor& a, const torch::Tensor& b) {
  require_same_shape(a, b, "l1");
  return (a - b).abs().mean();
}

torch::Tensor ffl_weights(const torch::Tensor& a, const torch::Tensor& b, double alpha) {
  require_same_shape(a, b, "ffl");
  torch::NoGradGuard no_grad;
  const auto diff = torch::fft::fft2(a.detach(), c10::nullopt, {-2, -1}, "ortho") -
                    torch::fft::fft2(b.detach(), c10::nullopt, {-2, -1}, "ortho");
  auto w = torch::pow(diff.abs(), alpha);
  const auto peak = std::get<0>(std::get<0>(w.max(-1, true)).max(-2, true));
  w = w / peak;
  w = torch::nan_to_num(w, 0.0, 0.0, 0.0).clamp(0.0, 1.0);
  return w;
}

torch::Tensor ffl_weighted(const torch::Tensor& a, const torch::Tensor& b, const torch::Tensor& weights) {
  require_same_shape(a, b, "ffl");
  const auto diff = torch::fft::fft2(a, c10::nullopt, {-2, -1}, "ortho") -
                    torch::fft::fft2(b, c10::nullopt, {-2, -1}, "ortho");
  const auto distance = torch::real(diff).square() + torch::imag(diff).square();
  return (weights * distance).mean();
}

torch::Tensor ffl(const torch::Tensor& a, const torch::Tensor& b, double alpha) {
  if (a.dim() < 2) throw ShapeError("ffl expects at least 2-D inputs");
  return ffl_weighted(a, b, ffl_weights(a, b, alpha));
}

torch::Tensor loss_rec(const torch::Tensor& target, const torch::Tensor& pseudo) {
  return l1(target, pseudo) + ffl(target, pseudo);
}

torch::Tensor loss_self(const torch::Tensor& shadow_region, const torch::Tensor& nonshadow_region,
                        const torch::Tensor& rec_shadow, const torch::Tensor& rec_nonshadow, const LossWeights& w) {
  return w.self_shadow * loss_rec(shadow_region, rec_shadow) +
         w.self_nonshadow * loss_rec(nonshadow_region, rec_nonshadow);
}

torch::Tensor loss_adv_gen(const torch::Tensor& d_shadow_out, const torch::Tensor& d_nonshadow_out) {
  return 0.5 * (d_shadow_out - 1.0).square().mean() + 0.5 * (d_nonshadow_out - 1.0).square().mean();
}

torch::Tensor loss_adv_disc(const torch::Tensor& d_fake, const torch::Tensor& d_real) {
  return d_fake.square().mean() + (d_real - 1.0).square().mean();
}

torch::Tensor take_ab(const torch::Tensor& lab) {
  if (lab.dim() != 4 || lab.size(1) != 3) throw ShapeError("take_ab expects [N,3,H,W]");
  return lab.slice(1, 1, 3);
}

torch::Tensor loss_color(const torch::Tensor& pseudo_shadow, const torch::Tensor& nonshadow_region,
                         const torch::Tensor& pseudo_nonshadow, const torch::Tensor& shadow_region) {
  return l1(take_ab(pseudo_shadow), take_ab(nonshadow_region)) +
         l1(take_ab(pseudo_nonshadow), take_ab(shadow_region));
}

torch::Tensor loss_cycle_feat(const torch::Tensor& feat_s, const torch::Tensor& cycle_feat_s,
                              const torch::Tensor& feat_f, const torch::Tensor& cycle_feat_f) {
  return l1(feat_s, cycle_feat_s) + l1(feat_f, cycle_feat_f);
}

torch::Tensor loss_cycle_rec(const torch::Tensor& nonshadow_region, const torch::Tensor& back_nonshadow,
                             const torch::Tensor& shadow_region, const torch::Tensor& back_shadow) {
  return loss_rec(nonshadow_region, back_nonshadow) + loss_rec(shadow_region, back_shadow);
}

WeightedLoss loss_total_synth(const SynthLossTerms& t, const LossWeights& w) {
  struct Part {
    const char* name;
    const torch::Tensor* value;
    double weight;
    bool generator_side;
  };
  const Part parts[] = {
      {"self_rec_s", &t.self_rec_s, w.self_shadow, true},
      {"self_rec_f", &t.self_rec_f, w.self_nonshadow, true},
      {"adv_G", &t.adv_gen, w.adv_gen, true},
      {"color", &t.color, w.color, true},
      {"adv_Ds", &t.adv_shadow_disc, w.adv_shadow_disc, false},
      {"adv_Df", &t.adv_nonshadow_disc, w.adv_nonshadow_disc, false},
      {"cycle_rec", &t.cycle_rec, w.cycle_rec, true},
      {"cycle_feat", &t.cycle_feat, w.cycle_feat, true},
  };
  WeightedLoss out;
  double gen_total = 0.0, disc_total = 0.0;
  for (const Part& p : parts) {
    const double v = scalar(*p.value);
    out.report.set(p.name, v);
    (p.generator_side ? gen_total : disc_total) += p.weight * v;
    if (!p.value->defined()) continue;
    const auto term = p.weight * (*p.value);
    out.total = out.total.defined() ? out.total + term : term;
  }
  if (!out.total.defined()) out.total = torch::zeros({});
  out.report.set("gen_total", gen_total);
  out.report.set("disc_total", disc_total);
  out.report.set("total", gen_total + disc_total);
  return out;
}

WeightedLoss loss_removal(const torch::Tensor& coarse, const torch::Tensor& nonshadow_target,
                          const torch::Tensor& refined, const torch::Tensor& image, const torch::Tensor& dilated_mask) {
  const auto inverse = l1(coarse, nonshadow_target);
  const auto refine = l1(refined, image) + l1(dilated_mask * refined, dilated_mask * image);
  WeightedLoss out{inverse + refine, {}};
  out.report.set("inverse", scalar(inverse));
  out.report.set("refine", scalar(refine));
  out.report.set("removal_total", scalar(inverse) + scalar(refine));
  return out;
}

}  // namespace hqss
