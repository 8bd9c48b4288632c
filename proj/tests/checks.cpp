#include "checks.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <random>
#include <sstream>

#include "hqss/losses.hpp"
#include "hqss/nets.hpp"
#include "hqss/synth_trainer.hpp"
#include "support.hpp"

using namespace hqss;

namespace checks {

namespace {

torch::Tensor rand_d(std::vector<int64_t> shape, int64_t seed) {
  auto g = at::make_generator<at::CPUGeneratorImpl>(seed);
  return torch::rand(shape, g, torch::TensorOptions().dtype(torch::kDouble)) * 2.0 - 1.0;
}

// Surrogate with the FFL weights frozen at x0, matching the detached weights of the analytic gradient.
torch::Tensor rec_frozen(const torch::Tensor& target, const torch::Tensor& pseudo, const torch::Tensor& w) {
  return l1(target, pseudo) + ffl_weighted(target, pseudo, w);
}

}  // namespace

std::vector<NamedValue> loss_fixed_points() {
  const auto x = rand_d({2, 3, 8, 8}, 1);
  const auto y = rand_d({2, 3, 8, 8}, 2);
  const auto f = rand_d({2, 4, 8, 8}, 3);
  const auto ones = torch::ones({2}, torch::kDouble);
  const auto zeros = torch::zeros({2}, torch::kDouble);
  // Same A,B channels, different L.
  auto x_other_l = x.clone();
  x_other_l.select(1, 0).copy_(y.select(1, 0));
  auto y_other_l = y.clone();
  y_other_l.select(1, 0).copy_(x.select(1, 0));
  const auto mask = (rand_d({2, 1, 8, 8}, 4) > 0).to(torch::kDouble);

  std::vector<NamedValue> out;
  out.push_back({"l1", l1(x, x).item<double>()});
  out.push_back({"ffl", ffl(x, x).item<double>()});
  out.push_back({"loss_rec", loss_rec(x, x).item<double>()});
  out.push_back({"loss_self", loss_self(x, y, x, y, LossWeights{}).item<double>()});
  out.push_back({"loss_adv_gen", loss_adv_gen(ones, ones).item<double>()});
  out.push_back({"loss_adv_disc", loss_adv_disc(zeros, ones).item<double>()});
  out.push_back({"loss_color", loss_color(x_other_l, x, y_other_l, y).item<double>()});
  out.push_back({"loss_cycle_feat", loss_cycle_feat(f, f, f * 2, f * 2).item<double>()});
  out.push_back({"loss_cycle_rec", loss_cycle_rec(x, x, y, y).item<double>()});
  SynthLossTerms zero_terms;
  for (auto* t : {&zero_terms.self_rec_s, &zero_terms.self_rec_f, &zero_terms.adv_gen, &zero_terms.color,
                  &zero_terms.adv_shadow_disc, &zero_terms.adv_nonshadow_disc, &zero_terms.cycle_rec,
                  &zero_terms.cycle_feat})
    *t = torch::zeros({}, torch::kDouble);
  out.push_back({"loss_total_synth", loss_total_synth(zero_terms, LossWeights{}).total.item<double>()});
  out.push_back({"loss_removal", loss_removal(x, x, y, y, mask).total.item<double>()});
  return out;
}

std::vector<NamedValue> loss_gradient_errors() {
  const auto a = rand_d({2, 3, 8, 8}, 11);
  const auto b = rand_d({2, 3, 8, 8}, 12);
  const auto c = rand_d({2, 3, 8, 8}, 13);
  const auto d = rand_d({2, 3, 8, 8}, 14);
  const auto fa = rand_d({2, 4, 8, 8}, 15);
  const auto fb = rand_d({2, 4, 8, 8}, 16);
  const auto fc = rand_d({2, 4, 8, 8}, 17);
  const auto ds = rand_d({2}, 18);
  const auto df = rand_d({2}, 19);
  const auto mask = (rand_d({2, 1, 8, 8}, 20) > 0).to(torch::kDouble);
  const auto w_ab = ffl_weights(a, b);
  const auto w_cd = ffl_weights(c, d);
  const LossWeights weights;

  std::vector<NamedValue> out;
  auto add = [&](const char* name, const std::function<torch::Tensor(const torch::Tensor&)>& fn,
                 const torch::Tensor& x0) { out.push_back({name, testing::fd_relative_error(fn, x0)}); };

  add("l1", [&](const torch::Tensor& x) { return l1(x, b); }, a);
  add("ffl", [&](const torch::Tensor& x) { return x.requires_grad() ? ffl(x, b) : ffl_weighted(x, b, w_ab); }, a);
  add("loss_rec",
      [&](const torch::Tensor& x) { return x.requires_grad() ? loss_rec(x, b) : rec_frozen(x, b, w_ab); }, a);
  add("loss_self",
      [&](const torch::Tensor& x) {
        if (x.requires_grad()) return loss_self(x, c, b, d, weights);
        return weights.self_shadow * rec_frozen(x, b, w_ab) + weights.self_nonshadow * rec_frozen(c, d, w_cd);
      },
      a);
  add("loss_adv_gen", [&](const torch::Tensor& x) { return loss_adv_gen(x, df); }, ds);
  add("loss_adv_gen[D_f]", [&](const torch::Tensor& x) { return loss_adv_gen(ds, x); }, df);
  add("loss_adv_disc[fake]", [&](const torch::Tensor& x) { return loss_adv_disc(x, df); }, ds);
  add("loss_adv_disc[real]", [&](const torch::Tensor& x) { return loss_adv_disc(ds, x); }, df);
  add("loss_color", [&](const torch::Tensor& x) { return loss_color(x, b, c, d); }, a);
  add("loss_color[pseudo_nonshadow]", [&](const torch::Tensor& x) { return loss_color(a, b, x, d); }, c);
  add("loss_cycle_feat", [&](const torch::Tensor& x) { return loss_cycle_feat(fa, x, fb, fc); }, fc * 0.5 + 0.1);
  add("loss_cycle_rec",
      [&](const torch::Tensor& x) {
        if (x.requires_grad()) return loss_cycle_rec(b, x, d, c);
        return rec_frozen(b, x, ffl_weights(b, a)) + rec_frozen(d, c, ffl_weights(d, c));
      },
      a);
  add("loss_removal[coarse]", [&](const torch::Tensor& x) { return loss_removal(x, b, c, d, mask).total; }, a);
  add("loss_removal[refined]", [&](const torch::Tensor& x) { return loss_removal(a, b, x, d, mask).total; }, c);
  return out;
}

namespace {

// Fixed random projection so that the scalar is not annihilated by instance norm.
torch::Tensor project(const torch::Tensor& out, int64_t seed) {
  auto g = at::make_generator<at::CPUGeneratorImpl>(seed);
  const auto r = torch::randn(out.sizes(), g, torch::TensorOptions().dtype(torch::kDouble));
  return (out * r).sum();
}

template <class Net>
NamedValue net_check(const std::string& name, Net& net, const torch::Tensor& x0, int64_t seed) {
  net->to(torch::kDouble);
  init_weights(*net, static_cast<std::uint64_t>(seed));
  // Larger weights than the N(0, 0.02) init so that every layer carries signal.
  {
    torch::NoGradGuard ng;
    for (auto& p : net->parameters()) p.mul_(10.0);
  }
  const double input_error =
      testing::fd_relative_error([&](const torch::Tensor& x) { return project(net->forward(x), seed); }, x0);
  const double param_error = testing::fd_parameter_error([&] { return project(net->forward(x0), seed); },
                                                         net->parameters(), 12, static_cast<std::uint64_t>(seed));
  return {name, std::max(input_error, param_error)};
}

}  // namespace

std::vector<NamedValue> network_gradient_errors() {
  NetConfig cfg;
  cfg.feat_channels = 4;
  cfg.base_channels = 4;
  cfg.residual_blocks = 1;
  cfg.disc_channels = 4;
  std::vector<NamedValue> out;
  {
    Encoder e(3, cfg.feat_channels);
    out.push_back(net_check("encoder", e, rand_d({1, 3, 8, 8}, 31), 31));
  }
  {
    Generator g(cfg.feat_channels + 3, cfg);
    out.push_back(net_check("generator", g, rand_d({1, cfg.feat_channels + 3, 8, 8}, 32), 32));
  }
  {
    Discriminator d(3, cfg);
    out.push_back(net_check("discriminator", d, rand_d({2, 3, 16, 16}, 33), 33));
  }
  {
    auto [inverse, refine] = build_removal_nets(cfg);
    out.push_back(net_check("removal_inverse", inverse, rand_d({1, 3, 8, 8}, 34), 34));
    out.push_back(net_check("removal_refine", refine, rand_d({1, 3, 8, 8}, 35), 35));
  }
  {
    ResidualBlock r(4);
    out.push_back(net_check("residual_block", r, rand_d({1, 4, 8, 8}, 36), 36));
  }
  return out;
}

double ffl_by_dft(const torch::Tensor& a, const torch::Tensor& b) {
  const auto ac = a.to(torch::kDouble).contiguous();
  const auto bc = b.to(torch::kDouble).contiguous();
  const int64_t n = ac.size(0), c = ac.size(1), h = ac.size(2), w = ac.size(3);
  const long double pi = std::acos(-1.0L);
  long double total = 0.0L;
  for (int64_t i = 0; i < n; ++i)
    for (int64_t ch = 0; ch < c; ++ch) {
      std::vector<long double> mag(h * w);
      for (int64_t u = 0; u < h; ++u)
        for (int64_t v = 0; v < w; ++v) {
          std::complex<long double> s = 0.0L;
          for (int64_t y = 0; y < h; ++y)
            for (int64_t x = 0; x < w; ++x) {
              const long double diff =
                  static_cast<long double>(ac[i][ch][y][x].item<double>()) - bc[i][ch][y][x].item<double>();
              const long double ang = -2.0L * pi * (static_cast<long double>(u * y) / h + static_cast<long double>(v * x) / w);
              s += diff * std::complex<long double>(std::cos(ang), std::sin(ang));
            }
          s /= std::sqrt(static_cast<long double>(h * w));
          mag[u * w + v] = std::abs(s);
        }
      long double peak = 0.0L;
      for (auto m : mag) peak = std::max(peak, m);
      for (auto m : mag) total += (peak > 0 ? m / peak : 0.0L) * m * m;
    }
  return static_cast<double>(total / static_cast<long double>(n * c * h * w));
}

namespace {

// Marker tensors: every value is a constant-filled tensor whose fill encodes an id.
// Networks decode their inputs' ids and emit a fresh id, recording the expression.
class Tracer {
 public:
  explicit Tracer(int feat_channels) : feat_channels_(feat_channels) {}

  torch::Tensor leaf(const std::string& name, int channels) { return make(name, channels); }

  torch::Tensor encoder(const torch::Tensor& x) {
    ++encoder_calls;
    if (x.size(1) != 3) failures.push_back("encoder received " + std::to_string(x.size(1)) + " channels");
    return make("E(" + decode(x, 0, 3) + ")", feat_channels_);
  }

  torch::Tensor generator(const torch::Tensor& x) {
    ++generator_calls;
    if (x.size(1) != feat_channels_ + 3) failures.push_back("generator received wrong channel count");
    return make("G(" + decode(x, 0, feat_channels_) + ", " + decode(x, feat_channels_, feat_channels_ + 3) + ")", 3);
  }

  std::string name_of(const torch::Tensor& t) {
    if (!t.defined()) return "<undefined>";
    return decode(t, 0, t.size(1));
  }

  int encoder_calls = 0;
  int generator_calls = 0;
  std::vector<std::string> failures;

 private:
  torch::Tensor make(const std::string& name, int channels) {
    names_.push_back(name);
    return torch::full({1, channels, 4, 4}, static_cast<double>(names_.size()), torch::kDouble);
  }

  // Channels [lo, hi) must all carry the same id.
  std::string decode(const torch::Tensor& x, int64_t lo, int64_t hi) {
    const auto block = x.slice(1, lo, hi);
    const double id = block.min().item<double>();
    if (block.max().item<double>() != id || id < 1 || id > static_cast<double>(names_.size()) || id != std::floor(id)) {
      failures.push_back("channels [" + std::to_string(lo) + "," + std::to_string(hi) + ") mix markers");
      return "?";
    }
    return names_[static_cast<std::size_t>(id) - 1];
  }

  int feat_channels_;
  std::vector<std::string> names_;
};

}  // namespace

Audit wiring_audit() {
  Audit audit;
  auto expect = [&](const std::string& what, const std::string& got, const std::string& want) {
    if (got != want) {
      audit.ok = false;
      audit.failures.push_back(what + ": got " + got + ", want " + want);
    }
  };

  Tracer t(5);
  const auto i_s = t.leaf("I_s", 3);
  const auto i_f = t.leaf("I_f", 3);
  const SynthForward f = forward_synth([&](const torch::Tensor& x) { return t.encoder(x); },
                                       [&](const torch::Tensor& x) { return t.generator(x); }, i_s, i_f);
  const std::string fs = "E(I_s)", ff = "E(I_f)";
  const std::string ps = "G(" + fs + ", I_f)";  // pseudo shadow image I'_{F_s,I_f}
  const std::string pn = "G(" + ff + ", I_s)";  // pseudo non-shadow image I'_{F_f,I_s}
  expect("feat_s", t.name_of(f.feat_s), fs);
  expect("feat_f", t.name_of(f.feat_f), ff);
  expect("rec_s", t.name_of(f.rec_s), "G(" + fs + ", I_s)");
  expect("rec_f", t.name_of(f.rec_f), "G(" + ff + ", I_f)");
  expect("pseudo_shadow", t.name_of(f.pseudo_shadow), ps);
  expect("pseudo_nonshadow", t.name_of(f.pseudo_nonshadow), pn);
  expect("cycle_feat_s", t.name_of(f.cycle_feat_s), "E(" + ps + ")");
  expect("cycle_feat_f", t.name_of(f.cycle_feat_f), "E(" + pn + ")");
  expect("back_f", t.name_of(f.back_f), "G(" + ff + ", " + ps + ")");
  expect("back_s", t.name_of(f.back_s), "G(" + fs + ", " + pn + ")");
  expect("encoder calls", std::to_string(t.encoder_calls), "4");
  expect("generator calls", std::to_string(t.generator_calls), "6");

  // Branch switches drop exactly their outputs.
  Tracer t2(5);
  const auto j_s = t2.leaf("I_s", 3);
  const auto j_f = t2.leaf("I_f", 3);
  const SynthForward g = forward_synth([&](const torch::Tensor& x) { return t2.encoder(x); },
                                       [&](const torch::Tensor& x) { return t2.generator(x); }, j_s, j_f,
                                       ForwardBranches{false, true, false});
  expect("no_self rec_s", t2.name_of(g.rec_s), "<undefined>");
  expect("no_pseudo_nonshadow pseudo_nonshadow", t2.name_of(g.pseudo_nonshadow), "<undefined>");
  expect("no_pseudo_nonshadow back_s", t2.name_of(g.back_s), "<undefined>");
  expect("no_pseudo_nonshadow cycle_feat_f", t2.name_of(g.cycle_feat_f), "<undefined>");
  expect("reduced back_f", t2.name_of(g.back_f), "G(E(I_f), G(E(I_s), I_f))");

  for (auto* tr : {&t, &t2})
    for (const auto& msg : tr->failures) {
      audit.ok = false;
      audit.failures.push_back(msg);
    }
  return audit;
}

double report_consistency_error() {
  NetConfig cfg;
  cfg.feat_channels = 4;
  cfg.base_channels = 4;
  cfg.residual_blocks = 1;
  cfg.disc_channels = 4;
  TrainConfig tc;
  tc.net = cfg;
  SynthNets nets = make_synth_nets(cfg, 5);
  auto gen = at::make_generator<at::CPUGeneratorImpl>(77);
  const auto s = torch::rand({1, 3, 16, 16}, gen) * 2 - 1;
  const auto f = torch::rand({1, 3, 16, 16}, gen) * 2 - 1;
  const LossWeights& w = tc.weights;

  std::map<std::string, double> want;
  {
    torch::NoGradGuard ng;
    const SynthForward fw = forward_synth(nets.encoder, nets.generator, s, f);
    auto& ds = nets.shadow_disc;
    auto& df = nets.nonshadow_disc;
    want["self_rec_s"] = loss_rec(s, fw.rec_s).item<double>();
    want["self_rec_f"] = loss_rec(f, fw.rec_f).item<double>();
    want["adv_G"] = loss_adv_gen(ds->forward(fw.pseudo_shadow), df->forward(fw.pseudo_nonshadow)).item<double>();
    want["color"] = loss_color(fw.pseudo_shadow, f, fw.pseudo_nonshadow, s).item<double>();
    want["adv_Ds"] = loss_adv_disc(ds->forward(fw.pseudo_shadow), ds->forward(s)).item<double>();
    want["adv_Df"] = loss_adv_disc(df->forward(fw.pseudo_nonshadow), df->forward(f)).item<double>();
    want["cycle_rec"] = loss_cycle_rec(f, fw.back_f, s, fw.back_s).item<double>();
    want["cycle_feat"] = loss_cycle_feat(fw.feat_s, fw.cycle_feat_s, fw.feat_f, fw.cycle_feat_f).item<double>();
    want["gen_total"] = w.self_shadow * want["self_rec_s"] + w.self_nonshadow * want["self_rec_f"] +
                        w.adv_gen * want["adv_G"] + w.color * want["color"] + w.cycle_rec * want["cycle_rec"] +
                        w.cycle_feat * want["cycle_feat"];
    want["disc_total"] = w.adv_shadow_disc * want["adv_Ds"] + w.adv_nonshadow_disc * want["adv_Df"];
    want["total"] = want["gen_total"] + want["disc_total"];
  }
  SynthTrainer trainer(nets, tc);
  const LossReport got = trainer.train_step(s, f);
  double worst = 0.0;
  for (const auto& [k, v] : want) worst = std::max(worst, got.contains(k) ? std::abs(got.at(k) - v) : INFINITY);
  return worst;
}

}  // namespace checks
