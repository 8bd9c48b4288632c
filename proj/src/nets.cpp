#include "hqss/nets.hpp"

#include <cstring>

#include "hqss/error.hpp"

namespace hqss {

namespace nn = torch::nn;

namespace {

std::int64_t conv_params(int in, int out, int k) {
  return static_cast<std::int64_t>(in) * out * k * k + out;
}

// Appends conv (+ optional reflect pad, IN, activation) to `seq` and records it in `spec`.
void add_conv(nn::Sequential& seq, NetworkSpec& spec, int in, int out, int k, int stride, bool reflect,
              bool norm, const std::string& activation) {
  if (reflect) {
    seq->push_back(nn::ReflectionPad2d(k / 2));
    seq->push_back(nn::Conv2d(nn::Conv2dOptions(in, out, k).stride(stride)));
  } else {
    seq->push_back(nn::Conv2d(nn::Conv2dOptions(in, out, k).stride(stride).padding(k == 4 ? 1 : k / 2)));
  }
  if (norm) seq->push_back(nn::InstanceNorm2d(nn::InstanceNorm2dOptions(out)));
  if (activation == "relu") seq->push_back(nn::ReLU());
  if (activation == "leaky_relu") seq->push_back(nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(0.2)));
  if (activation == "tanh") seq->push_back(nn::Tanh());
  spec.layers.push_back({"conv", in, out, k, stride, norm ? "instance" : "none", activation, conv_params(in, out, k)});
}

void add_deconv(nn::Sequential& seq, NetworkSpec& spec, int in, int out) {
  seq->push_back(nn::ConvTranspose2d(nn::ConvTranspose2dOptions(in, out, 3).stride(2).padding(1).output_padding(1)));
  seq->push_back(nn::InstanceNorm2d(nn::InstanceNorm2dOptions(out)));
  seq->push_back(nn::ReLU());
  spec.layers.push_back({"deconv", in, out, 3, 2, "instance", "relu", conv_params(in, out, 3)});
}

void add_residual(nn::Sequential& seq, NetworkSpec& spec, int channels) {
  seq->push_back(ResidualBlock(channels));
  spec.layers.push_back(
      {"residual", channels, channels, 3, 1, "instance", "relu", 2 * conv_params(channels, channels, 3)});
}

}  // namespace

std::int64_t NetworkSpec::parameter_count() const {
  std::int64_t total = 0;
  for (const auto& l : layers) total += l.parameters;
  return total;
}

ResidualBlockImpl::ResidualBlockImpl(int channels) {
  body_ = register_module(
      "body", nn::Sequential(nn::ReflectionPad2d(1), nn::Conv2d(nn::Conv2dOptions(channels, channels, 3)),
                             nn::InstanceNorm2d(nn::InstanceNorm2dOptions(channels)), nn::ReLU(),
                             nn::ReflectionPad2d(1), nn::Conv2d(nn::Conv2dOptions(channels, channels, 3)),
                             nn::InstanceNorm2d(nn::InstanceNorm2dOptions(channels))));
}

torch::Tensor ResidualBlockImpl::forward(const torch::Tensor& x) { return x + body_->forward(x); }

EncoderImpl::EncoderImpl(int in_channels, int feat_channels) : feat_channels_(feat_channels) {
  if (in_channels < 1 || feat_channels < 1) throw ValidationError("encoder channel counts must be positive");
  spec_.name = "encoder";
  nn::Sequential seq;
  add_conv(seq, spec_, in_channels, feat_channels, 7, 1, true, true, "relu");
  add_residual(seq, spec_, feat_channels);
  add_residual(seq, spec_, feat_channels);
  body_ = register_module("body", seq);
}

torch::Tensor EncoderImpl::forward(const torch::Tensor& x) { return body_->forward(x); }

GeneratorImpl::GeneratorImpl(int in_channels, const NetConfig& cfg) : in_channels_(in_channels) {
  if (in_channels < 1 || cfg.base_channels < 1) throw ValidationError("generator channel counts must be positive");
  spec_.name = "generator";
  const int c1 = cfg.base_channels, c2 = 2 * c1, c4 = 4 * c1;
  nn::Sequential seq;
  add_conv(seq, spec_, in_channels, c1, 7, 1, true, true, "relu");
  add_conv(seq, spec_, c1, c2, 3, 2, false, true, "relu");
  add_conv(seq, spec_, c2, c4, 3, 2, false, true, "relu");
  for (int i = 0; i < cfg.residual_blocks; ++i) add_residual(seq, spec_, c4);
  add_deconv(seq, spec_, c4, c2);
  add_deconv(seq, spec_, c2, c1);
  add_conv(seq, spec_, c1, 3, 7, 1, true, false, "tanh");
  body_ = register_module("body", seq);
}

torch::Tensor GeneratorImpl::forward(const torch::Tensor& x) {
  if (x.dim() != 4 || x.size(1) != in_channels_)
    throw ShapeError("generator expects [N," + std::to_string(in_channels_) + ",H,W] input");
  if (x.size(2) % 4 != 0 || x.size(3) % 4 != 0) throw ShapeError("dims must be divisible by 4");
  return body_->forward(x);
}

DiscriminatorImpl::DiscriminatorImpl(int in_channels, const NetConfig& cfg) {
  spec_.name = "discriminator";
  const int d = cfg.disc_channels;
  nn::Sequential seq;
  add_conv(seq, spec_, in_channels, d, 4, 2, false, false, "leaky_relu");
  add_conv(seq, spec_, d, 2 * d, 4, 2, false, true, "leaky_relu");
  add_conv(seq, spec_, 2 * d, 4 * d, 4, 2, false, true, "leaky_relu");
  add_conv(seq, spec_, 4 * d, 8 * d, 3, 1, false, true, "leaky_relu");
  add_conv(seq, spec_, 8 * d, 1, 3, 1, false, false, "none");
  body_ = register_module("body", seq);
}

torch::Tensor DiscriminatorImpl::forward(const torch::Tensor& x) {
  if (x.dim() != 4) throw ShapeError("discriminator expects [N,C,H,W] input");
  return body_->forward(x).mean({1, 2, 3});
}

Encoder build_encoder(int in_channels, int feat_channels) { return Encoder(in_channels, feat_channels); }

Generator build_generator(int in_channels, const NetConfig& cfg) { return Generator(in_channels, cfg); }

Discriminator build_discriminator(const NetConfig& cfg) { return Discriminator(3, cfg); }

std::pair<Generator, Generator> build_removal_nets(const NetConfig& cfg) {
  return {Generator(3, cfg), Generator(3, cfg)};
}

void init_weights(torch::nn::Module& net, std::uint64_t seed) {
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  torch::NoGradGuard no_grad;
  for (const auto& m : net.modules(/*include_self=*/true)) {
    if (auto* conv = m->as<nn::Conv2d>()) {
      conv->weight.normal_(0.0, 0.02, gen);
      if (conv->bias.defined()) conv->bias.zero_();
    } else if (auto* deconv = m->as<nn::ConvTranspose2d>()) {
      deconv->weight.normal_(0.0, 0.02, gen);
      if (deconv->bias.defined()) deconv->bias.zero_();
    } else if (auto* norm = m->as<nn::InstanceNorm2d>()) {
      if (norm->weight.defined()) norm->weight.fill_(1.0);
      if (norm->bias.defined()) norm->bias.zero_();
    }
  }
}

torch::Tensor concat_inputs(const torch::Tensor& feature, const torch::Tensor& region) {
  if (feature.dim() != 4 || region.dim() != 4) throw ShapeError("concat_inputs expects [N,C,H,W] tensors");
  if (feature.size(0) != region.size(0) || feature.size(2) != region.size(2) || feature.size(3) != region.size(3))
    throw ShapeError("feature and region dimensions differ");
  return torch::cat({feature, region}, 1);
}

std::int64_t parameter_count(const torch::nn::Module& net) {
  std::int64_t total = 0;
  for (const auto& p : net.parameters()) total += p.numel();
  return total;
}

std::uint64_t parameter_hash(const torch::nn::Module& net) {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& p : net.parameters()) {
    const torch::Tensor c = p.detach().contiguous().cpu();
    const auto* bytes = static_cast<const unsigned char*>(c.data_ptr());
    const std::size_t n = c.numel() * c.element_size();
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  }
  return h;
}

}  // namespace hqss
