#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace hqss {

/// Channel widths. Defaults are the full-scale architecture; toy runs shrink them.
struct NetConfig {
  int feat_channels = 32;    // encoder output C_f
  int base_channels = 64;    // generator widths: base → 2·base → 4·base
  int residual_blocks = 9;   // generator residual blocks
  int disc_channels = 64;    // discriminator first-layer width
  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

struct LayerSpec {
  std::string kind;  // conv | deconv | residual
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 0;
  int stride = 1;
  std::string normalization;  // instance | none
  std::string activation;     // relu | leaky_relu | tanh | none
  std::int64_t parameters = 0;
};

/// Layer list recorded while a network is built.
struct NetworkSpec {
  std::string name;
  std::vector<LayerSpec> layers;
  std::int64_t parameter_count() const;
};

/// Two 3×3 convs with reflect padding and instance norm, plus identity skip.
class ResidualBlockImpl : public torch::nn::Module {
 public:
  explicit ResidualBlockImpl(int channels);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Sequential body_{nullptr};
};
TORCH_MODULE(ResidualBlock);

/// Shadow-feature encoder: 7×7 conv then two residual blocks, stride 1 throughout.
class EncoderImpl : public torch::nn::Module {
 public:
  EncoderImpl(int in_channels, int feat_channels);
  torch::Tensor forward(const torch::Tensor& x);
  const NetworkSpec& spec() const noexcept { return spec_; }
  int feat_channels() const noexcept { return feat_channels_; }

 private:
  torch::nn::Sequential body_{nullptr};
  NetworkSpec spec_;
  int feat_channels_;
};
TORCH_MODULE(Encoder);

/// ResNet generator: conv s1, two conv s2, residual blocks, two deconv s2, output conv + tanh.
/// Output lives in the normalised [-1,1] LAB space (see tensors.hpp).
class GeneratorImpl : public torch::nn::Module {
 public:
  GeneratorImpl(int in_channels, const NetConfig& cfg);
  /// Throws ShapeError unless H and W are divisible by 4.
  torch::Tensor forward(const torch::Tensor& x);
  const NetworkSpec& spec() const noexcept { return spec_; }
  int in_channels() const noexcept { return in_channels_; }

 private:
  torch::nn::Sequential body_{nullptr};
  NetworkSpec spec_;
  int in_channels_;
};
TORCH_MODULE(Generator);

/// PatchGAN: three 4×4 stride-2 convs, two 3×3 stride-1 convs, global average pool → one score per image.
class DiscriminatorImpl : public torch::nn::Module {
 public:
  DiscriminatorImpl(int in_channels, const NetConfig& cfg);
  /// Returns a [N] tensor.
  torch::Tensor forward(const torch::Tensor& x);
  const NetworkSpec& spec() const noexcept { return spec_; }

 private:
  torch::nn::Sequential body_{nullptr};
  NetworkSpec spec_;
};
TORCH_MODULE(Discriminator);

Encoder build_encoder(int in_channels = 3, int feat_channels = 32);
Generator build_generator(int in_channels, const NetConfig& cfg = {});
Discriminator build_discriminator(const NetConfig& cfg = {});
/// Inverse network and refinement network; generator architecture on 3 input channels.
std::pair<Generator, Generator> build_removal_nets(const NetConfig& cfg = {});

/// Conv / deconv weights ~ N(0, 0.02²), biases 0, normalisation affine params at identity.
void init_weights(torch::nn::Module& net, std::uint64_t seed);

/// Channel concatenation, feature channels first. Throws ShapeError on mismatched N/H/W.
torch::Tensor concat_inputs(const torch::Tensor& feature, const torch::Tensor& region);

std::int64_t parameter_count(const torch::nn::Module& net);
/// FNV-1a over every parameter's bytes, in registration order.
std::uint64_t parameter_hash(const torch::nn::Module& net);

}  // namespace hqss
