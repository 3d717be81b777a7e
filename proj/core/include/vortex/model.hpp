#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vortex/tensor.hpp"

namespace vortex {

// Small U-Net. Level 0 runs at full resolution; level k at H/2^k. Level
// `depth` is the bottleneck. Channels at level k are base_channels * 2^k.
struct ModelConfig {
  int depth = 2;
  int base_channels = 8;
  // Levels in [1, depth] whose activations are exposed for latent
  // consistency; `depth` denotes the bottleneck.
  std::vector<int> latent_taps = {1, 2};
  double leaky_slope = 0.01;

  void validate() const;
  int channels(int level) const { return base_channels << level; }
  bool operator==(const ModelConfig&) const = default;
};

// Parameter block of one convolution: weights [out][in][k][k], then bias.
struct ParamBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t out_channels = 0;
  std::size_t in_channels = 0;
  std::size_t kernel = 0;
  std::size_t bias_offset = 0;

  std::size_t weight_count() const { return out_channels * in_channels * kernel * kernel; }
  bool operator==(const ParamBlock&) const = default;
};

struct ParamLayout {
  std::vector<ParamBlock> blocks;
  std::size_t total = 0;

  // True iff the blocks tile [0, total) with no gaps or overlaps.
  bool covers_exactly() const;
  bool operator==(const ParamLayout&) const = default;
};

struct ModelParameters {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  bool all_finite() const;
  std::uint64_t fingerprint() const;
};

// Real activation tensor, channel-major (C x H x W).
struct FeatureMap {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> data;

  FeatureMap() = default;
  FeatureMap(std::size_t c, std::size_t h, std::size_t w)
      : channels(c), height(h), width(w), data(c * h * w, 0.0) {}
  std::size_t size() const { return data.size(); }
};

// Latent tensors keyed by tap level. Levels below the bottleneck expose two
// tensors (last encoder conv, decoder up-conv); the bottleneck exposes one.
using TapTensors = std::map<int, std::vector<FeatureMap>>;

// Everything backward needs, plus the latent taps.
struct ForwardTrace {
  std::uint64_t params_fingerprint = 0;
  std::size_t params_size = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  double input_scale = 1.0;
  // Per convolution (in layout order): im2col matrix and pre-activation.
  std::vector<std::vector<double>> columns;
  std::vector<std::vector<double>> preactivations;
  TapTensors taps;
  // Opaque marker for traces made by non-network reconstructors.
  std::string producer;
};

// A reconstruction map f_theta. The gradient convention for complex outputs
// is grad.real() = dL/dRe(out), grad.imag() = dL/dIm(out).
class Reconstructor {
 public:
  virtual ~Reconstructor() = default;

  virtual std::size_t parameter_count() const = 0;
  virtual ComplexTensor forward(const ModelParameters& params, const ComplexTensor& x_zf,
                                ForwardTrace* trace) const = 0;
  // Accumulates dL/dtheta into grad_params. tap_grads may be null.
  virtual void backward(const ModelParameters& params, const ForwardTrace& trace,
                        const ComplexTensor& grad_out, const TapTensors* tap_grads,
                        std::span<double> grad_params) const = 0;
};

class UNet final : public Reconstructor {
 public:
  explicit UNet(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  const ParamLayout& layout() const { return layout_; }

  std::size_t parameter_count() const override { return layout_.total; }
  // Uniform fan-in initialization, zero biases.
  ModelParameters initialize(std::uint64_t seed) const;

  ComplexTensor forward(const ModelParameters& params, const ComplexTensor& x_zf,
                        ForwardTrace* trace) const override;
  void backward(const ModelParameters& params, const ForwardTrace& trace,
                const ComplexTensor& grad_out, const TapTensors* tap_grads,
                std::span<double> grad_params) const override;

 private:
  ModelConfig config_;
  ParamLayout layout_;
};

// f(x) = x with no parameters; used to check loss plumbing without a network.
class IdentityReconstructor final : public Reconstructor {
 public:
  std::size_t parameter_count() const override { return 0; }
  ComplexTensor forward(const ModelParameters& params, const ComplexTensor& x_zf,
                        ForwardTrace* trace) const override;
  void backward(const ModelParameters& params, const ForwardTrace& trace,
                const ComplexTensor& grad_out, const TapTensors* tap_grads,
                std::span<double> grad_params) const override;
};

// Per-image normalization: 99th-percentile magnitude (1 if that is zero).
double input_scale(const ComplexTensor& x_zf);

// Rounds every value to the nearest float32 so a float32 checkpoint holds
// the parameters exactly.
void round_to_float32(ModelParameters& params);

// Checkpoint file: "VTXC", u32 version, u32 header length, JSON header
// (config + layout), u64 count, float32 little-endian values, u32 CRC32.
struct Checkpoint {
  ModelConfig config;
  ParamLayout layout;
  ModelParameters params;
  std::map<std::string, std::string> metadata;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace vortex
