#include "vortex/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "vortex/error.hpp"
#include "vortex/rng.hpp"

namespace vortex {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;
using ConstMapVec = Eigen::Map<const Eigen::VectorXd>;

// Convolution indices in layout order.
struct ConvIndex {
  std::vector<std::size_t> enc_a, enc_b;           // [0, depth]
  std::vector<std::size_t> dec_up, dec_a, dec_b;   // [0, depth)
  std::size_t final_conv = 0;
};

ConvIndex conv_index(int depth) {
  ConvIndex idx;
  std::size_t next = 0;
  for (int k = 0; k <= depth; ++k) {
    idx.enc_a.push_back(next++);
    idx.enc_b.push_back(next++);
  }
  idx.dec_up.resize(depth);
  idx.dec_a.resize(depth);
  idx.dec_b.resize(depth);
  for (int k = depth - 1; k >= 0; --k) {
    idx.dec_up[k] = next++;
    idx.dec_a[k] = next++;
    idx.dec_b[k] = next++;
  }
  idx.final_conv = next;
  return idx;
}

ParamLayout build_layout(const ModelConfig& cfg) {
  ParamLayout layout;
  auto add = [&](std::string name, std::size_t out, std::size_t in, std::size_t k) {
    ParamBlock b;
    b.name = std::move(name);
    b.offset = layout.total;
    b.out_channels = out;
    b.in_channels = in;
    b.kernel = k;
    b.bias_offset = b.offset + b.weight_count();
    layout.total = b.bias_offset + out;
    layout.blocks.push_back(std::move(b));
  };
  for (int k = 0; k <= cfg.depth; ++k) {
    const std::size_t in = k == 0 ? 2 : cfg.channels(k - 1);
    add("enc" + std::to_string(k) + ".a", cfg.channels(k), in, 3);
    add("enc" + std::to_string(k) + ".b", cfg.channels(k), cfg.channels(k), 3);
  }
  for (int k = cfg.depth - 1; k >= 0; --k) {
    add("dec" + std::to_string(k) + ".up", cfg.channels(k), cfg.channels(k + 1), 3);
    add("dec" + std::to_string(k) + ".a", cfg.channels(k), 2 * cfg.channels(k), 3);
    add("dec" + std::to_string(k) + ".b", cfg.channels(k), cfg.channels(k), 3);
  }
  add("final", 2, cfg.channels(0), 1);
  return layout;
}

void im2col3(const FeatureMap& in, std::vector<double>& cols) {
  const std::size_t c = in.channels, h = in.height, w = in.width, n = h * w;
  cols.assign(c * 9 * n, 0.0);
  for (std::size_t ci = 0; ci < c; ++ci) {
    const double* src = in.data.data() + ci * n;
    for (int ky = 0; ky < 3; ++ky)
      for (int kx = 0; kx < 3; ++kx) {
        double* dst = cols.data() + ((ci * 9) + ky * 3 + kx) * n;
        for (std::size_t i = 0; i < h; ++i) {
          const std::ptrdiff_t si = static_cast<std::ptrdiff_t>(i) + ky - 1;
          if (si < 0 || si >= static_cast<std::ptrdiff_t>(h)) continue;
          const std::size_t j_lo = kx == 0 ? 1 : 0;
          const std::size_t j_hi = kx == 2 ? w - 1 : w;
          const double* row = src + si * w;
          for (std::size_t j = j_lo; j < j_hi; ++j) dst[i * w + j] = row[j + kx - 1];
        }
      }
  }
}

void col2im3(const RowMat& dcols, FeatureMap& din) {
  const std::size_t c = din.channels, h = din.height, w = din.width, n = h * w;
  for (std::size_t ci = 0; ci < c; ++ci) {
    double* dst = din.data.data() + ci * n;
    for (int ky = 0; ky < 3; ++ky)
      for (int kx = 0; kx < 3; ++kx) {
        const double* src = dcols.data() + ((ci * 9) + ky * 3 + kx) * n;
        for (std::size_t i = 0; i < h; ++i) {
          const std::ptrdiff_t si = static_cast<std::ptrdiff_t>(i) + ky - 1;
          if (si < 0 || si >= static_cast<std::ptrdiff_t>(h)) continue;
          const std::size_t j_lo = kx == 0 ? 1 : 0;
          const std::size_t j_hi = kx == 2 ? w - 1 : w;
          double* row = dst + si * w;
          for (std::size_t j = j_lo; j < j_hi; ++j) row[j + kx - 1] += src[i * w + j];
        }
      }
  }
}

FeatureMap avg_pool(const FeatureMap& in) {
  FeatureMap out(in.channels, in.height / 2, in.width / 2);
  for (std::size_t c = 0; c < in.channels; ++c)
    for (std::size_t i = 0; i < out.height; ++i)
      for (std::size_t j = 0; j < out.width; ++j) {
        const double* s = in.data.data() + (c * in.height + 2 * i) * in.width + 2 * j;
        out.data[(c * out.height + i) * out.width + j] =
            0.25 * (s[0] + s[1] + s[in.width] + s[in.width + 1]);
      }
  return out;
}

void avg_pool_backward(const FeatureMap& dout, FeatureMap& din) {
  for (std::size_t c = 0; c < dout.channels; ++c)
    for (std::size_t i = 0; i < dout.height; ++i)
      for (std::size_t j = 0; j < dout.width; ++j) {
        const double g = 0.25 * dout.data[(c * dout.height + i) * dout.width + j];
        double* d = din.data.data() + (c * din.height + 2 * i) * din.width + 2 * j;
        d[0] += g;
        d[1] += g;
        d[din.width] += g;
        d[din.width + 1] += g;
      }
}

FeatureMap upsample(const FeatureMap& in) {
  FeatureMap out(in.channels, in.height * 2, in.width * 2);
  for (std::size_t c = 0; c < in.channels; ++c)
    for (std::size_t i = 0; i < out.height; ++i)
      for (std::size_t j = 0; j < out.width; ++j)
        out.data[(c * out.height + i) * out.width + j] =
            in.data[(c * in.height + i / 2) * in.width + j / 2];
  return out;
}

FeatureMap upsample_backward(const FeatureMap& dout) {
  FeatureMap din(dout.channels, dout.height / 2, dout.width / 2);
  for (std::size_t c = 0; c < dout.channels; ++c)
    for (std::size_t i = 0; i < dout.height; ++i)
      for (std::size_t j = 0; j < dout.width; ++j)
        din.data[(c * din.height + i / 2) * din.width + j / 2] +=
            dout.data[(c * dout.height + i) * dout.width + j];
  return din;
}

FeatureMap concat(const FeatureMap& a, const FeatureMap& b) {
  FeatureMap out(a.channels + b.channels, a.height, a.width);
  std::copy(a.data.begin(), a.data.end(), out.data.begin());
  std::copy(b.data.begin(), b.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(a.size()));
  return out;
}

void add_into(FeatureMap& dst, const FeatureMap& src) {
  VORTEX_REQUIRE(dst.size() == src.size(), "feature map size mismatch");
  for (std::size_t i = 0; i < dst.size(); ++i) dst.data[i] += src.data[i];
}

class Network {
 public:
  Network(const ModelConfig& cfg, const ParamLayout& layout, std::span<const double> params)
      : cfg_(cfg), layout_(layout), params_(params), idx_(conv_index(cfg.depth)) {}

  // conv (3x3 or 1x1) + optional leaky rectifier.
  FeatureMap conv(std::size_t id, const FeatureMap& in, bool activate, ForwardTrace& trace) const {
    const ParamBlock& b = layout_.blocks[id];
    const std::size_t n = in.height * in.width;
    std::vector<double>& cols = trace.columns[id];
    if (b.kernel == 3)
      im2col3(in, cols);
    else
      cols = in.data;
    ConstMapMat weights(params_.data() + b.offset, b.out_channels, b.in_channels * b.kernel * b.kernel);
    ConstMapMat x(cols.data(), b.in_channels * b.kernel * b.kernel, n);
    ConstMapVec bias(params_.data() + b.bias_offset, b.out_channels);
    FeatureMap out(b.out_channels, in.height, in.width);
    MapMat y(out.data.data(), b.out_channels, n);
    y.noalias() = weights * x;
    y.colwise() += bias;
    if (activate) {
      trace.preactivations[id] = out.data;
      const double slope = cfg_.leaky_slope;
      for (double& v : out.data) v = v > 0.0 ? v : slope * v;
    }
    return out;
  }

  // Returns dL/d(input); accumulates weight and bias gradients.
  FeatureMap conv_backward(std::size_t id, FeatureMap grad, bool activated,
                           const ForwardTrace& trace, std::span<double> grad_params,
                           bool need_input_grad) const {
    const ParamBlock& b = layout_.blocks[id];
    const std::size_t n = grad.height * grad.width;
    if (activated) {
      const auto& pre = trace.preactivations[id];
      const double slope = cfg_.leaky_slope;
      for (std::size_t i = 0; i < grad.size(); ++i)
        if (!(pre[i] > 0.0)) grad.data[i] *= slope;
    }
    const std::size_t fan_in = b.in_channels * b.kernel * b.kernel;
    ConstMapMat g(grad.data.data(), b.out_channels, n);
    ConstMapMat x(trace.columns[id].data(), fan_in, n);
    MapMat dw(grad_params.data() + b.offset, b.out_channels, fan_in);
    Eigen::Map<Eigen::VectorXd> db(grad_params.data() + b.bias_offset, b.out_channels);
    dw.noalias() += g * x.transpose();
    db.noalias() += g.rowwise().sum();
    FeatureMap din(b.in_channels, grad.height, grad.width);
    if (!need_input_grad) return din;
    ConstMapMat weights(params_.data() + b.offset, b.out_channels, fan_in);
    if (b.kernel == 3) {
      RowMat dcols = weights.transpose() * g;
      col2im3(dcols, din);
    } else {
      MapMat dx(din.data.data(), b.in_channels, n);
      dx.noalias() = weights.transpose() * g;
    }
    return din;
  }

  FeatureMap run(const FeatureMap& input, ForwardTrace& trace) const {
    const int depth = cfg_.depth;
    trace.columns.assign(layout_.blocks.size(), {});
    trace.preactivations.assign(layout_.blocks.size(), {});
    trace.taps.clear();
    std::vector<FeatureMap> enc(depth + 1);
    FeatureMap in = input;
    for (int k = 0; k <= depth; ++k) {
      enc[k] = conv(idx_.enc_b[k], conv(idx_.enc_a[k], in, true, trace), true, trace);
      if (k < depth) in = avg_pool(enc[k]);
    }
    FeatureMap u = enc[depth];
    std::vector<FeatureMap> up(depth);
    for (int k = depth - 1; k >= 0; --k) {
      up[k] = conv(idx_.dec_up[k], upsample(u), true, trace);
      u = conv(idx_.dec_b[k], conv(idx_.dec_a[k], concat(enc[k], up[k]), true, trace), true,
               trace);
    }
    for (int level : cfg_.latent_taps) {
      if (level == depth)
        trace.taps[level] = {enc[depth]};
      else
        trace.taps[level] = {enc[level], up[level]};
    }
    return conv(idx_.final_conv, u, false, trace);
  }

  void backprop(const FeatureMap& grad_out, const ForwardTrace& trace, const TapTensors* taps,
                std::span<double> grad_params) const {
    const int depth = cfg_.depth;
    auto tap_grad = [&](int level, std::size_t which) -> const FeatureMap* {
      if (!taps) return nullptr;
      auto it = taps->find(level);
      if (it == taps->end() || it->second.size() <= which) return nullptr;
      return &it->second[which];
    };

    FeatureMap g_u = conv_backward(idx_.final_conv, grad_out, false, trace, grad_params, true);
    std::vector<FeatureMap> g_skip(depth);
    for (int k = 0; k < depth; ++k) {
      FeatureMap g = conv_backward(idx_.dec_b[k], std::move(g_u), true, trace, grad_params, true);
      FeatureMap g_cat = conv_backward(idx_.dec_a[k], std::move(g), true, trace, grad_params, true);
      const std::size_t ck = static_cast<std::size_t>(cfg_.channels(k));
      const std::size_t plane = g_cat.height * g_cat.width;
      g_skip[k] = FeatureMap(ck, g_cat.height, g_cat.width);
      FeatureMap g_up(ck, g_cat.height, g_cat.width);
      std::copy_n(g_cat.data.begin(), ck * plane, g_skip[k].data.begin());
      std::copy_n(g_cat.data.begin() + static_cast<std::ptrdiff_t>(ck * plane), ck * plane,
                  g_up.data.begin());
      if (k >= 1)
        if (const FeatureMap* t = tap_grad(k, 1)) add_into(g_up, *t);
      g_u = upsample_backward(
          conv_backward(idx_.dec_up[k], std::move(g_up), true, trace, grad_params, true));
    }
    FeatureMap g_e = std::move(g_u);
    for (int k = depth; k >= 0; --k) {
      if (k >= 1)
        if (const FeatureMap* t = tap_grad(k, 0)) add_into(g_e, *t);
      FeatureMap g = conv_backward(idx_.enc_b[k], std::move(g_e), true, trace, grad_params, true);
      FeatureMap g_in = conv_backward(idx_.enc_a[k], std::move(g), true, trace, grad_params, k > 0);
      if (k > 0) {
        g_e = std::move(g_skip[k - 1]);
        avg_pool_backward(g_in, g_e);
      }
    }
  }

 private:
  const ModelConfig& cfg_;
  const ParamLayout& layout_;
  std::span<const double> params_;
  ConvIndex idx_;
};

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t h = 1469598103934665603ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

void ModelConfig::validate() const {
  VORTEX_REQUIRE(depth >= 1, "model: depth must be at least 1");
  VORTEX_REQUIRE(base_channels >= 1, "model: base_channels must be at least 1");
  VORTEX_REQUIRE(depth <= 8, "model: depth larger than 8 is not supported");
  VORTEX_REQUIRE(leaky_slope >= 0.0 && leaky_slope < 1.0, "model: leaky slope outside [0, 1)");
  for (int level : latent_taps)
    VORTEX_REQUIRE(level >= 1 && level <= depth, "model: latent tap level outside [1, depth]");
  std::vector<int> sorted = latent_taps;
  std::sort(sorted.begin(), sorted.end());
  VORTEX_REQUIRE(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
                 "model: duplicate latent tap level");
}

bool ParamLayout::covers_exactly() const {
  std::size_t cursor = 0;
  for (const ParamBlock& b : blocks) {
    if (b.offset != cursor || b.bias_offset != b.offset + b.weight_count()) return false;
    cursor = b.bias_offset + b.out_channels;
  }
  return cursor == total;
}

bool ModelParameters::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

std::uint64_t ModelParameters::fingerprint() const {
  return fnv1a(values.data(), values.size() * sizeof(double));
}

double input_scale(const ComplexTensor& x_zf) {
  std::vector<double> mags = magnitude(x_zf);
  if (mags.empty()) return 1.0;
  const auto k = static_cast<std::size_t>(std::floor(0.99 * static_cast<double>(mags.size() - 1)));
  std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(k), mags.end());
  const double s = mags[k];
  return s > 0.0 && std::isfinite(s) ? s : 1.0;
}

void round_to_float32(ModelParameters& params) {
  for (double& v : params.values) v = static_cast<double>(static_cast<float>(v));
}

UNet::UNet(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  layout_ = build_layout(config_);
}

ModelParameters UNet::initialize(std::uint64_t seed) const {
  ModelParameters params;
  params.values.assign(layout_.total, 0.0);
  KeyedRng rng(hash64(seed, 0x5eedULL));
  for (const ParamBlock& b : layout_.blocks) {
    const double fan_in = static_cast<double>(b.in_channels * b.kernel * b.kernel);
    const bool last = b.name == "final";
    const double bound = last ? 1.0 / std::sqrt(fan_in) : std::sqrt(6.0 / fan_in);
    for (std::size_t i = 0; i < b.weight_count(); ++i)
      params.values[b.offset + i] = rng.uniform(-bound, bound);
  }
  round_to_float32(params);
  return params;
}

ComplexTensor UNet::forward(const ModelParameters& params, const ComplexTensor& x_zf,
                            ForwardTrace* trace) const {
  VORTEX_REQUIRE(params.size() == layout_.total, "model: parameter vector size mismatch");
  VORTEX_REQUIRE(x_zf.rank() == 2, "model: expected an H x W image");
  const std::size_t h = x_zf.dim(0), w = x_zf.dim(1);
  const std::size_t div = std::size_t{1} << config_.depth;
  VORTEX_REQUIRE(h % div == 0 && w % div == 0,
                 "model: H and W must be divisible by 2^depth");
  ForwardTrace local;
  ForwardTrace& tr = trace ? *trace : local;
  tr.params_fingerprint = params.fingerprint();
  tr.params_size = params.size();
  tr.height = h;
  tr.width = w;
  tr.producer = "unet";
  tr.input_scale = input_scale(x_zf);

  FeatureMap input(2, h, w);
  const double inv = 1.0 / tr.input_scale;
  for (std::size_t p = 0; p < h * w; ++p) {
    input.data[p] = x_zf[p].real() * inv;
    input.data[h * w + p] = x_zf[p].imag() * inv;
  }
  Network net(config_, layout_, params.values);
  const FeatureMap out = net.run(input, tr);
  ComplexTensor result = ComplexTensor::image(h, w);
  for (std::size_t p = 0; p < h * w; ++p)
    result[p] = cdouble(out.data[p] * tr.input_scale, out.data[h * w + p] * tr.input_scale);
  return result;
}

void UNet::backward(const ModelParameters& params, const ForwardTrace& trace,
                    const ComplexTensor& grad_out, const TapTensors* tap_grads,
                    std::span<double> grad_params) const {
  VORTEX_REQUIRE(trace.producer == "unet" && trace.params_size == params.size() &&
                     trace.params_fingerprint == params.fingerprint() &&
                     trace.columns.size() == layout_.blocks.size(),
                 "model_backward: trace was not produced by these parameters");
  VORTEX_REQUIRE(grad_out.rank() == 2 && grad_out.dim(0) == trace.height &&
                     grad_out.dim(1) == trace.width,
                 "model_backward: gradient shape does not match trace");
  VORTEX_REQUIRE(grad_params.size() == layout_.total, "model_backward: gradient buffer size");
  const std::size_t n = trace.height * trace.width;
  FeatureMap g(2, trace.height, trace.width);
  for (std::size_t p = 0; p < n; ++p) {
    g.data[p] = grad_out[p].real() * trace.input_scale;
    g.data[n + p] = grad_out[p].imag() * trace.input_scale;
  }
  Network net(config_, layout_, params.values);
  net.backprop(g, trace, tap_grads, grad_params);
}

ComplexTensor IdentityReconstructor::forward(const ModelParameters&, const ComplexTensor& x_zf,
                                             ForwardTrace* trace) const {
  if (trace) {
    *trace = ForwardTrace{};
    trace->producer = "identity";
    trace->height = x_zf.dim(0);
    trace->width = x_zf.dim(1);
  }
  return x_zf;
}

void IdentityReconstructor::backward(const ModelParameters&, const ForwardTrace& trace,
                                     const ComplexTensor&, const TapTensors*,
                                     std::span<double>) const {
  VORTEX_REQUIRE(trace.producer == "identity", "identity backward: foreign trace");
}

}  // namespace vortex
