#include "vortex/image_transform.hpp"

#include <cmath>

#include "vortex/error.hpp"

namespace vortex {

ResamplingPlan::ResamplingPlan(std::size_t h, std::size_t w) : h_(h), w_(w) {
  VORTEX_REQUIRE(h >= 1 && w >= 1, "resampling plan: empty grid");
  offsets_.assign(h * w + 1, 0);
}

ResamplingPlan ResamplingPlan::identity(std::size_t h, std::size_t w) {
  ResamplingPlan plan(h, w);
  for (std::size_t p = 0; p < h * w; ++p) {
    plan.taps_.push_back({static_cast<std::uint32_t>(p), 1.0});
    plan.offsets_[p + 1] = static_cast<std::uint32_t>(plan.taps_.size());
  }
  return plan;
}

ResamplingPlan ResamplingPlan::permutation(std::size_t h, std::size_t w,
                                           std::span<const std::int64_t> sources) {
  VORTEX_REQUIRE(sources.size() == h * w, "resampling: permutation size mismatch");
  ResamplingPlan plan(h, w);
  for (std::size_t p = 0; p < h * w; ++p) {
    VORTEX_REQUIRE(sources[p] < static_cast<std::int64_t>(h * w),
                   "resampling: permutation source out of range");
    if (sources[p] >= 0) plan.taps_.push_back({static_cast<std::uint32_t>(sources[p]), 1.0});
    plan.offsets_[p + 1] = static_cast<std::uint32_t>(plan.taps_.size());
  }
  return plan;
}

ResamplingPlan ResamplingPlan::flip_horizontal(std::size_t h, std::size_t w) {
  ResamplingPlan plan(h, w);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      plan.taps_.push_back({static_cast<std::uint32_t>(i * w + (w - 1 - j)), 1.0});
      plan.offsets_[i * w + j + 1] = static_cast<std::uint32_t>(plan.taps_.size());
    }
  return plan;
}

ResamplingPlan ResamplingPlan::flip_vertical(std::size_t h, std::size_t w) {
  ResamplingPlan plan(h, w);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      plan.taps_.push_back({static_cast<std::uint32_t>((h - 1 - i) * w + j), 1.0});
      plan.offsets_[i * w + j + 1] = static_cast<std::uint32_t>(plan.taps_.size());
    }
  return plan;
}

ResamplingPlan ResamplingPlan::rotate90(std::size_t n, int quarter_turns) {
  const int k = ((quarter_turns % 4) + 4) % 4;
  ResamplingPlan plan(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      // Walk the inverse map k times: a CCW quarter turn reads in(j, n-1-i).
      std::size_t si = i, sj = j;
      for (int t = 0; t < k; ++t) {
        const std::size_t ni = sj, nj = n - 1 - si;
        si = ni;
        sj = nj;
      }
      plan.taps_.push_back({static_cast<std::uint32_t>(si * n + sj), 1.0});
      plan.offsets_[i * n + j + 1] = static_cast<std::uint32_t>(plan.taps_.size());
    }
  return plan;
}

ResamplingPlan ResamplingPlan::affine(std::size_t h, std::size_t w, const double inverse[2][2],
                                      double shift_y, double shift_x) {
  ResamplingPlan plan(h, w);
  const double cy = (static_cast<double>(h) - 1.0) / 2.0;
  const double cx = (static_cast<double>(w) - 1.0) / 2.0;
  const auto hi = static_cast<std::int64_t>(h), wi = static_cast<std::int64_t>(w);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      const double dy = static_cast<double>(i) - cy;
      const double dx = static_cast<double>(j) - cx;
      const double sy = inverse[0][0] * dy + inverse[0][1] * dx + cy + shift_y;
      const double sx = inverse[1][0] * dy + inverse[1][1] * dx + cx + shift_x;
      const double fy0 = std::floor(sy), fx0 = std::floor(sx);
      const double fy = sy - fy0, fx = sx - fx0;
      const auto y0 = static_cast<std::int64_t>(fy0), x0 = static_cast<std::int64_t>(fx0);
      const double weights[4] = {(1 - fy) * (1 - fx), (1 - fy) * fx, fy * (1 - fx), fy * fx};
      const std::int64_t ys[4] = {y0, y0, y0 + 1, y0 + 1};
      const std::int64_t xs[4] = {x0, x0 + 1, x0, x0 + 1};
      for (int k = 0; k < 4; ++k) {
        if (weights[k] == 0.0) continue;
        if (ys[k] < 0 || ys[k] >= hi || xs[k] < 0 || xs[k] >= wi) continue;
        plan.taps_.push_back({static_cast<std::uint32_t>(ys[k] * wi + xs[k]), weights[k]});
        if (weights[k] != 1.0) plan.grid_exact_ = false;
      }
      plan.offsets_[i * w + j + 1] = static_cast<std::uint32_t>(plan.taps_.size());
    }
  return plan;
}

void ResamplingPlan::apply(std::span<const cdouble> in, std::span<cdouble> out) const {
  VORTEX_REQUIRE(in.size() == h_ * w_ && out.size() == h_ * w_, "resampling: size mismatch");
  for (std::size_t p = 0; p < h_ * w_; ++p) {
    const std::uint32_t b = offsets_[p], e = offsets_[p + 1];
    if (e == b) {
      out[p] = cdouble{0.0, 0.0};
    } else if (e == b + 1 && taps_[b].weight == 1.0) {
      out[p] = in[taps_[b].source];
    } else {
      cdouble acc{0.0, 0.0};
      for (std::uint32_t k = b; k < e; ++k) acc += taps_[k].weight * in[taps_[k].source];
      out[p] = acc;
    }
  }
}

void ResamplingPlan::apply_adjoint(std::span<const cdouble> out, std::span<cdouble> in) const {
  VORTEX_REQUIRE(in.size() == h_ * w_ && out.size() == h_ * w_, "resampling: size mismatch");
  for (std::size_t p = 0; p < h_ * w_; ++p)
    for (std::uint32_t k = offsets_[p]; k < offsets_[p + 1]; ++k)
      in[taps_[k].source] += taps_[k].weight * out[p];
}

ComplexTensor ResamplingPlan::apply(const ComplexTensor& x) const {
  VORTEX_REQUIRE(x.rank() >= 2 && x.height() == h_ && x.width() == w_,
                 "resampling: tensor shape does not match plan");
  ComplexTensor out(x.shape());
  const std::size_t planes = x.size() / (h_ * w_);
  for (std::size_t c = 0; c < planes; ++c)
    apply(x.data().subspan(c * h_ * w_, h_ * w_), out.data().subspan(c * h_ * w_, h_ * w_));
  return out;
}

ComplexTensor ResamplingPlan::apply_adjoint(const ComplexTensor& y) const {
  VORTEX_REQUIRE(y.rank() >= 2 && y.height() == h_ && y.width() == w_,
                 "resampling: tensor shape does not match plan");
  ComplexTensor out(y.shape());
  const std::size_t planes = y.size() / (h_ * w_);
  for (std::size_t c = 0; c < planes; ++c)
    apply_adjoint(y.data().subspan(c * h_ * w_, h_ * w_),
                  out.data().subspan(c * h_ * w_, h_ * w_));
  return out;
}

ResamplingPlan ResamplingPlan::after(const ResamplingPlan& first) const {
  VORTEX_REQUIRE(first.h_ == h_ && first.w_ == w_, "resampling: composing mismatched grids");
  ResamplingPlan plan(h_, w_);
  plan.grid_exact_ = grid_exact_ && first.grid_exact_;
  std::vector<double> acc(h_ * w_, 0.0);
  std::vector<std::uint32_t> touched;
  for (std::size_t p = 0; p < h_ * w_; ++p) {
    touched.clear();
    for (std::uint32_t k = offsets_[p]; k < offsets_[p + 1]; ++k) {
      const auto mid = taps_[k].source;
      for (std::uint32_t q = first.offsets_[mid]; q < first.offsets_[mid + 1]; ++q) {
        const auto src = first.taps_[q].source;
        if (acc[src] == 0.0) touched.push_back(src);
        acc[src] += taps_[k].weight * first.taps_[q].weight;
      }
    }
    for (auto src : touched) {
      if (acc[src] != 0.0) plan.taps_.push_back({src, acc[src]});
      acc[src] = 0.0;
    }
    plan.offsets_[p + 1] = static_cast<std::uint32_t>(plan.taps_.size());
  }
  return plan;
}

}  // namespace vortex
