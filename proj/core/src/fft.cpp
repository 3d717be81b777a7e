#include "vortex/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "vortex/error.hpp"

namespace vortex {
namespace {

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex, FftwFree>;

FftwBuffer allocate(std::size_t n) {
  return FftwBuffer(fftw_alloc_complex(n));
}

// FFTW planning is not thread-safe; execution with new arrays is. Plans are
// created once per (h, w, sign) under a lock and reused on buffers that share
// fftw_malloc alignment.
class PlanCache {
 public:
  fftw_plan get(std::size_t h, std::size_t w, int sign) {
    std::lock_guard lock(mu_);
    auto key = std::make_tuple(h, w, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto in = allocate(h * w);
    auto out = allocate(h * w);
    fftw_plan p = fftw_plan_dft_2d(static_cast<int>(h), static_cast<int>(w), in.get(), out.get(),
                                   sign, FFTW_ESTIMATE);
    plans_.emplace(key, p);
    return p;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

// out = fftshift(DFT(ifftshift(in))) / sqrt(h w)
void centered_transform(std::span<cdouble> plane, std::size_t h, std::size_t w, int sign) {
  VORTEX_REQUIRE(h >= 1 && w >= 1, "fft2c: empty tensor");
  VORTEX_REQUIRE(plane.size() == h * w, "fft2c: plane size mismatch");
  const std::size_t n = h * w;
  auto in = allocate(n);
  auto out = allocate(n);
  const std::size_t ch = h / 2;
  const std::size_t cw = w / 2;
  for (std::size_t i = 0; i < h; ++i) {
    const std::size_t si = (i + ch) % h;
    for (std::size_t j = 0; j < w; ++j) {
      const std::size_t sj = (j + cw) % w;
      const cdouble v = plane[si * w + sj];
      in.get()[i * w + j][0] = v.real();
      in.get()[i * w + j][1] = v.imag();
    }
  }
  fftw_execute_dft(plan_cache().get(h, w, sign), in.get(), out.get());
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  // fftshift: dst[k] = src[(k - floor(N/2)) mod N]
  for (std::size_t i = 0; i < h; ++i) {
    const std::size_t si = (i + h - ch) % h;
    for (std::size_t j = 0; j < w; ++j) {
      const std::size_t sj = (j + w - cw) % w;
      const auto& v = out.get()[si * w + sj];
      plane[i * w + j] = cdouble(v[0] * scale, v[1] * scale);
    }
  }
}

ComplexTensor transform(const ComplexTensor& x, int sign) {
  VORTEX_REQUIRE(x.rank() == 2 || x.rank() == 3, "fft2c: expected rank 2 or 3 tensor");
  VORTEX_REQUIRE(!x.empty(), "fft2c: empty tensor");
  ComplexTensor out = x;
  const std::size_t h = x.height();
  const std::size_t w = x.width();
  const std::size_t planes = x.rank() == 3 ? x.dim(0) : 1;
  for (std::size_t c = 0; c < planes; ++c)
    centered_transform(out.data().subspan(c * h * w, h * w), h, w, sign);
  return out;
}

}  // namespace

ComplexTensor fft2c(const ComplexTensor& x) { return transform(x, FFTW_FORWARD); }
ComplexTensor ifft2c(const ComplexTensor& x) { return transform(x, FFTW_BACKWARD); }

void fft2c_inplace(std::span<cdouble> plane, std::size_t h, std::size_t w) {
  centered_transform(plane, h, w, FFTW_FORWARD);
}

void ifft2c_inplace(std::span<cdouble> plane, std::size_t h, std::size_t w) {
  centered_transform(plane, h, w, FFTW_BACKWARD);
}

}  // namespace vortex
