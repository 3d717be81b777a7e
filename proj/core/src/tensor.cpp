#include "vortex/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include "vortex/error.hpp"

namespace vortex {
namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

ComplexTensor::ComplexTensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(product(shape_)) {}

ComplexTensor::ComplexTensor(std::vector<std::size_t> shape, std::vector<cdouble> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  VORTEX_REQUIRE(data_.size() == product(shape_), "tensor data length does not match shape");
}

std::span<cdouble> ComplexTensor::plane(std::size_t c) {
  const std::size_t n = height() * width();
  return std::span<cdouble>(data_).subspan(c * n, n);
}

std::span<const cdouble> ComplexTensor::plane(std::size_t c) const {
  const std::size_t n = height() * width();
  return std::span<const cdouble>(data_).subspan(c * n, n);
}

cdouble inner(const ComplexTensor& a, const ComplexTensor& b) {
  VORTEX_REQUIRE(same_shape(a, b), "inner: shape mismatch");
  cdouble acc{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

double norm2(const ComplexTensor& a) {
  double acc = 0.0;
  for (const auto& v : a.data()) acc += std::norm(v);
  return std::sqrt(acc);
}

double max_abs(const ComplexTensor& a) {
  double m = 0.0;
  for (const auto& v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

bool all_finite(const ComplexTensor& a) {
  for (const auto& v : a.data())
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

bool same_shape(const ComplexTensor& a, const ComplexTensor& b) { return a.shape() == b.shape(); }

ComplexTensor operator-(const ComplexTensor& a, const ComplexTensor& b) {
  VORTEX_REQUIRE(same_shape(a, b), "subtract: shape mismatch");
  ComplexTensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

ComplexTensor operator+(const ComplexTensor& a, const ComplexTensor& b) {
  VORTEX_REQUIRE(same_shape(a, b), "add: shape mismatch");
  ComplexTensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

ComplexTensor operator*(cdouble s, const ComplexTensor& a) {
  ComplexTensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
  return out;
}

std::vector<double> magnitude(const ComplexTensor& a) {
  std::vector<double> m(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) m[i] = std::abs(a[i]);
  return m;
}

}  // namespace vortex
