#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace vortex {

using cdouble = std::complex<double>;

// Dense row-major complex array. Rank 2 tensors are images (H x W), rank 3
// tensors are multi-coil stacks (C x H x W).
class ComplexTensor {
 public:
  ComplexTensor() = default;
  explicit ComplexTensor(std::vector<std::size_t> shape);
  ComplexTensor(std::vector<std::size_t> shape, std::vector<cdouble> data);

  static ComplexTensor image(std::size_t h, std::size_t w) { return ComplexTensor({h, w}); }
  static ComplexTensor coils(std::size_t c, std::size_t h, std::size_t w) {
    return ComplexTensor({c, h, w});
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // Trailing two dimensions.
  std::size_t height() const { return shape_.at(rank() - 2); }
  std::size_t width() const { return shape_.at(rank() - 1); }

  std::span<cdouble> data() { return data_; }
  std::span<const cdouble> data() const { return data_; }
  std::vector<cdouble>& storage() { return data_; }
  const std::vector<cdouble>& storage() const { return data_; }

  cdouble& operator[](std::size_t i) { return data_[i]; }
  const cdouble& operator[](std::size_t i) const { return data_[i]; }

  cdouble& at(std::size_t i, std::size_t j) { return data_[i * width() + j]; }
  const cdouble& at(std::size_t i, std::size_t j) const { return data_[i * width() + j]; }
  cdouble& at(std::size_t c, std::size_t i, std::size_t j) {
    return data_[(c * height() + i) * width() + j];
  }
  const cdouble& at(std::size_t c, std::size_t i, std::size_t j) const {
    return data_[(c * height() + i) * width() + j];
  }

  // One H x W plane of a rank 3 tensor.
  std::span<cdouble> plane(std::size_t c);
  std::span<const cdouble> plane(std::size_t c) const;

  bool operator==(const ComplexTensor& other) const = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<cdouble> data_;
};

// Conjugate-linear in the first argument: sum conj(a_i) * b_i.
cdouble inner(const ComplexTensor& a, const ComplexTensor& b);
double norm2(const ComplexTensor& a);
double max_abs(const ComplexTensor& a);
bool all_finite(const ComplexTensor& a);
bool same_shape(const ComplexTensor& a, const ComplexTensor& b);

ComplexTensor operator-(const ComplexTensor& a, const ComplexTensor& b);
ComplexTensor operator+(const ComplexTensor& a, const ComplexTensor& b);
ComplexTensor operator*(cdouble s, const ComplexTensor& a);

// |x| elementwise, same shape.
std::vector<double> magnitude(const ComplexTensor& a);

}  // namespace vortex
