#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace vortex {

// 8-bit grayscale image, row-major.
struct GrayImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;
};

// Maps [0, hi] linearly onto [0, 255] with clipping; hi <= 0 gives black.
GrayImage window_to_gray(std::span<const double> values, std::size_t h, std::size_t w, double hi);

// 99th percentile of the values (nearest rank).
double percentile99(std::span<const double> values);

std::vector<std::uint8_t> encode_pgm(const GrayImage& image);
std::vector<std::uint8_t> encode_png(const GrayImage& image);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);
void write_png(const std::filesystem::path& path, const GrayImage& image);

}  // namespace vortex
