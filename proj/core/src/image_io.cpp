#include "vortex/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "binary_io.hpp"
#include "vortex/error.hpp"

namespace vortex {

GrayImage window_to_gray(std::span<const double> values, std::size_t h, std::size_t w, double hi) {
  VORTEX_REQUIRE(values.size() == h * w, "window_to_gray: size mismatch");
  GrayImage img{h, w, std::vector<std::uint8_t>(h * w, 0)};
  if (!(hi > 0.0)) return img;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = std::clamp(values[i] / hi, 0.0, 1.0);
    img.pixels[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  return img;
}

double percentile99(std::span<const double> values) {
  if (values.empty()) return 0.0;
  std::vector<double> v(values.begin(), values.end());
  const std::size_t rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(v.size())));
  const std::size_t k = std::clamp<std::size_t>(rank, 1, v.size()) - 1;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& image) {
  const std::string header =
      "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

namespace {

void png_append(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush(png_structp) {}

}  // namespace

std::vector<std::uint8_t> encode_png(const GrayImage& image) {
  VORTEX_REQUIRE(image.pixels.size() == image.height * image.width && image.height > 0,
                 "encode_png: bad image");
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png: cannot create writer");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png: encoding failed");
  }
  png_set_write_fn(png, &out, png_append, png_flush);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t i = 0; i < image.height; ++i)
    png_write_row(png, const_cast<png_bytep>(image.pixels.data() + i * image.width));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  detail::write_file(path, encode_pgm(image));
}

void write_png(const std::filesystem::path& path, const GrayImage& image) {
  detail::write_file(path, encode_png(image));
}

}  // namespace vortex
