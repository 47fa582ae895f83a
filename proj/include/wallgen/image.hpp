#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Raster containers shared by every pipeline stage. All rasters are
// row-major with the origin at the top-left corner; x grows rightward
// (columns), y grows downward (rows). Operations never mutate their
// inputs, so rasters can be shared freely across worker threads.

namespace wallgen {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

namespace detail {

inline void check_dimensions(int width, int height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("image dimensions must be at least 1x1, got " +
                                std::to_string(width) + "x" + std::to_string(height));
  }
}

inline void check_buffer(std::size_t actual, std::int64_t expected) {
  if (static_cast<std::int64_t>(actual) != expected) {
    throw std::invalid_argument("pixel buffer length " + std::to_string(actual) +
                                " does not match width*height = " + std::to_string(expected));
  }
}

}  // namespace detail

/// 8-bit RGB raster, the pipeline's input stage.
class PlanImage {
 public:
  PlanImage(int width, int height, Rgb fill = Rgb{255, 255, 255})
      : width_(width), height_(height) {
    detail::check_dimensions(width, height);
    pixels_.assign(pixel_count(), fill);
  }

  PlanImage(int width, int height, std::vector<Rgb> pixels)
      : width_(width), height_(height), pixels_(std::move(pixels)) {
    detail::check_dimensions(width, height);
    detail::check_buffer(pixels_.size(), pixel_count());
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::int64_t pixel_count() const {
    return static_cast<std::int64_t>(width_) * height_;
  }

  const Rgb& at(int x, int y) const { return pixels_[index(x, y)]; }
  Rgb& at(int x, int y) { return pixels_[index(x, y)]; }

  const std::vector<Rgb>& pixels() const { return pixels_; }
  std::vector<Rgb>& pixels() { return pixels_; }

  friend bool operator==(const PlanImage&, const PlanImage&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_;
  int height_;
  std::vector<Rgb> pixels_;
};

/// 8-bit single-channel luminance raster.
class GrayImage {
 public:
  GrayImage(int width, int height, std::uint8_t fill = 0)
      : width_(width), height_(height) {
    detail::check_dimensions(width, height);
    pixels_.assign(pixel_count(), fill);
  }

  GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
      : width_(width), height_(height), pixels_(std::move(pixels)) {
    detail::check_dimensions(width, height);
    detail::check_buffer(pixels_.size(), pixel_count());
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::int64_t pixel_count() const {
    return static_cast<std::int64_t>(width_) * height_;
  }

  std::uint8_t at(int x, int y) const { return pixels_[index(x, y)]; }
  std::uint8_t& at(int x, int y) { return pixels_[index(x, y)]; }

  const std::vector<std::uint8_t>& pixels() const { return pixels_; }
  std::vector<std::uint8_t>& pixels() { return pixels_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> pixels_;
};

/// Boolean raster; true (stored as 1) marks foreground ink.
class BinaryImage {
 public:
  BinaryImage(int width, int height, bool fill = false)
      : width_(width), height_(height) {
    detail::check_dimensions(width, height);
    bits_.assign(pixel_count(), fill ? 1 : 0);
  }

  BinaryImage(int width, int height, std::vector<std::uint8_t> bits)
      : width_(width), height_(height), bits_(std::move(bits)) {
    detail::check_dimensions(width, height);
    detail::check_buffer(bits_.size(), pixel_count());
    for (auto& b : bits_) b = b ? 1 : 0;
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::int64_t pixel_count() const {
    return static_cast<std::int64_t>(width_) * height_;
  }

  bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool value) { bits_[index(x, y)] = value ? 1 : 0; }

  const std::vector<std::uint8_t>& bits() const { return bits_; }
  std::vector<std::uint8_t>& bits() { return bits_; }

  std::int64_t foreground_count() const {
    std::int64_t n = 0;
    for (auto b : bits_) n += b;
    return n;
  }
  std::int64_t background_count() const { return pixel_count() - foreground_count(); }

  friend bool operator==(const BinaryImage&, const BinaryImage&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
};

/// A wall mask is a binary raster whose foreground marks wall pixels.
using WallMask = BinaryImage;

/// ITU-R BT.601 luma of one RGB pixel, rounded to the nearest level.
inline std::uint8_t luma601(Rgb p) {
  double y = 0.299 * p.r + 0.587 * p.g + 0.114 * p.b;
  long v = std::lround(y);
  return static_cast<std::uint8_t>(std::clamp(v, 0L, 255L));
}

inline GrayImage to_grayscale(const PlanImage& img) {
  GrayImage out(img.width(), img.height());
  const auto& src = img.pixels();
  auto& dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = luma601(src[i]);
  return out;
}

inline BinaryImage invert(const BinaryImage& img) {
  BinaryImage out = img;
  for (auto& b : out.bits()) b ^= 1;
  return out;
}

}  // namespace wallgen
