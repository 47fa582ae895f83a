#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "wallgen/image.hpp"

namespace wallgen {

namespace detail {

/// Writes bytes to `<path>.tmp` then renames into place, so readers never
/// observe a half-written file.
inline void write_bytes_atomic(const std::filesystem::path& path,
                               const std::vector<unsigned char>& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::vector<unsigned char> encode_png(const cv::Mat& mat) {
  std::vector<unsigned char> buf;
  if (!cv::imencode(".png", mat, buf)) throw std::runtime_error("PNG encoding failed");
  return buf;
}

}  // namespace detail

/// Decodes a scanned plan (PNG, JPEG or TIFF) into an RGB raster.
inline PlanImage decode_plan_image(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw std::runtime_error("cannot decode image: " + path.string());

  PlanImage img(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      img.at(x, y) = Rgb{row[x][2], row[x][1], row[x][0]};
    }
  }
  return img;
}

/// Decodes a mask file; any pixel with gray value >= 128 counts as
/// foreground. Color inputs are converted to grayscale by the decoder.
inline WallMask decode_binary_mask(const std::filesystem::path& path) {
  cv::Mat gray = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
  if (gray.empty()) throw std::runtime_error("cannot decode mask: " + path.string());

  WallMask mask(gray.cols, gray.rows);
  for (int y = 0; y < gray.rows; ++y) {
    const std::uint8_t* row = gray.ptr<std::uint8_t>(y);
    for (int x = 0; x < gray.cols; ++x) {
      mask.set(x, y, row[x] >= 128);
    }
  }
  return mask;
}

/// Writes a mask as single-channel PNG, foreground 255 on background 0.
inline void write_mask_png(const WallMask& mask, const std::filesystem::path& path) {
  cv::Mat gray(mask.height(), mask.width(), CV_8UC1);
  for (int y = 0; y < mask.height(); ++y) {
    std::uint8_t* row = gray.ptr<std::uint8_t>(y);
    for (int x = 0; x < mask.width(); ++x) {
      row[x] = mask.at(x, y) ? 255 : 0;
    }
  }
  detail::write_bytes_atomic(path, detail::encode_png(gray));
}

inline void write_gray_png(const GrayImage& img, const std::filesystem::path& path) {
  cv::Mat gray(img.height(), img.width(), CV_8UC1);
  for (int y = 0; y < img.height(); ++y) {
    std::uint8_t* row = gray.ptr<std::uint8_t>(y);
    for (int x = 0; x < img.width(); ++x) {
      row[x] = img.at(x, y);
    }
  }
  detail::write_bytes_atomic(path, detail::encode_png(gray));
}

inline void write_plan_png(const PlanImage& img, const std::filesystem::path& path) {
  cv::Mat bgr(img.height(), img.width(), CV_8UC3);
  for (int y = 0; y < img.height(); ++y) {
    cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width(); ++x) {
      Rgb p = img.at(x, y);
      row[x] = cv::Vec3b(p.b, p.g, p.r);
    }
  }
  detail::write_bytes_atomic(path, detail::encode_png(bgr));
}

/// Writes arbitrary text atomically (reports, configs, manifests).
inline void write_text_atomic(const std::string& text, const std::filesystem::path& path) {
  std::vector<unsigned char> bytes(text.begin(), text.end());
  detail::write_bytes_atomic(path, bytes);
}

}  // namespace wallgen
