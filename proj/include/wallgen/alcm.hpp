#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "wallgen/config.hpp"
#include "wallgen/image.hpp"
#include "wallgen/preprocess.hpp"

// Stage 3 of the mask-generation chain: a bank of rotated elliptical
// windows accumulates local foreground density into the adaptive local
// connectivity map (ALCM). High ALCM values mark elongated dense ink,
// which for floor plans means walls.

namespace wallgen {

/// Oriented elliptical window: FH is the short axis (height), FW the long
/// axis (width), theta the rotation in degrees. Banks built by
/// build_filter_bank always satisfy FW = 2*FH.
struct FilterSpec {
  int fh = 1;
  int fw = 2;
  double theta_deg = 0.0;

  friend bool operator==(const FilterSpec&, const FilterSpec&) = default;
};

struct FilterBank {
  std::vector<FilterSpec> specs;
};

/// A pixel inside the window satisfies
///   ((u cos t + v sin t)/a)^2 + ((-u sin t + v cos t)/b)^2 <= 1 + tol
/// with a = FW/2, b = FH/2. The tolerance absorbs floating-point noise on
/// boundary lattice points (e.g. exact axis endpoints at 90 degrees).
inline constexpr double kEllipseBoundaryTol = 1e-9;

struct PixelOffset {
  int dx = 0;
  int dy = 0;

  friend bool operator==(const PixelOffset&, const PixelOffset&) = default;
};

/// Horizontal run of window pixels on row dy: dx in [lo, hi].
struct EllipseRowRun {
  int dy = 0;
  int lo = 0;
  int hi = 0;
};

namespace detail {

inline bool inside_ellipse(const FilterSpec& spec, int u, int v) {
  const double t = spec.theta_deg * std::numbers::pi / 180.0;
  const double a = spec.fw / 2.0;
  const double b = spec.fh / 2.0;
  const double ct = std::cos(t), st = std::sin(t);
  const double p = (u * ct + v * st) / a;
  const double q = (-u * st + v * ct) / b;
  return p * p + q * q <= 1.0 + kEllipseBoundaryTol;
}

}  // namespace detail

/// Window pixels as offsets relative to the center, rows decomposed into
/// contiguous runs. The window is convex, so one run per row is exact.
inline std::vector<EllipseRowRun> ellipse_row_runs(const FilterSpec& spec) {
  if (spec.fh < 1 || spec.fw < 1)
    throw std::invalid_argument("filter axes must be at least 1 pixel");
  const int radius =
      static_cast<int>(std::ceil(std::max(spec.fw, spec.fh) / 2.0)) + 1;

  std::vector<EllipseRowRun> runs;
  for (int v = -radius; v <= radius; ++v) {
    int lo = 0, hi = -1;
    bool found = false;
    for (int u = -radius; u <= radius; ++u) {
      if (!detail::inside_ellipse(spec, u, v)) continue;
      if (!found) {
        lo = u;
        found = true;
      }
      hi = u;
    }
    if (found) runs.push_back(EllipseRowRun{v, lo, hi});
  }
  return runs;
}

inline std::vector<PixelOffset> ellipse_offsets(const FilterSpec& spec) {
  std::vector<PixelOffset> out;
  for (const auto& run : ellipse_row_runs(spec)) {
    for (int u = run.lo; u <= run.hi; ++u) out.push_back(PixelOffset{u, run.dy});
  }
  return out;
}

/// Absolute window pixels around (cx, cy), clipped to the raster.
inline std::vector<PixelOffset> ellipse_support(const FilterSpec& spec, int cx, int cy,
                                                int width, int height) {
  std::vector<PixelOffset> out;
  for (const auto& run : ellipse_row_runs(spec)) {
    const int y = cy + run.dy;
    if (y < 0 || y >= height) continue;
    const int lo = std::max(cx + run.lo, 0);
    const int hi = std::min(cx + run.hi, width - 1);
    for (int x = lo; x <= hi; ++x) out.push_back(PixelOffset{x, y});
  }
  return out;
}

/// Per-pixel accumulated foreground intensity. Values are whole counts but
/// stored as reals; the normalized view rescales the maximum onto 255.
class AlcmImage {
 public:
  AlcmImage(int width, int height) : width_(width), height_(height) {
    detail::check_dimensions(width, height);
    values_.assign(static_cast<std::size_t>(width) * height, 0.0f);
  }

  int width() const { return width_; }
  int height() const { return height_; }

  float at(int x, int y) const {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  const std::vector<float>& values() const { return values_; }
  std::vector<float>& values() { return values_; }

  float max_value() const {
    float m = 0.0f;
    for (float v : values_) m = std::max(m, v);
    return m;
  }

  /// 8-bit view with the maximum mapped to 255; an all-zero map stays zero.
  GrayImage normalized() const {
    GrayImage out(width_, height_);
    const float m = max_value();
    if (m <= 0.0f) return out;
    auto& dst = out.pixels();
    for (std::size_t i = 0; i < values_.size(); ++i) {
      dst[i] = static_cast<std::uint8_t>(
          std::clamp(std::lround(values_[i] * 255.0 / m), 0L, 255L));
    }
    return out;
  }

 private:
  int width_;
  int height_;
  std::vector<float> values_;
};

/// Filter height from the estimated wall component area. Without an
/// override, FH = round(ECA) clamped to [3, min(width, height)/4]; the
/// override reproduces the unclamped setting FH = ECA exactly.
inline int derive_fh(double eca, int width, int height,
                     std::optional<int> override = std::nullopt) {
  if (override) {
    if (*override < 1) throw std::invalid_argument("fh override must be >= 1");
    return *override;
  }
  if (!(eca > 0.0)) throw std::invalid_argument("eca must be positive");
  detail::check_dimensions(width, height);
  const long rounded = std::lround(eca);
  const int upper = std::max(3, std::min(width, height) / 4);
  return static_cast<int>(std::clamp(rounded, 3L, static_cast<long>(upper)));
}

/// One spec per orientation, equally spaced across [theta_min, theta_max]
/// with both endpoints included; a single orientation sits at the midpoint.
inline FilterBank build_filter_bank(int fh, const PipelineConfig& cfg) {
  if (fh < 1) throw std::invalid_argument("fh must be >= 1");
  cfg.validate();

  FilterBank bank;
  const int n = cfg.orientation_count;
  bank.specs.reserve(n);
  if (n == 1) {
    bank.specs.push_back(FilterSpec{fh, 2 * fh, (cfg.theta_min_deg + cfg.theta_max_deg) / 2.0});
    return bank;
  }
  const double step = (cfg.theta_max_deg - cfg.theta_min_deg) / (n - 1);
  for (int i = 0; i < n; ++i) {
    bank.specs.push_back(FilterSpec{fh, 2 * fh, cfg.theta_min_deg + i * step});
  }
  return bank;
}

/// ALCM(p) = max over bank orientations of the number of foreground pixels
/// inside the window centered at p.
///
/// Each orientation is swept with per-row prefix sums: the window is
/// decomposed once into horizontal runs, and every output row accumulates
/// run sums as two prefix lookups per window row. That turns the naive
/// O(window area) cost per pixel into O(window height), which is what makes
/// full-resolution scans tractable. Results are exact integer counts, so
/// the output does not depend on sweep order.
inline AlcmImage compute_alcm(const BinaryImage& img, const FilterBank& bank) {
  if (bank.specs.empty()) throw std::invalid_argument("empty filter bank");

  const int w = img.width();
  const int h = img.height();
  const auto& bits = img.bits();

  // prefix[y][x] = number of foreground pixels in row y left of column x.
  std::vector<std::uint32_t> prefix(static_cast<std::size_t>(w + 1) * h);
  for (int y = 0; y < h; ++y) {
    const std::size_t in_row = static_cast<std::size_t>(y) * w;
    std::uint32_t* p = prefix.data() + static_cast<std::size_t>(y) * (w + 1);
    p[0] = 0;
    for (int x = 0; x < w; ++x) p[x + 1] = p[x] + bits[in_row + x];
  }

  std::vector<std::uint32_t> best(static_cast<std::size_t>(w) * h, 0);
  std::vector<std::uint32_t> resp(w);

  for (const auto& spec : bank.specs) {
    const auto runs = ellipse_row_runs(spec);
    for (int y = 0; y < h; ++y) {
      std::fill(resp.begin(), resp.end(), 0u);
      for (const auto& run : runs) {
        const int yy = y + run.dy;
        if (yy < 0 || yy >= h) continue;
        const std::uint32_t* p = prefix.data() + static_cast<std::size_t>(yy) * (w + 1);
        const int lo = run.lo;
        const int hi = run.hi;
        // Interior sweep needs no clamping: x+lo >= 0 and x+hi+1 <= w.
        const int xa = std::min(std::max(0, -lo), w);
        const int xb = std::clamp(w - hi, xa, w);
        for (int x = 0; x < xa; ++x) {
          const int i1 = std::clamp(x + lo, 0, w);
          const int i2 = std::clamp(x + hi + 1, 0, w);
          resp[x] += p[i2] - p[i1];
        }
        for (int x = xa; x < xb; ++x) {
          resp[x] += p[x + hi + 1] - p[x + lo];
        }
        for (int x = xb; x < w; ++x) {
          const int i1 = std::clamp(x + lo, 0, w);
          const int i2 = std::clamp(x + hi + 1, 0, w);
          resp[x] += p[i2] - p[i1];
        }
      }
      std::uint32_t* out_row = best.data() + static_cast<std::size_t>(y) * w;
      for (int x = 0; x < w; ++x) out_row[x] = std::max(out_row[x], resp[x]);
    }
  }

  AlcmImage out(w, h);
  auto& vals = out.values();
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = static_cast<float>(best[i]);
  return out;
}

/// Otsu on the normalized view; foreground = values strictly above the
/// threshold (the high-connectivity side). An all-zero map yields an empty
/// mask; a constant nonzero map is wall everywhere.
inline BinaryImage threshold_alcm(const AlcmImage& alcm) {
  const GrayImage norm = alcm.normalized();
  const Histogram256 hist = build_histogram(norm);

  int populated = 0, populated_bin = 0;
  for (int i = 0; i < 256; ++i) {
    if (hist.counts[i] > 0) {
      ++populated;
      populated_bin = i;
    }
  }
  if (populated <= 1) {
    return BinaryImage(alcm.width(), alcm.height(), populated_bin > 0);
  }

  const int t = otsu_threshold(hist);
  BinaryImage out(alcm.width(), alcm.height());
  const auto& src = norm.pixels();
  auto& dst = out.bits();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > t ? 1 : 0;
  return out;
}

}  // namespace wallgen
