#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "wallgen/image.hpp"

// Stage 2 of the mask-generation chain: connected-component analysis and
// area-based noise filtration around the ECA = MDA + AVA cutoff.

namespace wallgen {

/// Exact fraction with a positive denominator, reduced. Component-area
/// statistics stay rational so the area-vs-ECA comparison never rounds.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n) : num(n), den(1) {}
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend Rational operator+(Rational a, Rational b) {
    return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
  }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  // area < eca, exact.
  friend bool operator<(std::int64_t area, const Rational& r) { return area * r.den < r.num; }
  friend bool operator>=(std::int64_t area, const Rational& r) { return !(area < r); }
};

struct BoundingBox {
  int min_x = 0;
  int min_y = 0;
  int max_x = -1;  // inclusive
  int max_y = -1;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Labels 1..n in first-encounter raster order; 0 is background.
struct ComponentLabeling {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> labels;
  std::vector<std::int64_t> areas;  // areas[i] is the area of label i+1
  std::vector<BoundingBox> boxes;

  std::size_t count() const { return areas.size(); }
  std::int32_t label_at(int x, int y) const {
    return labels[static_cast<std::size_t>(y) * width + x];
  }
};

/// Median, mean, and estimated wall component area (ECA = MDA + AVA).
struct ComponentSummary {
  Rational mda;
  Rational ava;
  Rational eca;
};

/// Two-pass labeling with union-find over provisional row labels. Final
/// label numbers follow the raster order in which each component is first
/// seen, so the numbering is deterministic.
inline ComponentLabeling label_components(const BinaryImage& img, int connectivity = 8) {
  if (connectivity != 4 && connectivity != 8)
    throw std::invalid_argument("connectivity must be 4 or 8");

  const int w = img.width();
  const int h = img.height();
  const auto& bits = img.bits();

  ComponentLabeling out;
  out.width = w;
  out.height = h;
  out.labels.assign(static_cast<std::size_t>(w) * h, 0);

  std::vector<std::int32_t> parent{0};  // index 0 is the background sentinel
  parent.reserve(1024);
  auto find = [&](std::int32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  auto unite = [&](std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  };

  auto& labels = out.labels;
  for (int y = 0; y < h; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      if (!bits[row + x]) continue;
      std::int32_t best = 0;
      auto consider = [&](int nx, int ny) {
        if (nx < 0 || nx >= w || ny < 0) return;
        std::int32_t l = labels[static_cast<std::size_t>(ny) * w + nx];
        if (l == 0) return;
        if (best == 0) {
          best = l;
        } else if (l != best) {
          unite(best, l);
          best = std::min(find(best), find(l));
        }
      };
      consider(x - 1, y);
      consider(x, y - 1);
      if (connectivity == 8) {
        consider(x - 1, y - 1);
        consider(x + 1, y - 1);
      }
      if (best == 0) {
        best = static_cast<std::int32_t>(parent.size());
        parent.push_back(best);
      }
      labels[row + x] = best;
    }
  }

  // Resolve provisional labels to roots, then renumber roots by first
  // encounter while collecting areas and bounding boxes.
  std::vector<std::int32_t> final_of_root(parent.size(), 0);
  std::int32_t next = 0;
  for (int y = 0; y < h; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      std::int32_t l = labels[row + x];
      if (l == 0) continue;
      std::int32_t root = find(l);
      std::int32_t f = final_of_root[root];
      if (f == 0) {
        f = ++next;
        final_of_root[root] = f;
        out.areas.push_back(0);
        out.boxes.push_back(BoundingBox{x, y, x, y});
      }
      labels[row + x] = f;
      ++out.areas[f - 1];
      auto& box = out.boxes[f - 1];
      box.min_x = std::min(box.min_x, x);
      box.max_x = std::max(box.max_x, x);
      box.min_y = std::min(box.min_y, y);
      box.max_y = std::max(box.max_y, y);
    }
  }
  return out;
}

/// MDA = median area (interpolated for even counts), AVA = mean area,
/// ECA = MDA + AVA, all exact.
inline ComponentSummary summarize(const ComponentLabeling& labeling) {
  const std::size_t n = labeling.areas.size();
  if (n == 0) throw std::invalid_argument("no components");

  std::vector<std::int64_t> sorted = labeling.areas;
  std::sort(sorted.begin(), sorted.end());

  Rational mda = (n % 2 == 1)
                     ? Rational(sorted[n / 2])
                     : Rational(sorted[n / 2 - 1] + sorted[n / 2], 2);
  std::int64_t total = std::accumulate(sorted.begin(), sorted.end(), std::int64_t{0});
  Rational ava(total, static_cast<std::int64_t>(n));

  return ComponentSummary{mda, ava, mda + ava};
}

/// Turns off every component whose area is strictly below the ECA cutoff;
/// components at or above it are kept verbatim.
inline BinaryImage filter_components(const BinaryImage& img,
                                     const ComponentLabeling& labeling,
                                     const Rational& eca) {
  if (labeling.width != img.width() || labeling.height != img.height())
    throw std::invalid_argument("labeling does not match image dimensions");

  std::vector<std::uint8_t> keep(labeling.count() + 1, 0);
  for (std::size_t i = 0; i < labeling.count(); ++i)
    keep[i + 1] = labeling.areas[i] >= eca ? 1 : 0;

  BinaryImage out(img.width(), img.height());
  auto& dst = out.bits();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = keep[labeling.labels[i]];
  return out;
}

/// Debug rendering: kept components in black, removed ones in red, on white.
inline PlanImage render_filtration_overlay(const BinaryImage& img,
                                           const ComponentLabeling& labeling,
                                           const Rational& eca) {
  if (labeling.width != img.width() || labeling.height != img.height())
    throw std::invalid_argument("labeling does not match image dimensions");

  PlanImage out(img.width(), img.height(), Rgb{255, 255, 255});
  auto& dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    std::int32_t l = labeling.labels[i];
    if (l == 0) continue;
    dst[i] = labeling.areas[l - 1] >= eca ? Rgb{0, 0, 0} : Rgb{220, 30, 30};
  }
  return out;
}

}  // namespace wallgen
