#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "wallgen/image.hpp"

// Stage 1 of the mask-generation chain: exposure correction, color
// reduction and global binarization.

namespace wallgen {

struct Histogram256 {
  std::array<std::int64_t, 256> counts{};

  std::int64_t total() const {
    std::int64_t t = 0;
    for (auto c : counts) t += c;
    return t;
  }
};

inline Histogram256 build_histogram(const GrayImage& img) {
  Histogram256 h;
  for (auto v : img.pixels()) ++h.counts[v];
  return h;
}

/// Real-valued RGB centroid; integer-rounded only when written back to pixels.
struct PaletteColor {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  Rgb rounded() const {
    auto q = [](double v) {
      return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    };
    return Rgb{q(r), q(g), q(b)};
  }
};

struct Palette {
  std::vector<PaletteColor> centroids;
};

/// Per-round diagnostics for quantize_colors; pass one in to assert Lloyd
/// monotonicity (the per-round sum of squared distances never increases).
struct KMeansTrace {
  std::vector<double> sse_per_round;
  int rounds = 0;
  bool converged = false;
};

// --- exposure correction ----------------------------------------------------

/// Contrast stretch plus mean-targeting gamma, one monotone curve applied to
/// every channel. The stretch maps the image's min/max luminance onto
/// [0, 255]; gamma is then chosen so the stretched mean luminance lands on
/// 127.5 (gamma = log(0.5)/log(mean/255), clamped to [0.2, 5.0]).
/// Constant-luminance images are returned unchanged.
inline PlanImage auto_exposure_correct(const PlanImage& img) {
  const auto& src = img.pixels();

  double lmin = 255.0, lmax = 0.0;
  for (const auto& p : src) {
    double y = 0.299 * p.r + 0.587 * p.g + 0.114 * p.b;
    lmin = std::min(lmin, y);
    lmax = std::max(lmax, y);
  }
  if (lmax <= lmin) return img;

  const double scale = 255.0 / (lmax - lmin);
  auto stretch = [&](double v) {
    return std::clamp((v - lmin) * scale, 0.0, 255.0);
  };

  double mean_sum = 0.0;
  for (const auto& p : src) {
    mean_sum += 0.299 * stretch(p.r) + 0.587 * stretch(p.g) + 0.114 * stretch(p.b);
  }
  const double mean = mean_sum / static_cast<double>(img.pixel_count());

  double gamma = 1.0;
  if (mean > 0.0 && mean < 255.0) {
    gamma = std::log(0.5) / std::log(mean / 255.0);
    gamma = std::clamp(gamma, 0.2, 5.0);
  }

  // One 256-entry lookup table covers both stages; rounding happens once.
  std::array<std::uint8_t, 256> lut;
  for (int v = 0; v < 256; ++v) {
    double s = stretch(static_cast<double>(v));
    double g = 255.0 * std::pow(s / 255.0, gamma);
    lut[v] = static_cast<std::uint8_t>(std::clamp(std::lround(g), 0L, 255L));
  }

  PlanImage out(img.width(), img.height());
  auto& dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = Rgb{lut[src[i].r], lut[src[i].g], lut[src[i].b]};
  }
  return out;
}

// --- k-means color reduction ------------------------------------------------

namespace detail {

inline std::uint32_t pack_rgb(Rgb p) {
  return (static_cast<std::uint32_t>(p.r) << 16) |
         (static_cast<std::uint32_t>(p.g) << 8) | p.b;
}

inline Rgb unpack_rgb(std::uint32_t v) {
  return Rgb{static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 8),
             static_cast<std::uint8_t>(v)};
}

inline double color_dist2(Rgb c, const PaletteColor& m) {
  double dr = c.r - m.r, dg = c.g - m.g, db = c.b - m.b;
  return dr * dr + dg * dg + db * db;
}

}  // namespace detail

/// K-means in RGB space. Initial centroids are k distinct pixel values picked
/// by a partial Fisher-Yates pass over the image's distinct colors (listed in
/// first-appearance raster order) driven by mt19937_64(seed); index draws use
/// rng() modulo the remaining range. Nearest-centroid ties go to the lowest
/// centroid index. Iteration stops when assignments are stable or after 100
/// rounds; a cluster that empties is re-seeded on the color currently
/// farthest from its assigned centroid.
inline std::pair<PlanImage, Palette> quantize_colors(const PlanImage& img, int k,
                                                     std::uint64_t seed,
                                                     KMeansTrace* trace = nullptr) {
  if (k < 2) throw std::invalid_argument("quantize_colors requires k >= 2");
  if (img.pixel_count() < k)
    throw std::invalid_argument("quantize_colors requires at least k pixels");

  const auto& px = img.pixels();

  // Distinct colors in first-appearance order, with multiplicities. Running
  // k-means over (color, count) pairs is exact: every pixel of a color gets
  // the same assignment, and centroid sums weight by count.
  std::vector<std::uint32_t> colors;
  std::vector<std::int64_t> weight;
  {
    std::unordered_map<std::uint32_t, std::size_t> index;
    index.reserve(4096);
    for (const auto& p : px) {
      std::uint32_t c = detail::pack_rgb(p);
      auto [it, inserted] = index.try_emplace(c, colors.size());
      if (inserted) {
        colors.push_back(c);
        weight.push_back(1);
      } else {
        ++weight[it->second];
      }
    }
  }

  const std::size_t distinct = colors.size();
  std::vector<PaletteColor> centroids;

  if (distinct <= static_cast<std::size_t>(k)) {
    // Already at or below the requested palette size; the image is its own
    // fixed point.
    for (auto c : colors) {
      Rgb p = detail::unpack_rgb(c);
      centroids.push_back(PaletteColor{double(p.r), double(p.g), double(p.b)});
    }
    if (trace) {
      trace->rounds = 0;
      trace->converged = true;
      trace->sse_per_round.assign(1, 0.0);
    }
    return {img, Palette{std::move(centroids)}};
  }

  std::mt19937_64 rng(seed);
  std::vector<std::uint32_t> pool = colors;
  for (int i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng() % (pool.size() - i));
    std::swap(pool[i], pool[j]);
    Rgb p = detail::unpack_rgb(pool[i]);
    centroids.push_back(PaletteColor{double(p.r), double(p.g), double(p.b)});
  }

  std::vector<int> assign(distinct, -1);
  std::vector<Rgb> cache(distinct);
  for (std::size_t i = 0; i < distinct; ++i) cache[i] = detail::unpack_rgb(colors[i]);

  bool converged = false;
  int round = 0;
  for (; round < 100; ++round) {
    bool changed = false;
    double sse = 0.0;
    for (std::size_t i = 0; i < distinct; ++i) {
      double best = detail::color_dist2(cache[i], centroids[0]);
      int best_j = 0;
      for (int j = 1; j < k; ++j) {
        double d = detail::color_dist2(cache[i], centroids[j]);
        if (d < best) {
          best = d;
          best_j = j;
        }
      }
      if (assign[i] != best_j) {
        assign[i] = best_j;
        changed = true;
      }
      sse += best * static_cast<double>(weight[i]);
    }
    if (trace) trace->sse_per_round.push_back(sse);
    if (!changed) {
      converged = true;
      break;
    }

    // Integer channel sums keep the means exact and order-independent.
    std::vector<std::int64_t> sr(k, 0), sg(k, 0), sb(k, 0), cnt(k, 0);
    for (std::size_t i = 0; i < distinct; ++i) {
      int j = assign[i];
      sr[j] += weight[i] * cache[i].r;
      sg[j] += weight[i] * cache[i].g;
      sb[j] += weight[i] * cache[i].b;
      cnt[j] += weight[i];
    }
    for (int j = 0; j < k; ++j) {
      if (cnt[j] > 0) {
        centroids[j] = PaletteColor{double(sr[j]) / cnt[j], double(sg[j]) / cnt[j],
                                    double(sb[j]) / cnt[j]};
      }
    }
    // Empty-cluster repair: move the centroid onto the farthest color.
    for (int j = 0; j < k; ++j) {
      if (cnt[j] != 0) continue;
      double worst = -1.0;
      std::size_t pick = 0;
      for (std::size_t i = 0; i < distinct; ++i) {
        double d = detail::color_dist2(cache[i], centroids[assign[i]]);
        if (d > worst) {
          worst = d;
          pick = i;
        }
      }
      centroids[j] = PaletteColor{double(cache[pick].r), double(cache[pick].g),
                                  double(cache[pick].b)};
    }
  }

  if (trace) {
    trace->rounds = round;
    trace->converged = converged;
  }

  // Final assignment against the converged centroids, then write back the
  // rounded centroid color per pixel.
  std::unordered_map<std::uint32_t, Rgb> remap;
  remap.reserve(distinct);
  for (std::size_t i = 0; i < distinct; ++i) {
    double best = detail::color_dist2(cache[i], centroids[0]);
    int best_j = 0;
    for (int j = 1; j < k; ++j) {
      double d = detail::color_dist2(cache[i], centroids[j]);
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    remap[colors[i]] = centroids[best_j].rounded();
  }

  PlanImage out(img.width(), img.height());
  auto& dst = out.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) dst[i] = remap[detail::pack_rgb(px[i])];
  return {std::move(out), Palette{std::move(centroids)}};
}

// --- Otsu thresholding --------------------------------------------------

/// Threshold maximizing the between-class variance. Pixels at or below the
/// returned level form the dark class. Ties resolve to the smallest level.
///
/// The argmax comparison runs in exact integer arithmetic: with c0/c1 the
/// class populations and s0/s1 the class sums at threshold t, the variance
/// ordering of A(t)^2 / (c0*c1), A = s0*c1 - s1*c0, is decided by
/// cross-multiplied 256-bit products, so no floating-point rounding can
/// reorder near-ties.
inline int otsu_threshold(const Histogram256& hist) {
  using boost::multiprecision::int256_t;

  std::int64_t total = 0, total_sum = 0;
  int first = -1, last = -1;
  for (int i = 0; i < 256; ++i) {
    std::int64_t c = hist.counts[i];
    if (c < 0) throw std::invalid_argument("histogram bin count must be non-negative");
    if (c > 0) {
      if (first < 0) first = i;
      last = i;
    }
    total += c;
    total_sum += c * i;
  }
  if (total <= 0 || first == last) {
    throw std::invalid_argument("degenerate histogram");
  }

  std::int64_t c0 = 0, s0 = 0;
  int best_t = -1;
  int256_t best_a2 = 0;  // A(best)^2
  std::int64_t best_c0 = 1, best_c1 = 1;
  for (int t = first; t < last; ++t) {
    c0 += hist.counts[t];
    s0 += hist.counts[t] * t;
    const std::int64_t c1 = total - c0;
    const std::int64_t s1 = total_sum - s0;
    const int256_t a = int256_t(s0) * c1 - int256_t(s1) * c0;
    const int256_t a2 = a * a;
    if (best_t < 0 || a2 * best_c0 * best_c1 > best_a2 * c0 * c1) {
      best_t = t;
      best_a2 = a2;
      best_c0 = c0;
      best_c1 = c1;
    }
  }
  return best_t;
}

/// Global Otsu binarization; foreground is the dark class (ink).
inline BinaryImage binarize(const GrayImage& img) {
  const int t = otsu_threshold(build_histogram(img));
  BinaryImage out(img.width(), img.height());
  const auto& src = img.pixels();
  auto& dst = out.bits();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] <= t ? 1 : 0;
  return out;
}

}  // namespace wallgen
