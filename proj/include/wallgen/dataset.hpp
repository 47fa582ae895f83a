#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wallgen/image.hpp"

namespace wallgen {

enum class WallType { kFilled, kEmpty };
enum class SourceSet { kCVC, kRFP, kVersailles };

inline std::string to_string(WallType t) {
  return t == WallType::kFilled ? "filled" : "empty";
}

inline std::string to_string(SourceSet s) {
  switch (s) {
    case SourceSet::kCVC: return "CVC";
    case SourceSet::kRFP: return "RFP";
    default: return "Versailles";
  }
}

inline std::optional<WallType> parse_wall_type(std::string_view s) {
  if (s == "filled") return WallType::kFilled;
  if (s == "empty") return WallType::kEmpty;
  return std::nullopt;
}

inline std::optional<SourceSet> parse_source_set(std::string_view s) {
  if (s == "CVC") return SourceSet::kCVC;
  if (s == "RFP") return SourceSet::kRFP;
  if (s == "Versailles") return SourceSet::kVersailles;
  return std::nullopt;
}

struct ManifestEntry {
  std::string id;
  std::string image;  ///< Path as written in the manifest file.
  std::string mask;   ///< Path as written; empty when the entry has no mask.
  WallType wall_type = WallType::kFilled;
  SourceSet source = SourceSet::kVersailles;
  std::string split;  ///< Optional split tag (train/val/test); empty when untagged.

  /// Paths resolved against the manifest's directory at load time.
  std::filesystem::path image_path;
  std::filesystem::path mask_path;

  bool has_mask() const { return !mask.empty(); }
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::filesystem::path directory;  ///< Base used to resolve relative paths.

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

inline constexpr std::string_view kManifestHeader = "id,image,mask,wall_type,source,split";

/// Thrown by load_manifest with every problem found, one per line.
class ManifestError : public std::runtime_error {
 public:
  ManifestError(std::string message, std::vector<std::string> items)
      : std::runtime_error(std::move(message)), items_(std::move(items)) {}

  const std::vector<std::string>& items() const { return items_; }

 private:
  std::vector<std::string> items_;
};

namespace detail {

inline std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

/// Parses a manifest file (header `id,image,mask,wall_type,source,split`,
/// UTF-8, one entry per line, blank lines ignored). Relative image and
/// mask paths are resolved against the manifest's directory. All
/// validation problems are collected and reported together.
inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path.string());

  DatasetManifest manifest;
  manifest.directory = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");

  std::vector<std::string> problems;
  std::string line;
  if (!std::getline(in, line)) {
    throw ManifestError("manifest is empty: " + path.string(), {});
  }
  if (detail::strip_cr(line) != kManifestHeader) {
    throw ManifestError("manifest header must be exactly `" + std::string(kManifestHeader) +
                            "`: " + path.string(),
                        {});
  }

  std::vector<std::string> seen_ids;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::strip_cr(line);
    if (line.empty()) continue;

    auto fields = detail::split_fields(line);
    if (fields.size() != 6) {
      problems.push_back("line " + std::to_string(lineno) + ": expected 6 fields, got " +
                         std::to_string(fields.size()));
      continue;
    }

    ManifestEntry e;
    e.id = fields[0];
    e.image = fields[1];
    e.mask = fields[2];
    e.split = fields[5];

    if (e.id.empty()) {
      problems.push_back("line " + std::to_string(lineno) + ": empty id");
      continue;
    }
    if (std::find(seen_ids.begin(), seen_ids.end(), e.id) != seen_ids.end()) {
      problems.push_back("line " + std::to_string(lineno) + ": duplicate id `" + e.id + "`");
      continue;
    }
    seen_ids.push_back(e.id);

    auto wt = parse_wall_type(fields[3]);
    if (!wt) {
      problems.push_back("line " + std::to_string(lineno) + ": unknown wall_type `" + fields[3] +
                         "` (expected filled or empty)");
      continue;
    }
    e.wall_type = *wt;

    auto src = parse_source_set(fields[4]);
    if (!src) {
      problems.push_back("line " + std::to_string(lineno) + ": unknown source `" + fields[4] +
                         "` (expected CVC, RFP or Versailles)");
      continue;
    }
    e.source = *src;

    if (e.image.empty()) {
      problems.push_back("line " + std::to_string(lineno) + ": empty image path");
      continue;
    }
    std::filesystem::path img(e.image);
    e.image_path = img.is_absolute() ? img : manifest.directory / img;
    if (!std::filesystem::exists(e.image_path)) {
      problems.push_back("line " + std::to_string(lineno) + ": image file not found: " +
                         e.image_path.string());
      continue;
    }
    if (e.has_mask()) {
      std::filesystem::path msk(e.mask);
      e.mask_path = msk.is_absolute() ? msk : manifest.directory / msk;
      if (!std::filesystem::exists(e.mask_path)) {
        problems.push_back("line " + std::to_string(lineno) + ": mask file not found: " +
                           e.mask_path.string());
        continue;
      }
    }

    manifest.entries.push_back(std::move(e));
  }

  if (!problems.empty()) {
    std::string msg = "manifest validation failed (" + std::to_string(problems.size()) +
                      " problem" + (problems.size() == 1 ? "" : "s") + "): " + path.string();
    throw ManifestError(std::move(msg), std::move(problems));
  }
  return manifest;
}

/// Serializes a manifest for writing at `path`. Paths are re-expressed
/// relative to that location when possible so the written manifest stays
/// self-contained.
inline std::string manifest_to_string(const DatasetManifest& manifest,
                                      const std::filesystem::path& path) {
  std::filesystem::path out_dir =
      path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");

  auto rewrite = [&](const std::filesystem::path& resolved, const std::string& raw) {
    if (raw.empty()) return std::string();
    std::error_code ec;
    auto abs = std::filesystem::absolute(resolved, ec);
    if (ec) return raw;
    auto rel = std::filesystem::relative(abs, std::filesystem::absolute(out_dir, ec), ec);
    if (ec || rel.empty()) return abs.string();
    return rel.generic_string();
  };

  std::ostringstream out;
  out << kManifestHeader << '\n';
  for (const auto& e : manifest.entries) {
    out << e.id << ',' << rewrite(e.image_path, e.image) << ','
        << rewrite(e.mask_path, e.mask) << ',' << to_string(e.wall_type) << ','
        << to_string(e.source) << ',' << e.split << '\n';
  }
  return out.str();
}

inline void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest: " + path.string());
  out << manifest_to_string(manifest, path);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

/// Replaces near-white background pixels (min channel >= white_threshold)
/// with the tiled texture pixel at the same coordinate. Everything darker
/// is left untouched.
inline PlanImage substitute_background(const PlanImage& img, const PlanImage& texture,
                                       int white_threshold = 245) {
  if (white_threshold < 0 || white_threshold > 255) {
    throw std::invalid_argument("white_threshold must be in [0, 255]");
  }
  PlanImage out = img;
  const int tw = texture.width();
  const int th = texture.height();
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      Rgb p = img.at(x, y);
      int lo = std::min(p.r, std::min(p.g, p.b));
      if (lo >= white_threshold) out.at(x, y) = texture.at(x % tw, y % th);
    }
  }
  return out;
}

struct AugmentParams {
  double zoom_range = 0.3;   ///< Zoom drawn from [1 - z, 1 + z].
  double shift_range = 0.2;  ///< Shift drawn from [-s, +s] of width/height.
  bool horizontal_flip = true;
  bool vertical_flip = true;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(zoom_range >= 0.0 && zoom_range < 1.0)) {
      throw std::invalid_argument("zoom_range must be in [0, 1)");
    }
    if (!(shift_range >= 0.0 && shift_range < 1.0)) {
      throw std::invalid_argument("shift_range must be in [0, 1)");
    }
  }
};

/// One sampled transform: zoom about the image centre, then shift, then flips.
struct AugmentDraw {
  double zoom = 1.0;
  double shift_x = 0.0;  ///< Fraction of width, positive moves content right.
  double shift_y = 0.0;  ///< Fraction of height, positive moves content down.
  bool flip_h = false;
  bool flip_v = false;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline double next_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Deterministic per-index draw. Output index i gets its own stream seeded
/// from splitmix64(seed ^ splitmix64(i)), so growing n never reshuffles
/// earlier outputs. Draw order within a stream: zoom, shift_x, shift_y,
/// then one draw per enabled flip flag.
inline AugmentDraw augment_draw(const AugmentParams& params, std::uint64_t index) {
  params.validate();
  std::mt19937_64 rng(detail::splitmix64(params.seed ^ detail::splitmix64(index)));
  AugmentDraw d;
  d.zoom = 1.0 + params.zoom_range * (2.0 * detail::next_unit(rng) - 1.0);
  d.shift_x = params.shift_range * (2.0 * detail::next_unit(rng) - 1.0);
  d.shift_y = params.shift_range * (2.0 * detail::next_unit(rng) - 1.0);
  if (params.horizontal_flip) d.flip_h = detail::next_unit(rng) < 0.5;
  if (params.vertical_flip) d.flip_v = detail::next_unit(rng) < 0.5;
  return d;
}

namespace detail {

/// Inverse-maps output pixel (x, y) through flips, shift, then zoom,
/// producing the source coordinate to sample.
inline std::pair<double, double> inverse_map(int x, int y, int w, int h, const AugmentDraw& d) {
  double xf = d.flip_h ? (w - 1 - x) : x;
  double yf = d.flip_v ? (h - 1 - y) : y;
  double xs = xf - d.shift_x * w;
  double ys = yf - d.shift_y * h;
  double cx = (w - 1) * 0.5;
  double cy = (h - 1) * 0.5;
  return {cx + (xs - cx) / d.zoom, cy + (ys - cy) / d.zoom};
}

inline std::uint8_t bilinear_channel(const PlanImage& img, double u, double v, int channel) {
  int x0 = static_cast<int>(std::floor(u));
  int y0 = static_cast<int>(std::floor(v));
  double fx = u - x0;
  double fy = v - y0;
  auto sample = [&](int x, int y) -> double {
    x = std::clamp(x, 0, img.width() - 1);
    y = std::clamp(y, 0, img.height() - 1);
    Rgb p = img.at(x, y);
    return channel == 0 ? p.r : channel == 1 ? p.g : p.b;
  };
  double top = sample(x0, y0) * (1.0 - fx) + sample(x0 + 1, y0) * fx;
  double bot = sample(x0, y0 + 1) * (1.0 - fx) + sample(x0 + 1, y0 + 1) * fx;
  double val = top * (1.0 - fy) + bot * fy;
  return static_cast<std::uint8_t>(std::clamp<long>(std::lround(val), 0, 255));
}

}  // namespace detail

/// Applies one draw to an image/mask pair. The image is resampled
/// bilinearly, the mask nearest-neighbour; source coordinates outside the
/// canvas become white (image) or background (mask).
inline std::pair<PlanImage, WallMask> apply_augment(const PlanImage& img, const WallMask& mask,
                                                    const AugmentDraw& draw) {
  if (img.width() != mask.width() || img.height() != mask.height()) {
    throw std::invalid_argument("image and mask dimensions differ");
  }
  if (!(draw.zoom > 0.0)) throw std::invalid_argument("zoom must be positive");

  const int w = img.width();
  const int h = img.height();
  PlanImage out_img(w, h);
  WallMask out_mask(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto [u, v] = detail::inverse_map(x, y, w, h, draw);
      bool inside = u >= 0.0 && u <= w - 1.0 && v >= 0.0 && v <= h - 1.0;
      if (inside) {
        out_img.at(x, y) = Rgb{detail::bilinear_channel(img, u, v, 0),
                               detail::bilinear_channel(img, u, v, 1),
                               detail::bilinear_channel(img, u, v, 2)};
        int xn = static_cast<int>(std::lround(u));
        int yn = static_cast<int>(std::lround(v));
        xn = std::clamp(xn, 0, w - 1);
        yn = std::clamp(yn, 0, h - 1);
        out_mask.set(x, y, mask.at(xn, yn));
      } else {
        out_img.at(x, y) = Rgb{255, 255, 255};
        out_mask.set(x, y, false);
      }
    }
  }
  return {std::move(out_img), std::move(out_mask)};
}

/// Generates n augmented pairs; pair i uses augment_draw(params, i).
inline std::vector<std::pair<PlanImage, WallMask>> augment(const PlanImage& img,
                                                           const WallMask& mask,
                                                           const AugmentParams& params,
                                                           std::size_t n) {
  params.validate();
  std::vector<std::pair<PlanImage, WallMask>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(apply_augment(img, mask, augment_draw(params, i)));
  }
  return out;
}

struct FoldSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
};

/// Shuffles entry ids with a seeded Fisher-Yates pass, cuts them into k
/// contiguous chunks, and rotates chunk roles: fold i tests on chunk i,
/// validates on chunk (i+1) mod k, and trains on the rest. Every id lands
/// in exactly one test set across the k folds; with k = 5 that is the
/// usual 3/5 train, 1/5 validation, 1/5 test layout.
inline std::vector<FoldSplit> kfold_split(const DatasetManifest& manifest, int k,
                                          std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("k must be at least 2");
  const std::size_t n = manifest.entries.size();
  if (n < static_cast<std::size_t>(k)) {
    throw std::invalid_argument("manifest has " + std::to_string(n) + " entries, need at least " +
                                std::to_string(k));
  }

  std::vector<std::string> ids;
  ids.reserve(n);
  for (const auto& e : manifest.entries) ids.push_back(e.id);

  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(ids[i], ids[j]);
  }

  auto chunk_begin = [&](int j) { return (static_cast<std::size_t>(j) * n) / k; };

  std::vector<FoldSplit> folds(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    FoldSplit& fold = folds[static_cast<std::size_t>(i)];
    int val_chunk = (i + 1) % k;
    for (int j = 0; j < k; ++j) {
      auto first = ids.begin() + static_cast<std::ptrdiff_t>(chunk_begin(j));
      auto last = ids.begin() + static_cast<std::ptrdiff_t>(chunk_begin(j + 1));
      if (j == i) {
        fold.test.assign(first, last);
      } else if (j == val_chunk) {
        fold.validation.assign(first, last);
      } else {
        fold.train.insert(fold.train.end(), first, last);
      }
    }
  }
  return folds;
}

}  // namespace wallgen
