#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>

#include "wallgen/alcm.hpp"
#include "wallgen/components.hpp"
#include "wallgen/config.hpp"
#include "wallgen/image.hpp"
#include "wallgen/preprocess.hpp"

// Pipeline orchestrator: exposure correction -> color reduction ->
// binarization -> component filtration -> ALCM -> superimposition.

namespace wallgen {

/// Pixelwise AND of the noise-filtered binary plan and the thresholded
/// ALCM: a wall pixel must be ink AND sit in a high-connectivity region.
inline WallMask superimpose(const BinaryImage& filtered, const BinaryImage& alcm_mask) {
  if (filtered.width() != alcm_mask.width() || filtered.height() != alcm_mask.height())
    throw std::invalid_argument("superimpose requires equal dimensions");
  WallMask out(filtered.width(), filtered.height());
  const auto& a = filtered.bits();
  const auto& b = alcm_mask.bits();
  auto& dst = out.bits();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = a[i] & b[i];
  return out;
}

/// Every intermediate of the chain, retained only on request so batch runs
/// over large scans do not hold five full-resolution rasters per image.
struct StageArtifacts {
  PlanImage corrected;
  PlanImage quantized;
  Palette palette;
  GrayImage gray;
  BinaryImage binary;
  ComponentLabeling labeling;
  std::optional<ComponentSummary> summary;
  BinaryImage filtered;
  int fh = 0;
  FilterBank bank;
  AlcmImage alcm;
  BinaryImage alcm_mask;
};

enum class MaskGenWarning {
  kNone,
  kBlankPage,      // binarization degenerate (single gray level)
  kNoComponents,   // nothing survived binarization
};

struct MaskGenResult {
  WallMask mask;
  MaskGenWarning warning = MaskGenWarning::kNone;
  std::optional<StageArtifacts> stages;
};

namespace detail {

/// Box-average reduction by an integer factor; edge blocks may be partial.
inline PlanImage downscale_plan(const PlanImage& img, int factor) {
  const int w = (img.width() + factor - 1) / factor;
  const int h = (img.height() + factor - 1) / factor;
  PlanImage out(w, h);
  for (int oy = 0; oy < h; ++oy) {
    for (int ox = 0; ox < w; ++ox) {
      std::int64_t sr = 0, sg = 0, sb = 0, n = 0;
      const int y1 = std::min((oy + 1) * factor, img.height());
      const int x1 = std::min((ox + 1) * factor, img.width());
      for (int y = oy * factor; y < y1; ++y) {
        for (int x = ox * factor; x < x1; ++x) {
          const Rgb& p = img.at(x, y);
          sr += p.r;
          sg += p.g;
          sb += p.b;
          ++n;
        }
      }
      out.at(ox, oy) = Rgb{static_cast<std::uint8_t>((sr + n / 2) / n),
                           static_cast<std::uint8_t>((sg + n / 2) / n),
                           static_cast<std::uint8_t>((sb + n / 2) / n)};
    }
  }
  return out;
}

/// Nearest-neighbor expansion back to the original dimensions.
inline BinaryImage upscale_mask(const BinaryImage& mask, int factor, int width, int height) {
  BinaryImage out(width, height);
  auto& dst = out.bits();
  for (int y = 0; y < height; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * width;
    for (int x = 0; x < width; ++x) {
      dst[row + x] = mask.at(x / factor, y / factor) ? 1 : 0;
    }
  }
  return out;
}

}  // namespace detail

/// Runs the full mask-generation chain. Deterministic for a fixed config;
/// blank or component-free pages produce an empty mask with a warning
/// rather than an error, so corpus batches never abort mid-run.
inline MaskGenResult generate_wall_mask(const PlanImage& input, const PipelineConfig& cfg,
                                        bool keep_stages = false) {
  cfg.validate();

  const PlanImage* work = &input;
  PlanImage reduced(1, 1);
  if (cfg.downscale > 1) {
    reduced = detail::downscale_plan(input, cfg.downscale);
    work = &reduced;
  }
  const int w = work->width();
  const int h = work->height();

  PlanImage corrected = auto_exposure_correct(*work);
  auto [quantized, palette] = quantize_colors(corrected, cfg.color_count, cfg.rng_seed);
  GrayImage gray = to_grayscale(quantized);

  MaskGenResult result{WallMask(w, h), MaskGenWarning::kNone, std::nullopt};

  std::optional<BinaryImage> binary;
  try {
    binary = binarize(gray);
  } catch (const std::invalid_argument&) {
    // Single gray level: a blank (or uniformly tinted) page.
    result.warning = MaskGenWarning::kBlankPage;
  }

  std::optional<ComponentLabeling> labeling;
  if (binary) {
    labeling = label_components(*binary, cfg.connectivity);
    if (labeling->count() == 0) result.warning = MaskGenWarning::kNoComponents;
  }

  if (binary && labeling->count() > 0) {
    ComponentSummary summary = summarize(*labeling);
    BinaryImage filtered = filter_components(*binary, *labeling, summary.eca);

    const int fh = derive_fh(summary.eca.value(), w, h, cfg.fh_override);
    FilterBank bank = build_filter_bank(fh, cfg);
    AlcmImage alcm = compute_alcm(filtered, bank);
    BinaryImage alcm_mask = threshold_alcm(alcm);
    result.mask = superimpose(filtered, alcm_mask);

    if (keep_stages) {
      result.stages = StageArtifacts{std::move(corrected), std::move(quantized),
                                     std::move(palette),  std::move(gray),
                                     std::move(*binary),  std::move(*labeling),
                                     summary,             std::move(filtered),
                                     fh,                  std::move(bank),
                                     std::move(alcm),     std::move(alcm_mask)};
    }
  } else if (keep_stages) {
    BinaryImage empty_binary = binary ? std::move(*binary) : BinaryImage(w, h);
    result.stages = StageArtifacts{std::move(corrected),
                                   std::move(quantized),
                                   std::move(palette),
                                   std::move(gray),
                                   std::move(empty_binary),
                                   labeling ? std::move(*labeling) : ComponentLabeling{},
                                   std::nullopt,
                                   BinaryImage(w, h),
                                   0,
                                   FilterBank{},
                                   AlcmImage(w, h),
                                   BinaryImage(w, h)};
  }

  if (cfg.downscale > 1) {
    result.mask = detail::upscale_mask(result.mask, cfg.downscale, input.width(), input.height());
  }
  return result;
}

}  // namespace wallgen
