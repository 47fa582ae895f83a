#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "wallgen/dataset.hpp"
#include "wallgen/image.hpp"

namespace wallgen {

/// Exact pixel tallies for one prediction/truth pair. Every metric below
/// is a single division of these integers, so nothing accumulates
/// floating-point error over pixels.
struct MaskCounts {
  std::int64_t pred_fg = 0;
  std::int64_t truth_fg = 0;
  std::int64_t intersection = 0;
  std::int64_t matching = 0;  ///< Pixels where the two masks agree, either class.
  std::int64_t total = 0;
};

inline MaskCounts count_masks(const BinaryImage& pred, const BinaryImage& truth) {
  if (pred.width() != truth.width() || pred.height() != truth.height()) {
    throw std::invalid_argument("mask dimensions differ");
  }
  MaskCounts c;
  const auto& pb = pred.bits();
  const auto& tb = truth.bits();
  c.total = static_cast<std::int64_t>(pb.size());
  for (std::size_t i = 0; i < pb.size(); ++i) {
    c.pred_fg += pb[i];
    c.truth_fg += tb[i];
    c.intersection += static_cast<std::int64_t>(pb[i] & tb[i]);
    c.matching += static_cast<std::int64_t>(pb[i] == tb[i]);
  }
  return c;
}

/// Dice coefficient 2|Y∩T| / (|Y|+|T|). Two empty masks agree perfectly,
/// so that case returns 1.
inline double dice(const BinaryImage& pred, const BinaryImage& truth) {
  MaskCounts c = count_masks(pred, truth);
  std::int64_t denom = c.pred_fg + c.truth_fg;
  if (denom == 0) return 1.0;
  return 2.0 * static_cast<double>(c.intersection) / static_cast<double>(denom);
}

/// Smoothed Dice loss 1 - (2|Y∩T|+1)/(|Y|+|T|+1). The +1 terms make the
/// both-empty case exactly 0 without a special case, and mean this is not
/// simply 1 - dice.
inline double dice_loss(const BinaryImage& pred, const BinaryImage& truth) {
  MaskCounts c = count_masks(pred, truth);
  return 1.0 - (2.0 * static_cast<double>(c.intersection) + 1.0) /
                   (static_cast<double>(c.pred_fg + c.truth_fg) + 1.0);
}

/// Intersection over union; both-empty returns 1.
inline double iou(const BinaryImage& pred, const BinaryImage& truth) {
  MaskCounts c = count_masks(pred, truth);
  std::int64_t uni = c.pred_fg + c.truth_fg - c.intersection;
  if (uni == 0) return 1.0;
  return static_cast<double>(c.intersection) / static_cast<double>(uni);
}

/// Fraction of pixels on which the two masks agree.
inline double pixel_accuracy(const BinaryImage& pred, const BinaryImage& truth) {
  MaskCounts c = count_masks(pred, truth);
  return static_cast<double>(c.matching) / static_cast<double>(c.total);
}

struct ImageScore {
  std::string id;
  WallType wall_type = WallType::kFilled;
  MaskCounts counts;
  double dice = 0.0;
  double iou = 0.0;
  double accuracy = 0.0;
};

struct GroupStats {
  std::size_t count = 0;
  double mean_dice = 0.0;
  double mean_iou = 0.0;
  double mean_accuracy = 0.0;
};

struct EvalError {
  std::string id;
  std::string message;
};

struct EvalReport {
  std::vector<ImageScore> per_image;
  GroupStats filled;
  GroupStats empty;
  GroupStats overall;
  std::vector<EvalError> errors;

  bool ok() const { return errors.empty(); }
};

/// Supplies the mask for a manifest entry, or nothing when it cannot be
/// loaded; evaluate_dataset turns that into an itemized per-entry error.
using MaskSource = std::function<std::optional<WallMask>(const ManifestEntry&)>;

namespace detail {

using Rat = boost::multiprecision::cpp_rational;

struct GroupAccum {
  Rat dice_sum = 0;
  Rat iou_sum = 0;
  Rat acc_sum = 0;
  std::size_t n = 0;

  void add(const MaskCounts& c) {
    std::int64_t size_sum = c.pred_fg + c.truth_fg;
    std::int64_t uni = size_sum - c.intersection;
    dice_sum += size_sum == 0 ? Rat(1) : Rat(2 * c.intersection, size_sum);
    iou_sum += uni == 0 ? Rat(1) : Rat(c.intersection, uni);
    acc_sum += Rat(c.matching, c.total);
    ++n;
  }

  GroupStats stats() const {
    GroupStats g;
    g.count = n;
    if (n > 0) {
      Rat k(static_cast<std::int64_t>(n));
      g.mean_dice = static_cast<double>(dice_sum / k);
      g.mean_iou = static_cast<double>(iou_sum / k);
      g.mean_accuracy = static_cast<double>(acc_sum / k);
    }
    return g;
  }
};

}  // namespace detail

/// Scores every manifest entry, grouping means by wall type. Entries whose
/// prediction or ground truth cannot be loaded (or whose dimensions
/// disagree) are recorded in `errors` and excluded from all means; group
/// means are computed in exact rational arithmetic and converted to double
/// once. Accuracy aggregation is the per-image mean, not a pooled pixel
/// count; the serialized report says so in its metadata.
inline EvalReport evaluate_dataset(const DatasetManifest& manifest, const MaskSource& predictions,
                                   const MaskSource& ground_truth) {
  EvalReport report;
  detail::GroupAccum filled, empty, overall;

  for (const auto& entry : manifest.entries) {
    std::optional<WallMask> truth = ground_truth(entry);
    if (!truth) {
      report.errors.push_back({entry.id, "ground-truth mask unavailable"});
      continue;
    }
    std::optional<WallMask> pred = predictions(entry);
    if (!pred) {
      report.errors.push_back({entry.id, "prediction unavailable"});
      continue;
    }
    if (pred->width() != truth->width() || pred->height() != truth->height()) {
      report.errors.push_back({entry.id, "prediction and ground truth dimensions differ"});
      continue;
    }

    ImageScore score;
    score.id = entry.id;
    score.wall_type = entry.wall_type;
    score.counts = count_masks(*pred, *truth);

    const MaskCounts& c = score.counts;
    std::int64_t size_sum = c.pred_fg + c.truth_fg;
    std::int64_t uni = size_sum - c.intersection;
    score.dice = size_sum == 0 ? 1.0
                               : 2.0 * static_cast<double>(c.intersection) /
                                     static_cast<double>(size_sum);
    score.iou = uni == 0 ? 1.0
                         : static_cast<double>(c.intersection) / static_cast<double>(uni);
    score.accuracy = static_cast<double>(c.matching) / static_cast<double>(c.total);

    (entry.wall_type == WallType::kFilled ? filled : empty).add(c);
    overall.add(c);
    report.per_image.push_back(std::move(score));
  }

  report.filled = filled.stats();
  report.empty = empty.stats();
  report.overall = overall.stats();
  return report;
}

inline nlohmann::json group_to_json(const GroupStats& g) {
  nlohmann::json j;
  j["count"] = g.count;
  if (g.count > 0) {
    j["mean_dice"] = g.mean_dice;
    j["mean_iou"] = g.mean_iou;
    j["mean_accuracy"] = g.mean_accuracy;
  } else {
    j["mean_dice"] = nullptr;
    j["mean_iou"] = nullptr;
    j["mean_accuracy"] = nullptr;
  }
  return j;
}

/// Serializes a report. Values are raw ratios in [0, 1]; render percents
/// at presentation time only.
inline nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["metadata"] = {
      {"accuracy_aggregation", "per-image mean"},
      {"entries_evaluated", report.per_image.size()},
      {"entries_failed", report.errors.size()},
  };
  j["per_image"] = nlohmann::json::array();
  for (const auto& s : report.per_image) {
    j["per_image"].push_back({
        {"id", s.id},
        {"wall_type", to_string(s.wall_type)},
        {"dice", s.dice},
        {"iou", s.iou},
        {"accuracy", s.accuracy},
        {"pred_fg", s.counts.pred_fg},
        {"truth_fg", s.counts.truth_fg},
        {"intersection", s.counts.intersection},
        {"matching", s.counts.matching},
        {"total", s.counts.total},
    });
  }
  j["groups"] = {{"filled", group_to_json(report.filled)},
                 {"empty", group_to_json(report.empty)}};
  j["overall"] = group_to_json(report.overall);
  j["errors"] = nlohmann::json::array();
  for (const auto& e : report.errors) {
    j["errors"].push_back({{"id", e.id}, {"message", e.message}});
  }
  return j;
}

}  // namespace wallgen
