#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "support/synthetic.hpp"
#include "wallgen/metrics.hpp"

using namespace wallgen;

namespace {

BinaryImage from_bits(int w, int h, const std::vector<std::uint8_t>& bits) {
  return BinaryImage(w, h, bits);
}

}  // namespace

TEST_CASE("metric values on hand-checked masks") {
  // pred fg = 4, truth fg = 6, intersection = 3 over a 4x3 canvas.
  BinaryImage pred = from_bits(4, 3, {1, 1, 1, 0,  //
                                      1, 0, 0, 0,  //
                                      0, 0, 0, 0});
  BinaryImage truth = from_bits(4, 3, {1, 1, 0, 0,  //
                                       1, 1, 0, 0,  //
                                       1, 1, 0, 0});
  MaskCounts c = count_masks(pred, truth);
  CHECK(c.pred_fg == 4);
  CHECK(c.truth_fg == 6);
  CHECK(c.intersection == 3);
  CHECK(c.total == 12);
  CHECK(c.matching == 8);
  CHECK(dice(pred, truth) == 0.6);
  CHECK(dice_loss(pred, truth) == Catch::Approx(4.0 / 11.0).epsilon(1e-15));
  CHECK(iou(pred, truth) == Catch::Approx(3.0 / 7.0).epsilon(1e-15));
  CHECK(pixel_accuracy(pred, truth) == Catch::Approx(8.0 / 12.0).epsilon(1e-15));
}

TEST_CASE("identical masks score perfectly") {
  std::mt19937_64 rng(5);
  BinaryImage m = synthetic::random_binary_image(rng, 16, 16, 40);
  CHECK(dice(m, m) == 1.0);
  CHECK(dice_loss(m, m) == 0.0);
  CHECK(iou(m, m) == 1.0);
  CHECK(pixel_accuracy(m, m) == 1.0);
}

TEST_CASE("disjoint masks score zero overlap") {
  BinaryImage pred = from_bits(2, 1, {1, 0});
  BinaryImage truth = from_bits(2, 1, {0, 1});
  CHECK(dice(pred, truth) == 0.0);
  CHECK(iou(pred, truth) == 0.0);
  CHECK(pixel_accuracy(pred, truth) == 0.0);
  CHECK(dice_loss(pred, truth) == Catch::Approx(1.0 - 1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("empty-vs-empty follows the stated conventions") {
  BinaryImage a(5, 4), b(5, 4);
  CHECK(dice(a, b) == 1.0);
  CHECK(iou(a, b) == 1.0);
  CHECK(dice_loss(a, b) == 0.0);
  CHECK(pixel_accuracy(a, b) == 1.0);
}

TEST_CASE("count_masks rejects mismatched dimensions") {
  BinaryImage a(3, 3), b(3, 4);
  REQUIRE_THROWS_AS(count_masks(a, b), std::invalid_argument);
  REQUIRE_THROWS_AS(dice(a, b), std::invalid_argument);
}

TEST_CASE("metrics agree with rational arithmetic") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    BinaryImage truth = synthetic::random_binary_image(rng, 24, 24, 35);
    BinaryImage pred(truth.width(), truth.height());
    // Perturb the truth to get a correlated prediction.
    for (int y = 0; y < truth.height(); ++y) {
      for (int x = 0; x < truth.width(); ++x) {
        bool v = truth.at(x, y);
        if (rng() % 8 == 0) v = !v;
        pred.set(x, y, v);
      }
    }
    oracles::RationalMetrics ref = oracles::metrics_bruteforce(pred, truth);
    CHECK(std::abs(dice(pred, truth) - oracles::to_double(ref.dice)) <= 1e-12);
    CHECK(std::abs(dice_loss(pred, truth) - oracles::to_double(ref.dice_loss)) <= 1e-12);
    CHECK(std::abs(iou(pred, truth) - oracles::to_double(ref.iou)) <= 1e-12);
    CHECK(std::abs(pixel_accuracy(pred, truth) - oracles::to_double(ref.accuracy)) <= 1e-12);

    // Order and range invariants.
    CHECK(iou(pred, truth) <= dice(pred, truth) + 1e-15);
    CHECK(dice(pred, truth) >= 0.0);
    CHECK(dice(pred, truth) <= 1.0);

    // Symmetry of the overlap measures.
    CHECK(dice(truth, pred) == dice(pred, truth));
    CHECK(iou(truth, pred) == iou(pred, truth));
    CHECK(pixel_accuracy(truth, pred) == pixel_accuracy(pred, truth));
  }
}

TEST_CASE("complementing both masks preserves accuracy") {
  std::mt19937_64 rng(99);
  BinaryImage truth = synthetic::random_binary_image(rng, 20, 20, 30);
  BinaryImage pred(truth.width(), truth.height());
  for (int y = 0; y < truth.height(); ++y)
    for (int x = 0; x < truth.width(); ++x) pred.set(x, y, rng() % 3 == 0);
  CHECK(pixel_accuracy(pred, truth) == pixel_accuracy(invert(pred), invert(truth)));
}

namespace {

ManifestEntry make_entry(std::string id, WallType type) {
  ManifestEntry e;
  e.id = std::move(id);
  e.wall_type = type;
  e.source = SourceSet::kRFP;
  e.split = "train";
  return e;
}

}  // namespace

TEST_CASE("evaluate_dataset averages per-image scores exactly") {
  DatasetManifest manifest;
  manifest.entries.push_back(make_entry("a", WallType::kFilled));
  manifest.entries.push_back(make_entry("b", WallType::kFilled));

  BinaryImage truth(2, 1);
  truth.set(0, 0, true);

  auto ground_truth = [&](const ManifestEntry&) -> std::optional<WallMask> { return truth; };
  auto predictions = [&](const ManifestEntry& e) -> std::optional<WallMask> {
    if (e.id == "a") return truth;       // perfect: dice 1
    BinaryImage miss(2, 1);
    miss.set(1, 0, true);                // disjoint: dice 0
    return miss;
  };

  EvalReport report = evaluate_dataset(manifest, predictions, ground_truth);
  REQUIRE(report.per_image.size() == 2);
  REQUIRE(report.errors.empty());
  CHECK(report.ok());
  CHECK(report.per_image[0].dice == 1.0);
  CHECK(report.per_image[1].dice == 0.0);
  CHECK(report.overall.count == 2);
  CHECK(report.overall.mean_dice == 0.5);
  CHECK(report.filled.count == 2);
  CHECK(report.empty.count == 0);
}

TEST_CASE("evaluate_dataset groups by wall type") {
  DatasetManifest manifest;
  manifest.entries.push_back(make_entry("f1", WallType::kFilled));
  manifest.entries.push_back(make_entry("e1", WallType::kEmpty));
  manifest.entries.push_back(make_entry("e2", WallType::kEmpty));

  BinaryImage truth(3, 1);
  truth.set(0, 0, true);
  truth.set(1, 0, true);

  auto ground_truth = [&](const ManifestEntry&) -> std::optional<WallMask> { return truth; };
  auto predictions = [&](const ManifestEntry& e) -> std::optional<WallMask> {
    if (e.id == "f1") return truth;
    BinaryImage partial(3, 1);
    partial.set(0, 0, true);  // dice = 2*1/(1+2) = 2/3
    return partial;
  };

  EvalReport report = evaluate_dataset(manifest, predictions, ground_truth);
  CHECK(report.filled.count == 1);
  CHECK(report.filled.mean_dice == 1.0);
  CHECK(report.empty.count == 2);
  CHECK(report.empty.mean_dice == Catch::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(report.overall.count == 3);
  // Exact rational mean: (1 + 2/3 + 2/3) / 3 = 7/9.
  CHECK(report.overall.mean_dice == Catch::Approx(7.0 / 9.0).epsilon(1e-15));
}

TEST_CASE("missing predictions are itemized and excluded from means") {
  DatasetManifest manifest;
  manifest.entries.push_back(make_entry("ok", WallType::kFilled));
  manifest.entries.push_back(make_entry("gone", WallType::kFilled));

  BinaryImage truth(2, 2);
  truth.set(0, 0, true);

  auto ground_truth = [&](const ManifestEntry&) -> std::optional<WallMask> { return truth; };
  auto predictions = [&](const ManifestEntry& e) -> std::optional<WallMask> {
    if (e.id == "gone") return std::nullopt;
    return truth;
  };

  EvalReport report = evaluate_dataset(manifest, predictions, ground_truth);
  CHECK_FALSE(report.ok());
  REQUIRE(report.errors.size() == 1);
  CHECK(report.errors[0].id == "gone");
  CHECK(report.per_image.size() == 1);
  CHECK(report.overall.count == 1);
  CHECK(report.overall.mean_dice == 1.0);
}

TEST_CASE("missing ground truth and dimension mismatches are itemized") {
  DatasetManifest manifest;
  manifest.entries.push_back(make_entry("notruth", WallType::kFilled));
  manifest.entries.push_back(make_entry("shape", WallType::kEmpty));

  auto ground_truth = [&](const ManifestEntry& e) -> std::optional<WallMask> {
    if (e.id == "notruth") return std::nullopt;
    return BinaryImage(4, 4);
  };
  auto predictions = [&](const ManifestEntry&) -> std::optional<WallMask> {
    return BinaryImage(5, 4);
  };

  EvalReport report = evaluate_dataset(manifest, predictions, ground_truth);
  CHECK_FALSE(report.ok());
  REQUIRE(report.errors.size() == 2);
  CHECK(report.errors[0].id == "notruth");
  CHECK(report.errors[1].id == "shape");
  CHECK(report.per_image.empty());
  CHECK(report.overall.count == 0);
}

TEST_CASE("report JSON carries groups, metadata, and errors") {
  DatasetManifest manifest;
  manifest.entries.push_back(make_entry("x", WallType::kFilled));
  manifest.entries.push_back(make_entry("lost", WallType::kEmpty));

  BinaryImage truth(2, 1);
  truth.set(0, 0, true);
  auto ground_truth = [&](const ManifestEntry&) -> std::optional<WallMask> { return truth; };
  auto predictions = [&](const ManifestEntry& e) -> std::optional<WallMask> {
    if (e.id == "lost") return std::nullopt;
    return truth;
  };

  EvalReport report = evaluate_dataset(manifest, predictions, ground_truth);
  nlohmann::json j = report_to_json(report);

  CHECK(j["metadata"]["accuracy_aggregation"] == "per-image mean");
  CHECK(j["metadata"]["entries_evaluated"] == 1);
  CHECK(j["metadata"]["entries_failed"] == 1);
  REQUIRE(j["per_image"].size() == 1);
  CHECK(j["per_image"][0]["id"] == "x");
  CHECK(j["per_image"][0]["wall_type"] == "filled");
  CHECK(j["per_image"][0]["dice"] == 1.0);
  CHECK(j["groups"]["filled"]["count"] == 1);
  CHECK(j["groups"]["filled"]["mean_dice"] == 1.0);
  CHECK(j["groups"]["empty"]["count"] == 0);
  CHECK(j["groups"]["empty"]["mean_dice"].is_null());
  CHECK(j["overall"]["count"] == 1);
  REQUIRE(j["errors"].size() == 1);
  CHECK(j["errors"][0]["id"] == "lost");
}
