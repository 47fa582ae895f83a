#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "support/oracles.hpp"
#include "support/synthetic.hpp"
#include "wallgen/components.hpp"

using namespace wallgen;

TEST_CASE("rational arithmetic reduces and compares exactly") {
  CHECK(Rational(6, 4) == Rational(3, 2));
  CHECK(Rational(1, -2) == Rational(-1, 2));
  CHECK(Rational(1, 2) + Rational(1, 3) == Rational(5, 6));
  REQUIRE_THROWS_AS(Rational(1, 0), std::invalid_argument);

  // area < eca is exact: 3 < 7/2 but 4 >= 7/2.
  CHECK(std::int64_t{3} < Rational(7, 2));
  CHECK(std::int64_t{4} >= Rational(7, 2));
  CHECK(Rational(7, 2).value() == 3.5);
}

TEST_CASE("labeling matches the flood-fill oracle") {
  std::mt19937_64 rng(906);
  for (int trial = 0; trial < 60; ++trial) {
    const int connectivity = trial % 2 == 0 ? 8 : 4;
    BinaryImage img = synthetic::random_binary_image(rng, 32, 32, 35);
    ComponentLabeling got = label_components(img, connectivity);
    std::vector<std::int32_t> expected = oracles::label_bruteforce(img, connectivity);
    REQUIRE(got.labels == expected);
  }
}

TEST_CASE("labeling areas and boxes are consistent with the label raster") {
  std::mt19937_64 rng(907);
  for (int trial = 0; trial < 20; ++trial) {
    BinaryImage img = synthetic::random_binary_image(rng, 40, 40, 45);
    ComponentLabeling lab = label_components(img, 8);

    std::vector<std::int64_t> areas(lab.count(), 0);
    std::vector<BoundingBox> boxes(lab.count());
    for (auto& b : boxes) b = BoundingBox{1 << 30, 1 << 30, -1, -1};
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        std::int32_t l = lab.label_at(x, y);
        CHECK((l == 0) == !img.at(x, y));
        if (l == 0) continue;
        auto i = static_cast<std::size_t>(l - 1);
        ++areas[i];
        boxes[i].min_x = std::min(boxes[i].min_x, x);
        boxes[i].min_y = std::min(boxes[i].min_y, y);
        boxes[i].max_x = std::max(boxes[i].max_x, x);
        boxes[i].max_y = std::max(boxes[i].max_y, y);
      }
    }
    REQUIRE(lab.areas == areas);
    REQUIRE(lab.boxes == boxes);
  }
}

TEST_CASE("labels are numbered in first-encounter raster order") {
  // Two components; the one whose first pixel appears earlier in raster
  // order gets label 1.
  BinaryImage img(5, 3);
  img.set(4, 0, true);  // first in raster order
  img.set(0, 2, true);
  img.set(1, 2, true);
  ComponentLabeling lab = label_components(img, 8);
  REQUIRE(lab.count() == 2);
  CHECK(lab.label_at(4, 0) == 1);
  CHECK(lab.label_at(0, 2) == 2);
  CHECK(lab.areas[0] == 1);
  CHECK(lab.areas[1] == 2);
}

TEST_CASE("connectivity controls diagonal merging") {
  BinaryImage img(2, 2);
  img.set(0, 0, true);
  img.set(1, 1, true);
  CHECK(label_components(img, 8).count() == 1);
  CHECK(label_components(img, 4).count() == 2);
  REQUIRE_THROWS_AS(label_components(img, 6), std::invalid_argument);
}

TEST_CASE("summarize computes MDA, AVA and ECA exactly") {
  // Areas {2, 4, 9}: median 4, mean 5, ECA 9.
  BinaryImage img(20, 5);
  for (int x = 0; x < 2; ++x) img.set(x, 0, true);
  for (int x = 4; x < 8; ++x) img.set(x, 0, true);
  for (int x = 10; x < 19; ++x) img.set(x, 0, true);
  ComponentLabeling lab = label_components(img, 8);
  REQUIRE(lab.count() == 3);
  ComponentSummary s = summarize(lab);
  CHECK(s.mda == Rational(4));
  CHECK(s.ava == Rational(5));
  CHECK(s.eca == Rational(9));
}

TEST_CASE("summarize interpolates the median for even component counts") {
  // Areas {1, 2}: median 3/2, mean 3/2, ECA 3.
  BinaryImage img(6, 1);
  img.set(0, 0, true);
  img.set(2, 0, true);
  img.set(3, 0, true);
  ComponentSummary s = summarize(label_components(img, 8));
  CHECK(s.mda == Rational(3, 2));
  CHECK(s.ava == Rational(3, 2));
  CHECK(s.eca == Rational(3));
}

TEST_CASE("summarize rejects empty labelings") {
  BinaryImage img(4, 4);
  ComponentLabeling lab = label_components(img, 8);
  CHECK(lab.count() == 0);
  REQUIRE_THROWS_AS(summarize(lab), std::invalid_argument);
}

TEST_CASE("filter_components keeps exactly the components with area >= ECA") {
  std::mt19937_64 rng(908);
  for (int trial = 0; trial < 30; ++trial) {
    BinaryImage img = synthetic::random_binary_image(rng, 32, 32, 30);
    ComponentLabeling lab = label_components(img, 8);
    if (lab.count() == 0) continue;
    ComponentSummary s = summarize(lab);
    BinaryImage kept = filter_components(img, lab, s.eca);

    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        std::int32_t l = lab.label_at(x, y);
        bool expect = l != 0 && lab.areas[static_cast<std::size_t>(l - 1)] >= s.eca;
        CHECK(kept.at(x, y) == expect);
      }
    }
  }
}

TEST_CASE("filter_components validates dimensions") {
  BinaryImage img(4, 4);
  img.set(0, 0, true);
  ComponentLabeling lab = label_components(img, 8);
  BinaryImage other(5, 4);
  REQUIRE_THROWS_AS(filter_components(other, lab, Rational(1)), std::invalid_argument);
}

TEST_CASE("filtration overlay paints removed components distinctly") {
  // Component of area 1 (removed by ECA) and of area 4 (kept).
  BinaryImage img(8, 2);
  img.set(0, 0, true);
  for (int x = 3; x < 7; ++x) img.set(x, 0, true);
  ComponentLabeling lab = label_components(img, 8);
  ComponentSummary s = summarize(lab);  // areas {1, 4}: ECA = 5/2 + 5/2 = 5
  REQUIRE(s.eca == Rational(5));
  // With ECA 5 both components fall below the cutoff; use a lower bar to
  // exercise both overlay colors.
  PlanImage overlay = render_filtration_overlay(img, lab, Rational(2));
  CHECK(overlay.at(0, 0) == Rgb{220, 30, 30});   // removed
  CHECK(overlay.at(3, 0) == Rgb{0, 0, 0});       // kept
  CHECK(overlay.at(7, 1) == Rgb{255, 255, 255});  // background
}
