#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "support/synthetic.hpp"
#include "wallgen/maskgen.hpp"

using namespace wallgen;

TEST_CASE("superimpose is a pixelwise AND") {
  BinaryImage a(3, 1), b(3, 1);
  a.set(0, 0, true);
  a.set(1, 0, true);
  b.set(1, 0, true);
  b.set(2, 0, true);
  WallMask m = superimpose(a, b);
  CHECK_FALSE(m.at(0, 0));
  CHECK(m.at(1, 0));
  CHECK_FALSE(m.at(2, 0));

  BinaryImage other(4, 1);
  REQUIRE_THROWS_AS(superimpose(a, other), std::invalid_argument);
}

TEST_CASE("downscale averages blocks and upscale restores dimensions") {
  PlanImage img(4, 2);
  // Left 2x2 block black, right 2x2 block white.
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 2; ++x) img.at(x, y) = Rgb{0, 0, 0};
  }
  PlanImage small = detail::downscale_plan(img, 2);
  REQUIRE(small.width() == 2);
  REQUIRE(small.height() == 1);
  CHECK(small.at(0, 0) == Rgb{0, 0, 0});
  CHECK(small.at(1, 0) == Rgb{255, 255, 255});

  WallMask mask(2, 1);
  mask.set(0, 0, true);
  WallMask up = detail::upscale_mask(mask, 2, 4, 2);
  REQUIRE(up.width() == 4);
  REQUIRE(up.height() == 2);
  CHECK(up.at(0, 0));
  CHECK(up.at(1, 1));
  CHECK_FALSE(up.at(2, 0));
  CHECK_FALSE(up.at(3, 1));
}

TEST_CASE("downscale rounds partial edge blocks") {
  PlanImage img(3, 1);
  img.at(0, 0) = Rgb{0, 0, 0};
  img.at(1, 0) = Rgb{0, 0, 0};
  img.at(2, 0) = Rgb{100, 100, 100};
  PlanImage small = detail::downscale_plan(img, 2);
  REQUIRE(small.width() == 2);
  CHECK(small.at(0, 0) == Rgb{0, 0, 0});
  CHECK(small.at(1, 0) == Rgb{100, 100, 100});  // single-pixel edge block
}

TEST_CASE("blank pages produce an empty mask and a warning") {
  PlanImage img(16, 16, Rgb{255, 255, 255});
  MaskGenResult res = generate_wall_mask(img, PipelineConfig{});
  CHECK(res.warning == MaskGenWarning::kBlankPage);
  CHECK(res.mask.foreground_count() == 0);
  CHECK(res.mask.width() == 16);
  CHECK_FALSE(res.stages.has_value());
}

TEST_CASE("blank tinted pages warn too") {
  PlanImage img(8, 8, Rgb{240, 235, 230});
  MaskGenResult res = generate_wall_mask(img, PipelineConfig{}, true);
  CHECK(res.warning == MaskGenWarning::kBlankPage);
  REQUIRE(res.stages.has_value());
  CHECK_FALSE(res.stages->summary.has_value());
  CHECK(res.stages->fh == 0);
}

TEST_CASE("generate_wall_mask validates its config") {
  PlanImage img(8, 8);
  PipelineConfig bad;
  bad.connectivity = 5;
  REQUIRE_THROWS_AS(generate_wall_mask(img, bad), std::invalid_argument);
}

TEST_CASE("filled synthetic plans yield masks inside the drawn ink") {
  synthetic::Plan plan = synthetic::make_filled_plan(42);
  MaskGenResult res = generate_wall_mask(plan.image, PipelineConfig{}, true);
  CHECK(res.warning == MaskGenWarning::kNone);
  REQUIRE(res.stages.has_value());
  CHECK(res.mask.foreground_count() > 0);

  // Superimposition keeps the mask inside the binarized ink.
  const auto& binary = res.stages->binary;
  for (int y = 0; y < res.mask.height(); ++y) {
    for (int x = 0; x < res.mask.width(); ++x) {
      if (res.mask.at(x, y)) {
        REQUIRE(binary.at(x, y));
      }
    }
  }

  // Stage chain consistency.
  CHECK(res.stages->alcm.width() == plan.image.width());
  CHECK(res.stages->fh >= 3);
  CHECK(res.stages->bank.specs.size() == 11);
  CHECK(res.stages->summary.has_value());
}

TEST_CASE("mask generation is deterministic") {
  synthetic::Plan plan = synthetic::make_filled_plan(7);
  PipelineConfig cfg;
  cfg.rng_seed = 123;
  MaskGenResult a = generate_wall_mask(plan.image, cfg);
  MaskGenResult b = generate_wall_mask(plan.image, cfg);
  CHECK(a.mask == b.mask);
  CHECK(a.warning == b.warning);
}

TEST_CASE("stage artifacts are only retained on request") {
  synthetic::Plan plan = synthetic::make_filled_plan(9);
  MaskGenResult without = generate_wall_mask(plan.image, PipelineConfig{}, false);
  CHECK_FALSE(without.stages.has_value());
  MaskGenResult with = generate_wall_mask(plan.image, PipelineConfig{}, true);
  REQUIRE(with.stages.has_value());
  CHECK(with.mask == without.mask);
}

TEST_CASE("fh override feeds the filter bank directly") {
  synthetic::Plan plan = synthetic::make_filled_plan(11);
  PipelineConfig cfg;
  cfg.fh_override = 5;
  MaskGenResult res = generate_wall_mask(plan.image, cfg, true);
  REQUIRE(res.stages.has_value());
  CHECK(res.stages->fh == 5);
  for (const auto& s : res.stages->bank.specs) {
    CHECK(s.fh == 5);
    CHECK(s.fw == 10);
  }
}

TEST_CASE("downscale returns a mask at the input resolution") {
  synthetic::Plan plan = synthetic::make_filled_plan(13);
  PipelineConfig cfg;
  cfg.downscale = 2;
  MaskGenResult res = generate_wall_mask(plan.image, cfg);
  CHECK(res.mask.width() == plan.image.width());
  CHECK(res.mask.height() == plan.image.height());
  CHECK(res.mask.foreground_count() > 0);
}
