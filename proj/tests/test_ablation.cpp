#include <doctest.h>

#include <map>
#include <set>

#include "featiso/ablation.hpp"
#include "support.hpp"

using namespace featiso;

namespace {

// Direct 2-D Gaussian sum with clamped borders; no separability assumed.
Plane<double> blur_oracle(const Plane<double>& src, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  double norm = 0;
  for (int i = -radius; i <= radius; ++i) {
    for (int j = -radius; j <= radius; ++j) norm += std::exp(-0.5 * (i * i + j * j) / (sigma * sigma));
  }
  Plane<double> out(src.rows(), src.cols());
  for (Eigen::Index r = 0; r < src.rows(); ++r) {
    for (Eigen::Index c = 0; c < src.cols(); ++c) {
      double acc = 0;
      for (int i = -radius; i <= radius; ++i) {
        for (int j = -radius; j <= radius; ++j) {
          const auto rr = std::clamp<Eigen::Index>(r + i, 0, src.rows() - 1);
          const auto cc = std::clamp<Eigen::Index>(c + j, 0, src.cols() - 1);
          acc += std::exp(-0.5 * (i * i + j * j) / (sigma * sigma)) * src(rr, cc);
        }
      }
      out(r, c) = acc / norm;
    }
  }
  return out;
}

std::vector<std::vector<double>> patch_list(const Image& img, int p, const PatchGrid* grid, bool non_boundary) {
  std::vector<std::vector<double>> out;
  for (Eigen::Index pr = 0; pr < img.rows() / p; ++pr) {
    for (Eigen::Index pc = 0; pc < img.cols() / p; ++pc) {
      if (grid && non_boundary && grid->at(pr, pc) == PatchClass::kBoundary) continue;
      if (grid && !non_boundary && grid->at(pr, pc) != PatchClass::kBoundary) continue;
      std::vector<double> v;
      for (int ch = 0; ch < 3; ++ch) {
        for (int r = 0; r < p; ++r) {
          for (int c = 0; c < p; ++c) v.push_back(img.at(pr * p + r, pc * p + c, ch));
        }
      }
      out.push_back(std::move(v));
    }
  }
  return out;
}

void check_channel_constant(const Image& out, const Rgb& shade) {
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      const double ratio = out.at(r, c, 0) / shade[0];
      REQUIRE(out.at(r, c, 1) / shade[1] == doctest::Approx(ratio).epsilon(1e-12));
      REQUIRE(out.at(r, c, 2) / shade[2] == doctest::Approx(ratio).epsilon(1e-12));
    }
  }
}

const Rgb kShade(0.7, 0.55, 0.4);

}  // namespace

TEST_CASE("ablation names") {
  CHECK(kAllAblations.size() == 7);
  for (const auto k : kAllAblations) CHECK(parse_ablation(to_string(k)) == k);
  CHECK(parse_ablation("TSC") == AblationKind::kOriginal);
  CHECK(parse_ablation("SC") == AblationKind::kShapeColor);
  CHECK_FALSE(parse_ablation("TCS").has_value());
  CHECK(requires_mask(AblationKind::kShapeOnly));
  CHECK_FALSE(requires_mask(AblationKind::kTextureShape));
}

TEST_CASE("color_only") {
  SUBCASE("constant image is a fixed point") {
    RngStream rng(1, "a", "c");
    const Image img = Image::filled(8, 8, kShade);
    CHECK(color_only(img, rng) == img);
  }
  SUBCASE("2x1 image lands on one of its two permutations") {
    const Image img = testing::from_function(1, 2, [](auto, auto c, int) { return c == 0 ? 0.0 : 1.0; });
    std::set<std::pair<double, double>> outcomes;
    for (std::uint64_t s = 0; s < 64; ++s) {
      RngStream rng(s, "pair", "color_only");
      const Image out = color_only(img, rng);
      outcomes.emplace(out.at(0, 0, 0), out.at(0, 1, 0));
      const ColorStats st = channel_histogram(out);
      CHECK(st.histogram[0][0] == 1);
      CHECK(st.histogram[0][255] == 1);
    }
    CHECK(outcomes == std::set<std::pair<double, double>>{{0.0, 1.0}, {1.0, 0.0}});
  }
  SUBCASE("pixels move as RGB triples") {
    std::mt19937 gen(2);
    const Image img = testing::random_image(gen, 10, 12);
    RngStream rng(4, "t", "c");
    const Image out = color_only(img, rng);
    std::multiset<std::array<double, 3>> before, after;
    for (Eigen::Index r = 0; r < 10; ++r) {
      for (Eigen::Index c = 0; c < 12; ++c) {
        before.insert({img.at(r, c, 0), img.at(r, c, 1), img.at(r, c, 2)});
        after.insert({out.at(r, c, 0), out.at(r, c, 1), out.at(r, c, 2)});
      }
    }
    CHECK(before == after);
    CHECK_FALSE(out == img);
  }
}

TEST_CASE("sketch") {
  const SketchParams params;
  SUBCASE("constant image shades to the mean colour") {
    const Image out = sketch(Image::filled(12, 12, Rgb(0.3, 0.9, 0.1)), params, kShade);
    CHECK(out == Image::filled(12, 12, kShade));
  }
  SUBCASE("vertical step edge matches the brute-force DoG") {
    const int step = 10;
    const Image img = testing::from_function(16, 20, [&](auto, auto c, int) { return c < step ? 0.2 : 0.8; });
    const Plane<double> edges = sketch_edges(img, params);

    const Plane<double> luma = 0.299 * img.channel(0) + 0.587 * img.channel(1) + 0.114 * img.channel(2);
    const Plane<double> dog = blur_oracle(luma, params.sigma) - blur_oracle(luma, params.k * params.sigma);
    std::set<Eigen::Index> inked;
    for (Eigen::Index r = 0; r < 16; ++r) {
      for (Eigen::Index c = 0; c < 20; ++c) {
        const double d = dog(r, c);
        const double e = d >= -params.epsilon ? 1.0 : 1.0 + std::tanh(params.phi * (d + params.epsilon));
        REQUIRE(edges(r, c) == doctest::Approx(e).epsilon(1e-12));
        if (edges(r, c) < 1.0) inked.insert(c);
      }
    }
    // Ink forms a contiguous band on the dark side of the step.
    REQUIRE_FALSE(inked.empty());
    CHECK(*inked.rbegin() == step - 1);
    CHECK(*inked.rbegin() - *inked.begin() + 1 == static_cast<Eigen::Index>(inked.size()));
    CHECK(*inked.begin() >= step - static_cast<int>(std::ceil(3.0 * params.k * params.sigma)));
  }
  SUBCASE("output is a channel-constant shade") {
    std::mt19937 gen(8);
    const Image out = sketch(testing::random_image(gen, 16, 16), params, kShade);
    check_channel_constant(out, kShade);
  }
  SUBCASE("texture_shape aliases sketch") {
    std::mt19937 gen(9);
    const Image img = testing::random_image(gen, 12, 15);
    CHECK(texture_shape(img, params, kShade) == sketch(img, params, kShade));
  }
  SUBCASE("parameter validation") {
    CHECK_THROWS_AS(sketch(Image::filled(8, 8, kShade), SketchParams{.sigma = 0.0}, kShade), UsageError);
    CHECK_THROWS_AS(sketch(Image::filled(8, 8, kShade), SketchParams{.k = 1.0}, kShade), UsageError);
    CHECK_THROWS_AS(sketch(Image::filled(8, 8, kShade), SketchParams{.phi = -1.0}, kShade), UsageError);
  }
}

TEST_CASE("shape_only") {
  using Bools = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  CHECK_THROWS_AS(shape_only(Mask::from_bool(Bools::Constant(8, 8, true)), kShade), DataError);
  CHECK_THROWS_AS(shape_only(Mask::from_bool(Bools::Constant(8, 8, false)), kShade), DataError);

  const Mask disk = testing::disk_mask(24, 24, 12, 12, 7);
  const Image out = shape_only(disk, kShade);
  std::map<std::array<double, 3>, Eigen::Index> tones;
  for (Eigen::Index r = 0; r < 24; ++r) {
    for (Eigen::Index c = 0; c < 24; ++c) ++tones[{out.at(r, c, 0), out.at(r, c, 1), out.at(r, c, 2)}];
  }
  CHECK(tones.size() == 2);
  CHECK(tones[{kShade[0], kShade[1], kShade[2]}] == disk.lesion_count());
  CHECK(tones[{0.25 * kShade[0], 0.25 * kShade[1], 0.25 * kShade[2]}] == 24 * 24 - disk.lesion_count());
}

TEST_CASE("texture_color") {
  SUBCASE("two flat regions give an alternating checker") {
    const Rgb lesion(0.2, 0.1, 0.05), background(0.9, 0.8, 0.7);
    const Mask mask = testing::disk_mask(24, 24, 12, 12, 8);
    const Image img = testing::from_function(
        24, 24, [&](auto r, auto c, int ch) { return mask.lesion(r, c) ? lesion[ch] : background[ch]; });
    RngStream rng(3, "flat", "tc");
    const Image out = texture_color(img, mask, 3, rng);
    REQUIRE(out.rows() == 24);
    for (Eigen::Index i = 0; i < 64; ++i) {
      const auto pr = i / 8;
      const auto pc = i % 8;
      const Rgb expect = i % 2 == 0 ? lesion : background;
      for (int ch = 0; ch < 3; ++ch) {
        CHECK((out.channel(ch).block(pr * 3, pc * 3, 3, 3) == expect[ch]).all());
      }
    }
  }
  SUBCASE("patches come verbatim from non-boundary source patches") {
    std::mt19937 gen(21);
    const Image img = testing::random_image(gen, 26, 31);
    const Mask mask = testing::disk_mask(26, 31, 13, 15, 9);
    const PatchGrid grid = classify_patches(mask, 4);
    RngStream rng(5, "verbatim", "tc");
    const Image out = texture_color(img, mask, 4, rng);
    CHECK(out.rows() == 24);
    CHECK(out.cols() == 28);
    const auto allowed = patch_list(img, 4, &grid, true);
    const auto boundary = patch_list(img, 4, &grid, false);
    for (const auto& p : patch_list(out, 4, nullptr, true)) {
      CHECK(std::find(allowed.begin(), allowed.end(), p) != allowed.end());
      CHECK(std::find(boundary.begin(), boundary.end(), p) == boundary.end());
    }
  }
  SUBCASE("lesion share depends only on the patch count") {
    for (const double radius : {5.0, 8.0, 11.0}) {
      const Mask mask = testing::disk_mask(30, 30, 15, 15, radius);
      const PatchGrid grid = classify_patches(mask, 3);
      RngStream rng(6, "share", "tc");
      const auto plan = plan_patch_assembly(grid, rng);
      const auto lesion = std::count_if(plan.begin(), plan.end(), [](const PatchDraw& d) { return d.pool == PatchClass::kLesion; });
      CHECK(lesion == (grid.size() + 1) / 2);
      for (const auto& d : plan) CHECK(grid.at(d.source_row, d.source_col) == d.pool);
    }
  }
  SUBCASE("an empty pool is an error") {
    std::mt19937 gen(1);
    const Mask tiny = testing::disk_mask(16, 16, 8, 8, 1.2);
    RngStream rng(1, "e", "tc");
    CHECK_THROWS_AS(texture_color(testing::random_image(gen, 16, 16), tiny, 4, rng), DataError);
  }
}

TEST_CASE("texture_only") {
  const SketchParams params;
  const Mask mask = testing::disk_mask(28, 28, 14, 14, 9);
  SUBCASE("constant image gives a uniform shade") {
    RngStream rng(1, "c", "to");
    const Image out = texture_only(Image::filled(28, 28, Rgb(0.4, 0.4, 0.2)), mask, params, kShade, 4, rng);
    CHECK(out == Image::filled(28, 28, kShade));
  }
  SUBCASE("channel-constant patches drawn from the sketch") {
    std::mt19937 gen(4);
    const Image img = testing::random_image(gen, 28, 28);
    RngStream rng(2, "s", "to");
    const Image out = texture_only(img, mask, params, kShade, 4, rng);
    check_channel_constant(out, kShade);
    const PatchGrid grid = classify_patches(mask, 4);
    const auto allowed = patch_list(sketch(img, params, kShade), 4, &grid, true);
    for (const auto& p : patch_list(out, 4, nullptr, true)) {
      CHECK(std::find(allowed.begin(), allowed.end(), p) != allowed.end());
    }
  }
}

TEST_CASE("shape_color") {
  SUBCASE("constant image is a fixed point") {
    RngStream rng(1, "c", "sc");
    const Image img = Image::filled(9, 9, kShade);
    CHECK(shape_color(img, testing::disk_mask(9, 9, 4.5, 4.5, 3), rng) == img);
  }
  SUBCASE("3x1 image with mask [1,1,0] keeps the background pixel") {
    const Image img = testing::from_function(1, 3, [](auto, auto c, int ch) { return 0.1 * (c + 1) + 0.01 * ch; });
    using Bools = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Bools b(1, 3);
    b << true, true, false;
    const Mask mask = Mask::from_bool(b);
    std::set<std::pair<double, double>> lesion_orders;
    for (std::uint64_t s = 0; s < 64; ++s) {
      RngStream rng(s, "three", "sc");
      const Image out = shape_color(img, mask, rng);
      CHECK(out.at(0, 2, 0) == img.at(0, 2, 0));
      lesion_orders.emplace(out.at(0, 0, 0), out.at(0, 1, 0));
    }
    const double a = img.at(0, 0, 0), b0 = img.at(0, 1, 0);
    CHECK(lesion_orders == std::set<std::pair<double, double>>{{a, b0}, {b0, a}});
  }
  SUBCASE("region histograms are conserved") {
    std::mt19937 gen(7);
    const Image img = testing::random_image(gen, 20, 17, true);
    const Mask mask = testing::disk_mask(20, 17, 9, 8, 6);
    RngStream rng(3, "r", "sc");
    const Image out = shape_color(img, mask, rng);
    CHECK(region_histogram(out, mask, true).histogram == region_histogram(img, mask, true).histogram);
    CHECK(region_histogram(out, mask, false).histogram == region_histogram(img, mask, false).histogram);
    CHECK_FALSE(out == img);
  }
}

TEST_CASE("apply_ablation dispatch") {
  std::mt19937 gen(12);
  const Image img = testing::random_image(gen, 28, 28);
  const Mask mask = testing::disk_mask(28, 28, 14, 14, 8);
  AblationConfig cfg;
  cfg.mean_rgb = kShade;

  RngStream r0(1, "x", "o");
  CHECK(apply_ablation(AblationKind::kOriginal, img, std::nullopt, cfg, r0) == img);
  RngStream r1(1, "x", "c"), r2(1, "x", "c");
  CHECK(apply_ablation(AblationKind::kColorOnly, img, std::nullopt, cfg, r1) == color_only(img, r2));
  for (const auto kind : kAllAblations) {
    RngStream rng(1, "x", "k");
    if (requires_mask(kind)) {
      CHECK_THROWS_AS(apply_ablation(kind, img, std::nullopt, cfg, rng), DataError);
    } else {
      CHECK_NOTHROW(apply_ablation(kind, img, std::nullopt, cfg, rng));
    }
  }
  // patch_size 0 picks the default: 28 / 14 = 2.
  RngStream r3(2, "x", "t"), r4(2, "x", "t");
  CHECK(apply_ablation(AblationKind::kTextureColor, img, mask, cfg, r3) == texture_color(img, mask, 2, r4));
  RngStream r5(2, "x", "s");
  CHECK(apply_ablation(AblationKind::kShapeOnly, img, mask, cfg, r5) == shape_only(mask, kShade));
}

TEST_CASE("ablations are pure functions of their stream") {
  std::mt19937 gen(13);
  const Image img = testing::random_image(gen, 24, 24);
  const Mask mask = testing::disk_mask(24, 24, 12, 12, 7);
  AblationConfig cfg;
  for (const auto kind : kAllAblations) {
    RngStream a(77, "same", "op"), b(77, "same", "op");
    CHECK(apply_ablation(kind, img, mask, cfg, a) == apply_ablation(kind, img, mask, cfg, b));
  }
}
