#include "featiso/ablation.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace featiso {

namespace {

constexpr std::array<std::string_view, 7> kNames = {
    "original", "color_only", "shape_only", "texture_only", "texture_shape", "texture_color",
    "shape_color"};
constexpr std::array<std::string_view, 7> kCodes = {"TSC", "C", "S", "T", "TS", "TC", "SC"};

Eigen::ArrayXd gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  Eigen::ArrayXd w(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) w[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
  return w / w.sum();
}

// Separable convolution with clamp-to-edge borders.
Plane<double> gaussian_blur(const Plane<double>& src, double sigma) {
  const Eigen::ArrayXd w = gaussian_kernel(sigma);
  const auto radius = (w.size() - 1) / 2;
  const auto rows = src.rows();
  const auto cols = src.cols();
  auto clampi = [](Eigen::Index i, Eigen::Index n) { return std::clamp<Eigen::Index>(i, 0, n - 1); };

  Plane<double> tmp(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (Eigen::Index k = -radius; k <= radius; ++k) acc += w[k + radius] * src(r, clampi(c + k, cols));
      tmp(r, c) = acc;
    }
  }
  Plane<double> out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (Eigen::Index k = -radius; k <= radius; ++k) acc += w[k + radius] * tmp(clampi(r + k, rows), c);
      out(r, c) = acc;
    }
  }
  return out;
}

Image permute_pixels(const Image& img, const std::vector<Eigen::Index>& positions,
                     Planes<double> out, RngStream& rng) {
  std::vector<Eigen::Index> shuffled = positions;
  rng.shuffle(std::span<Eigen::Index>(shuffled));
  const auto cols = img.cols();
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const auto dst = positions[i];
    const auto src = shuffled[i];
    for (int c = 0; c < 3; ++c) out[c](dst / cols, dst % cols) = img.at(src / cols, src % cols, c);
  }
  return Image::from_planes(std::move(out));
}

}  // namespace

std::string_view to_string(AblationKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

std::optional<AblationKind> parse_ablation(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (name == kNames[i] || name == kCodes[i]) return static_cast<AblationKind>(i);
  }
  return std::nullopt;
}

bool requires_mask(AblationKind kind) {
  switch (kind) {
    case AblationKind::kShapeOnly:
    case AblationKind::kTextureOnly:
    case AblationKind::kTextureColor:
    case AblationKind::kShapeColor:
      return true;
    default:
      return false;
  }
}

void SketchParams::validate() const {
  if (!(sigma > 0.0)) throw UsageError("sketch sigma must be positive");
  if (!(k > 1.0)) throw UsageError("sketch k must exceed 1");
  if (!(phi > 0.0)) throw UsageError("sketch phi must be positive");
}

Plane<double> sketch_edges(const Image& img, const SketchParams& params) {
  params.validate();
  const Plane<double> luma = luminance(img);
  const Plane<double> dog = gaussian_blur(luma, params.sigma) - gaussian_blur(luma, params.k * params.sigma);
  // Ink only on the dark side of an edge; flat regions (dog ~ 0) stay white.
  return dog.unaryExpr([&](double d) {
    return d >= -params.epsilon ? 1.0 : 1.0 + std::tanh(params.phi * (d + params.epsilon));
  });
}

Image color_only(const Image& img, RngStream& rng) {
  std::vector<Eigen::Index> all(static_cast<std::size_t>(img.pixel_count()));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  return permute_pixels(img, all, img.planes(), rng);
}

Image sketch(const Image& img, const SketchParams& params, const Rgb& shade) {
  const Plane<double> edges = sketch_edges(img, params);
  Planes<double> out;
  for (int c = 0; c < 3; ++c) out[c] = edges * shade[c];
  return Image::clamped(std::move(out));
}

Image shape_only(const Mask& mask, const Rgb& shade, double contrast) {
  if (!mask.has_both_classes()) throw DataError("shape_only needs a mask with lesion and background");
  const Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> tone =
      mask.data().cast<double>() * (1.0 - contrast) + contrast;
  Planes<double> out;
  for (int c = 0; c < 3; ++c) out[c] = tone * shade[c];
  return Image::clamped(std::move(out));
}

std::vector<PatchDraw> plan_patch_assembly(const PatchGrid& grid, RngStream& rng) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> lesion, background;
  for (Eigen::Index r = 0; r < grid.rows; ++r) {
    for (Eigen::Index c = 0; c < grid.cols; ++c) {
      if (grid.at(r, c) == PatchClass::kLesion) lesion.emplace_back(r, c);
      if (grid.at(r, c) == PatchClass::kBackground) background.emplace_back(r, c);
    }
  }
  if (lesion.empty() || background.empty()) {
    throw DataError("patch size " + std::to_string(grid.patch_size) +
                    " leaves no " + (lesion.empty() ? "lesion" : "background") +
                    " patches after removing boundary patches");
  }
  std::vector<PatchDraw> plan;
  plan.reserve(static_cast<std::size_t>(grid.size()));
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const bool from_lesion = i % 2 == 0;
    const auto& pool = from_lesion ? lesion : background;
    const auto& [r, c] = pool[rng.below(pool.size())];
    plan.push_back({from_lesion ? PatchClass::kLesion : PatchClass::kBackground, r, c});
  }
  return plan;
}

Image assemble_patches(const Image& img, const PatchGrid& grid, const std::vector<PatchDraw>& plan) {
  if (static_cast<Eigen::Index>(plan.size()) != grid.size()) {
    throw InvariantError("patch plan does not cover the grid");
  }
  const Eigen::Index p = grid.patch_size;
  Planes<double> out;
  for (auto& ch : out) ch.resize(grid.rows * p, grid.cols * p);
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const auto dr = (i / grid.cols) * p;
    const auto dc = (i % grid.cols) * p;
    const auto& d = plan[static_cast<std::size_t>(i)];
    for (int c = 0; c < 3; ++c) {
      out[c].block(dr, dc, p, p) = img.channel(c).block(d.source_row * p, d.source_col * p, p, p);
    }
  }
  return Image::from_planes(std::move(out));
}

Image texture_color(const Image& img, const Mask& mask, int patch_size, RngStream& rng) {
  require_same_size(img, mask);
  const PatchGrid grid = classify_patches(mask, patch_size);
  return assemble_patches(img, grid, plan_patch_assembly(grid, rng));
}

Image texture_only(const Image& img, const Mask& mask, const SketchParams& params, const Rgb& shade,
                   int patch_size, RngStream& rng) {
  require_same_size(img, mask);
  return texture_color(sketch(img, params, shade), mask, patch_size, rng);
}

Image shape_color(const Image& img, const Mask& mask, RngStream& rng) {
  require_same_size(img, mask);
  std::vector<Eigen::Index> lesion, background;
  for (Eigen::Index i = 0; i < img.pixel_count(); ++i) {
    (mask.lesion(i / img.cols(), i % img.cols()) ? lesion : background).push_back(i);
  }
  RngStream lesion_rng = rng.derive("lesion");
  RngStream background_rng = rng.derive("background");
  const Image partial = permute_pixels(img, lesion, img.planes(), lesion_rng);
  return permute_pixels(img, background, partial.planes(), background_rng);
}

Image apply_ablation(AblationKind kind, const Image& img, const std::optional<Mask>& mask,
                     const AblationConfig& cfg, RngStream& rng) {
  if (requires_mask(kind) && !mask) {
    throw DataError(std::string(to_string(kind)) + " requires a segmentation mask");
  }
  const int patch = cfg.patch_size > 0 ? cfg.patch_size : default_patch_size(img.rows(), img.cols());
  switch (kind) {
    case AblationKind::kOriginal:
      return img;
    case AblationKind::kColorOnly:
      return color_only(img, rng);
    case AblationKind::kShapeOnly:
      require_same_size(img, *mask);
      return shape_only(*mask, cfg.mean_rgb, cfg.shape_contrast);
    case AblationKind::kTextureOnly:
      return texture_only(img, *mask, cfg.sketch, cfg.mean_rgb, patch, rng);
    case AblationKind::kTextureShape:
      return texture_shape(img, cfg.sketch, cfg.mean_rgb);
    case AblationKind::kTextureColor:
      return texture_color(img, *mask, patch, rng);
    case AblationKind::kShapeColor:
      return shape_color(img, *mask, rng);
  }
  throw InvariantError("unknown ablation kind");
}

}  // namespace featiso
