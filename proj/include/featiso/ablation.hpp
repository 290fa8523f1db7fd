#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "featiso/image.hpp"
#include "featiso/rng.hpp"

namespace featiso {

/// The seven Texture/Shape/Color combinations.
enum class AblationKind {
  kOriginal,      // TSC
  kColorOnly,     // C
  kShapeOnly,     // S
  kTextureOnly,   // T
  kTextureShape,  // TS
  kTextureColor,  // TC
  kShapeColor,    // SC
};

inline constexpr std::array<AblationKind, 7> kAllAblations = {
    AblationKind::kOriginal,     AblationKind::kColorOnly,    AblationKind::kShapeOnly,
    AblationKind::kTextureOnly,  AblationKind::kTextureShape, AblationKind::kTextureColor,
    AblationKind::kShapeColor};

std::string_view to_string(AblationKind kind);
/// Accepts snake_case names ("color_only") and the short codes ("C", "TS").
std::optional<AblationKind> parse_ablation(std::string_view name);
bool requires_mask(AblationKind kind);

/// Extended difference-of-Gaussians parameters.
struct SketchParams {
  double sigma = 1.0;
  double k = 1.6;
  double epsilon = 0.01;
  double phi = 10.0;

  /// Throws UsageError unless sigma > 0, k > 1, phi > 0.
  void validate() const;
};

struct AblationConfig {
  SketchParams sketch;
  /// 0 selects default_patch_size for each image.
  int patch_size = 0;
  /// Background tone of shape_only relative to the lesion tone.
  double shape_contrast = 0.25;
  /// Dataset-level mean colour used for shading.
  Rgb mean_rgb = Rgb::Constant(0.5);
};

/// Edge map in [0, 1] (1 = no edge) of the luminance channel.
Plane<double> sketch_edges(const Image& img, const SketchParams& params);

/// Random permutation of pixel positions; pixels move as RGB triples.
Image color_only(const Image& img, RngStream& rng);

/// Edge map replicated to three channels and multiplied by `shade`.
Image sketch(const Image& img, const SketchParams& params, const Rgb& shade);

/// Lesion pixels = shade, background = contrast * shade.
Image shape_only(const Mask& mask, const Rgb& shade, double contrast = 0.25);

/// Where an output patch of a texture assembly comes from.
struct PatchDraw {
  PatchClass pool;  // kLesion or kBackground
  Eigen::Index source_row;
  Eigen::Index source_col;
};

/// Draw plan for texture_color: output patches in raster order alternate
/// lesion, background, lesion, ... sampled with replacement from the
/// non-boundary patches of `grid`. Throws DataError when either pool is empty.
std::vector<PatchDraw> plan_patch_assembly(const PatchGrid& grid, RngStream& rng);

/// Reassembles `img` from a draw plan. Output size is the cropped grid.
Image assemble_patches(const Image& img, const PatchGrid& grid, const std::vector<PatchDraw>& plan);

Image texture_color(const Image& img, const Mask& mask, int patch_size, RngStream& rng);

Image texture_only(const Image& img, const Mask& mask, const SketchParams& params, const Rgb& shade,
                   int patch_size, RngStream& rng);

/// Permutes lesion pixels among lesion positions and background pixels among
/// background positions.
Image shape_color(const Image& img, const Mask& mask, RngStream& rng);

inline Image texture_shape(const Image& img, const SketchParams& params, const Rgb& shade) {
  return sketch(img, params, shade);
}

/// Dispatches on `kind`. Throws DataError when a mask-requiring kind gets no mask.
Image apply_ablation(AblationKind kind, const Image& img, const std::optional<Mask>& mask,
                     const AblationConfig& cfg, RngStream& rng);

}  // namespace featiso
