#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <vector>

#include "featiso/errors.hpp"

namespace featiso {

/// One row-major raster channel.
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Three aligned channels (R, G, B). Unconstrained real values; used for
/// intermediate results such as pre-clamp inverse transforms.
template <typename Scalar>
using Planes = std::array<Plane<Scalar>, 3>;

using Rgb = Eigen::Array3d;

/// Smallest side the batch transforms accept.
inline constexpr Eigen::Index kMinTransformSide = 8;

/// RGB raster with every value in [0, 1].
///
/// Immutable once built. The factories either validate (`from_planes`) or
/// clamp (`clamped`), so the range invariant holds for every instance.
template <typename Scalar>
class BasicImage {
 public:
  using PlaneType = Plane<Scalar>;
  using PlanesType = Planes<Scalar>;
  using Pixel = Eigen::Array<Scalar, 3, 1>;

  BasicImage() = default;

  /// Throws DataError on mismatched channel sizes, empty planes, or values
  /// outside [0, 1] (NaN included).
  static BasicImage from_planes(PlanesType planes) {
    check_shape(planes);
    for (const auto& p : planes) {
      if (!((p >= Scalar(0)) && (p <= Scalar(1))).all()) {
        throw DataError("image values must lie in [0, 1]");
      }
    }
    return BasicImage(std::move(planes));
  }

  /// Clamps into [0, 1]; NaN becomes 0.
  static BasicImage clamped(PlanesType planes) {
    check_shape(planes);
    for (auto& p : planes) {
      p = p.unaryExpr([](Scalar v) {
        if (!(v > Scalar(0))) return Scalar(0);
        return v > Scalar(1) ? Scalar(1) : v;
      });
    }
    return BasicImage(std::move(planes));
  }

  static BasicImage filled(Eigen::Index rows, Eigen::Index cols, const Rgb& rgb) {
    PlanesType planes;
    for (int c = 0; c < 3; ++c) planes[c] = PlaneType::Constant(rows, cols, Scalar(rgb[c]));
    return from_planes(std::move(planes));
  }

  [[nodiscard]] Eigen::Index rows() const { return planes_[0].rows(); }
  [[nodiscard]] Eigen::Index cols() const { return planes_[0].cols(); }
  [[nodiscard]] Eigen::Index pixel_count() const { return rows() * cols(); }
  [[nodiscard]] bool empty() const { return pixel_count() == 0; }

  [[nodiscard]] const PlaneType& channel(int c) const { return planes_[c]; }
  [[nodiscard]] const PlanesType& planes() const { return planes_; }

  [[nodiscard]] Scalar at(Eigen::Index r, Eigen::Index c, int ch) const { return planes_[ch](r, c); }
  [[nodiscard]] Pixel pixel(Eigen::Index r, Eigen::Index c) const {
    return Pixel(planes_[0](r, c), planes_[1](r, c), planes_[2](r, c));
  }

  bool operator==(const BasicImage& o) const {
    if (rows() != o.rows() || cols() != o.cols()) return false;
    for (int c = 0; c < 3; ++c) {
      if (!(planes_[c] == o.planes_[c]).all()) return false;
    }
    return true;
  }

 private:
  explicit BasicImage(PlanesType planes) : planes_(std::move(planes)) {}

  static void check_shape(const PlanesType& planes) {
    const auto r = planes[0].rows();
    const auto c = planes[0].cols();
    if (r == 0 || c == 0) throw DataError("image must be non-empty");
    for (const auto& p : planes) {
      if (p.rows() != r || p.cols() != c) throw DataError("image channels differ in size");
    }
  }

  PlanesType planes_;
};

using Image = BasicImage<double>;

/// Binary lesion segmentation: 1 = lesion, 0 = background.
class Mask {
 public:
  using Data = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Mask() = default;
  /// Throws DataError unless every entry is 0 or 1 and the mask is non-empty.
  explicit Mask(Data data);
  /// Builds from a predicate-like boolean array.
  static Mask from_bool(const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& lesion);

  [[nodiscard]] Eigen::Index rows() const { return data_.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return data_.cols(); }
  [[nodiscard]] bool lesion(Eigen::Index r, Eigen::Index c) const { return data_(r, c) != 0; }
  [[nodiscard]] const Data& data() const { return data_; }
  [[nodiscard]] Eigen::Index lesion_count() const;
  [[nodiscard]] bool has_both_classes() const;

  bool operator==(const Mask& o) const {
    return rows() == o.rows() && cols() == o.cols() && (data_ == o.data_).all();
  }

 private:
  Data data_;
};

enum class PatchClass : std::uint8_t { kBackground, kLesion, kBoundary };

/// Segmentation of the largest top-left region divisible by patch_size into
/// square patches. Remainder rows/cols are cropped, never padded.
struct PatchGrid {
  int patch_size = 0;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<PatchClass> labels;  // row-major, rows * cols

  [[nodiscard]] PatchClass at(Eigen::Index r, Eigen::Index c) const { return labels[r * cols + c]; }
  [[nodiscard]] Eigen::Index count(PatchClass k) const;
  [[nodiscard]] Eigen::Index size() const { return rows * cols; }
};

/// Per-channel statistics over 8-bit quantized values.
struct ColorStats {
  Rgb mean_rgb = Rgb::Zero();
  std::array<std::array<std::uint64_t, 256>, 3> histogram{};

  bool operator==(const ColorStats&) const = default;
};

/// Half-up quantization to a byte: floor(v * 255 + 0.5), after clamping.
std::uint8_t quantize(double v);

/// Round-trips every value through its 8-bit representation.
Image quantized(const Image& img);

ColorStats channel_histogram(const Image& img);

/// Histogram restricted to pixels where `mask` equals `lesion_value`.
ColorStats region_histogram(const Image& img, const Mask& mask, bool lesion_value);

/// Throws DataError when patch_size < 2 or exceeds either mask dimension.
PatchGrid classify_patches(const Mask& mask, int patch_size);

/// Default patch size: floor(min(H, W) / 14), at least 2.
int default_patch_size(Eigen::Index rows, Eigen::Index cols);

/// Throws DataError when mask and image sizes differ.
void require_same_size(const Image& img, const Mask& mask);

/// Throws DataError when either side is below kMinTransformSide.
void require_transform_size(const Image& img);

/// Rec. 601 luma.
Plane<double> luminance(const Image& img);

}  // namespace featiso
