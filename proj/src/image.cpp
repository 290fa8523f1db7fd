#include "featiso/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace featiso {

Mask::Mask(Data data) : data_(std::move(data)) {
  if (data_.size() == 0) throw DataError("mask must be non-empty");
  if (!(data_ <= std::uint8_t{1}).all()) throw DataError("mask values must be 0 or 1");
}

Mask Mask::from_bool(
    const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& lesion) {
  return Mask(lesion.cast<std::uint8_t>());
}

Eigen::Index Mask::lesion_count() const { return data_.cast<Eigen::Index>().sum(); }

bool Mask::has_both_classes() const {
  const auto n = lesion_count();
  return n > 0 && n < data_.size();
}

Eigen::Index PatchGrid::count(PatchClass k) const {
  return std::count(labels.begin(), labels.end(), k);
}

std::uint8_t quantize(double v) {
  const double clamped = std::clamp(std::isnan(v) ? 0.0 : v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::floor(clamped * 255.0 + 0.5));
}

Image quantized(const Image& img) {
  Planes<double> out = img.planes();
  for (auto& p : out) p = p.unaryExpr([](double v) { return quantize(v) / 255.0; });
  return Image::from_planes(std::move(out));
}

namespace {

template <typename Pred>
ColorStats histogram_where(const Image& img, Pred&& include) {
  ColorStats stats;
  Eigen::Index n = 0;
  Rgb sum = Rgb::Zero();
  for (Eigen::Index r = 0; r < img.rows(); ++r) {
    for (Eigen::Index c = 0; c < img.cols(); ++c) {
      if (!include(r, c)) continue;
      ++n;
      for (int ch = 0; ch < 3; ++ch) {
        const double v = img.at(r, c, ch);
        ++stats.histogram[ch][quantize(v)];
        sum[ch] += v;
      }
    }
  }
  if (n > 0) stats.mean_rgb = sum / static_cast<double>(n);
  return stats;
}

}  // namespace

ColorStats channel_histogram(const Image& img) {
  return histogram_where(img, [](Eigen::Index, Eigen::Index) { return true; });
}

ColorStats region_histogram(const Image& img, const Mask& mask, bool lesion_value) {
  require_same_size(img, mask);
  return histogram_where(
      img, [&](Eigen::Index r, Eigen::Index c) { return mask.lesion(r, c) == lesion_value; });
}

PatchGrid classify_patches(const Mask& mask, int patch_size) {
  if (patch_size < 2) throw DataError("patch_size must be at least 2");
  if (patch_size > mask.rows() || patch_size > mask.cols()) {
    throw DataError("patch_size " + std::to_string(patch_size) + " exceeds mask dimensions " +
                    std::to_string(mask.rows()) + "x" + std::to_string(mask.cols()));
  }
  PatchGrid grid;
  grid.patch_size = patch_size;
  grid.rows = mask.rows() / patch_size;
  grid.cols = mask.cols() / patch_size;
  grid.labels.reserve(static_cast<std::size_t>(grid.rows * grid.cols));
  const Eigen::Index area = Eigen::Index{patch_size} * patch_size;
  for (Eigen::Index pr = 0; pr < grid.rows; ++pr) {
    for (Eigen::Index pc = 0; pc < grid.cols; ++pc) {
      const auto lesion = mask.data()
                              .block(pr * patch_size, pc * patch_size, patch_size, patch_size)
                              .cast<Eigen::Index>()
                              .sum();
      if (lesion == 0) {
        grid.labels.push_back(PatchClass::kBackground);
      } else if (lesion == area) {
        grid.labels.push_back(PatchClass::kLesion);
      } else {
        grid.labels.push_back(PatchClass::kBoundary);
      }
    }
  }
  return grid;
}

int default_patch_size(Eigen::Index rows, Eigen::Index cols) {
  return std::max(2, static_cast<int>(std::min(rows, cols) / 14));
}

void require_same_size(const Image& img, const Mask& mask) {
  if (img.rows() != mask.rows() || img.cols() != mask.cols()) {
    throw DataError("mask is " + std::to_string(mask.rows()) + "x" + std::to_string(mask.cols()) +
                    " but image is " + std::to_string(img.rows()) + "x" +
                    std::to_string(img.cols()));
  }
}

void require_transform_size(const Image& img) {
  if (img.rows() < kMinTransformSide || img.cols() < kMinTransformSide) {
    throw DataError("image is " + std::to_string(img.rows()) + "x" + std::to_string(img.cols()) +
                    "; transforms need at least 8x8");
  }
}

Plane<double> luminance(const Image& img) {
  return 0.299 * img.channel(0) + 0.587 * img.channel(1) + 0.114 * img.channel(2);
}

}  // namespace featiso
