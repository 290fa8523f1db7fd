#pragma once

#include <filesystem>

#include "featiso/image.hpp"

namespace featiso {

struct LoadOptions {
  /// Accept grayscale files by replicating the gray channel into R, G, B.
  bool expand_gray = false;
};

/// Reads an 8-bit RGB (or palette) PNG, mapping bytes v to v / 255.
/// Throws DataError for unreadable files, 16-bit samples, alpha channels, and
/// grayscale input without `expand_gray`.
Image load_image(const std::filesystem::path& path, LoadOptions options = {});

/// Writes an 8-bit RGB PNG using half-up rounding of v * 255.
void save_image(const Image& img, const std::filesystem::path& path);

/// Reads an 8-bit grayscale (or RGB, first channel) PNG; bytes >= 128 are lesion.
Mask load_mask(const std::filesystem::path& path);

/// Writes lesion as 255 and background as 0 in an 8-bit grayscale PNG.
void save_mask(const Mask& mask, const std::filesystem::path& path);

}  // namespace featiso
