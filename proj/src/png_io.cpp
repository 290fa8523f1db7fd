#include "featiso/png_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace featiso {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct RawPng {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int channels = 0;  // 1 or 3 after normalization
  std::vector<std::uint8_t> bytes;
};

[[noreturn]] void png_error_handler(png_structp png, png_const_charp msg) {
  auto* err = static_cast<std::string*>(png_get_error_ptr(png));
  if (err) *err = msg;
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

RawPng read_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw DataError("cannot open " + path.string());

  png_byte signature[8];
  if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    throw DataError(path.string() + " is not a PNG file");
  }

  std::string message;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler, png_warning_handler);
  if (!png) throw DataError("libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DataError("libpng initialization failed");
  }

  RawPng raw;
  std::vector<png_bytep> rows;
  std::string failure;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("failed to decode " + path.string() + ": " + message);
  }

  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (bit_depth == 16) {
    failure = "unsupported bit depth 16 in " + path.string();
  } else if (color_type & PNG_COLOR_MASK_ALPHA) {
    failure = "alpha channel not supported in " + path.string();
  }
  if (failure.empty()) {
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    raw.width = png_get_image_width(png, info);
    raw.height = png_get_image_height(png, info);
    raw.channels = png_get_channels(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    raw.bytes.resize(stride * raw.height);
    rows.resize(raw.height);
    for (png_uint_32 y = 0; y < raw.height; ++y) rows[y] = raw.bytes.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (!failure.empty()) throw DataError(failure);
  if (raw.channels != 1 && raw.channels != 3) {
    throw DataError("unexpected channel count in " + path.string());
  }
  return raw;
}

void write_png(const std::filesystem::path& path, png_uint_32 width, png_uint_32 height,
               int color_type, int channels, const std::vector<std::uint8_t>& bytes) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw DataError("cannot write " + path.string());

  std::string message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler,
                                            png_warning_handler);
  if (!png) throw DataError("libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw DataError("libpng initialization failed");
  }
  std::vector<png_bytep> rows(height);
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  for (png_uint_32 y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(bytes.data() + y * stride);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("failed to encode " + path.string() + ": " + message);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) throw DataError("cannot write " + path.string());
}

}  // namespace

Image load_image(const std::filesystem::path& path, LoadOptions options) {
  const RawPng raw = read_png(path);
  if (raw.channels == 1 && !options.expand_gray) {
    throw DataError(path.string() + " is grayscale; enable gray expansion to load it as RGB");
  }
  Planes<double> planes;
  for (auto& p : planes) p.resize(raw.height, raw.width);
  for (png_uint_32 y = 0; y < raw.height; ++y) {
    for (png_uint_32 x = 0; x < raw.width; ++x) {
      const std::size_t base = (static_cast<std::size_t>(y) * raw.width + x) * raw.channels;
      for (int c = 0; c < 3; ++c) {
        const int src = raw.channels == 1 ? 0 : c;
        planes[c](y, x) = raw.bytes[base + src] / 255.0;
      }
    }
  }
  return Image::from_planes(std::move(planes));
}

void save_image(const Image& img, const std::filesystem::path& path) {
  const auto h = static_cast<png_uint_32>(img.rows());
  const auto w = static_cast<png_uint_32>(img.cols());
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(h) * w * 3);
  std::size_t i = 0;
  for (png_uint_32 y = 0; y < h; ++y) {
    for (png_uint_32 x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) bytes[i++] = quantize(img.at(y, x, c));
    }
  }
  write_png(path, w, h, PNG_COLOR_TYPE_RGB, 3, bytes);
}

Mask load_mask(const std::filesystem::path& path) {
  const RawPng raw = read_png(path);
  Mask::Data data(raw.height, raw.width);
  for (png_uint_32 y = 0; y < raw.height; ++y) {
    for (png_uint_32 x = 0; x < raw.width; ++x) {
      const std::size_t base = (static_cast<std::size_t>(y) * raw.width + x) * raw.channels;
      data(y, x) = raw.bytes[base] >= 128 ? 1 : 0;
    }
  }
  return Mask(std::move(data));
}

void save_mask(const Mask& mask, const std::filesystem::path& path) {
  const auto h = static_cast<png_uint_32>(mask.rows());
  const auto w = static_cast<png_uint_32>(mask.cols());
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(h) * w);
  for (png_uint_32 y = 0; y < h; ++y) {
    for (png_uint_32 x = 0; x < w; ++x) bytes[y * w + x] = mask.lesion(y, x) ? 255 : 0;
  }
  write_png(path, w, h, PNG_COLOR_TYPE_GRAY, 1, bytes);
}

}  // namespace featiso
