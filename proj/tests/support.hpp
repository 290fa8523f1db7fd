#pragma once

#include <png.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "featiso/image.hpp"

namespace testing {

// Test images come from std::mt19937 so they never share state with RngStream.
inline featiso::Image random_image(std::mt19937& gen, Eigen::Index rows, Eigen::Index cols,
                                   bool quantize = false) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  featiso::Planes<double> p;
  for (auto& plane : p) {
    plane.resize(rows, cols);
    for (Eigen::Index i = 0; i < plane.size(); ++i) {
      const double v = u(gen);
      plane.data()[i] = quantize ? std::floor(v * 256.0 > 255.0 ? 255.0 : v * 256.0) / 255.0 : v;
    }
  }
  return featiso::Image::from_planes(std::move(p));
}

inline featiso::Mask disk_mask(Eigen::Index rows, Eigen::Index cols, double cy, double cx, double radius) {
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = (r + 0.5 - cy) * (r + 0.5 - cy) + (c + 0.5 - cx) * (c + 0.5 - cx) <= radius * radius;
    }
  }
  return featiso::Mask::from_bool(m);
}

inline featiso::Image from_function(Eigen::Index rows, Eigen::Index cols, auto&& f) {
  featiso::Planes<double> p;
  for (int ch = 0; ch < 3; ++ch) {
    p[ch].resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) p[ch](r, c) = f(r, c, ch);
    }
  }
  return featiso::Image::clamped(std::move(p));
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("featiso_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

// Raw PNG writer for formats the library refuses to produce.
inline void write_png(const std::filesystem::path& path, int width, int height, int bit_depth, int color_type,
                      const std::vector<unsigned char>& bytes) {
  FILE* fp = std::fopen(path.string().c_str(), "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = bytes.size() / static_cast<std::size_t>(height);
  for (int r = 0; r < height; ++r) {
    png_write_row(png, const_cast<unsigned char*>(bytes.data()) + static_cast<std::size_t>(r) * stride);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Relative path -> bytes for every regular file under root.
inline std::map<std::string, std::string> tree_contents(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[std::filesystem::relative(e.path(), root).generic_string()] = read_file(e.path());
  }
  return out;
}

}  // namespace testing
