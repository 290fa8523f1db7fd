#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "featiso/image.hpp"

namespace featiso {

enum class Split { kTrain, kVal, kTest };

std::string_view to_string(Split split);
std::optional<Split> parse_split(std::string_view name);

/// One labeled image held in memory.
struct Sample {
  std::string id;
  Image image;
  std::optional<Mask> mask;
  int label = 0;
  Split split = Split::kTrain;
};

/// In-memory counterpart of a manifest.
struct LabeledDataset {
  std::string name;
  std::vector<std::string> classes;
  Rgb mean_rgb = Rgb::Constant(0.5);
  std::uint64_t seed = 0;
  std::vector<Sample> samples;

  [[nodiscard]] std::vector<const Sample*> split(Split s) const;
  [[nodiscard]] int class_count() const { return static_cast<int>(classes.size()); }
};

/// Per-channel mean over all training pixels (every pixel weighs the same).
Rgb train_mean_rgb(const LabeledDataset& data);

}  // namespace featiso
