#include "featiso/dataset.hpp"

namespace featiso {

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "unknown";
}

std::optional<Split> parse_split(std::string_view name) {
  for (const auto s : {Split::kTrain, Split::kVal, Split::kTest}) {
    if (name == to_string(s)) return s;
  }
  return std::nullopt;
}

std::vector<const Sample*> LabeledDataset::split(Split s) const {
  std::vector<const Sample*> out;
  for (const auto& sample : samples) {
    if (sample.split == s) out.push_back(&sample);
  }
  return out;
}

Rgb train_mean_rgb(const LabeledDataset& data) {
  Rgb sum = Rgb::Zero();
  double count = 0.0;
  for (const auto& s : data.samples) {
    if (s.split != Split::kTrain) continue;
    for (int c = 0; c < 3; ++c) sum[c] += s.image.channel(c).sum();
    count += static_cast<double>(s.image.pixel_count());
  }
  if (count == 0.0) throw DataError("dataset has no training pixels");
  return sum / count;
}

}  // namespace featiso
