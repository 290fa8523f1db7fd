#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "featiso/dataset.hpp"
#include "featiso/rng.hpp"

namespace featiso {

enum class Cue { kColor, kShape, kTexture };

inline constexpr std::array<Cue, 3> kAllCues = {Cue::kColor, Cue::kShape, Cue::kTexture};
inline constexpr int kMaxCueLevels = 6;

std::string_view to_string(Cue cue);
std::optional<Cue> parse_cue(std::string_view name);

enum class ShapeFamily { kDisk, kEllipse, kSquare, kTriangle, kStar5, kBlob6 };

std::string_view to_string(ShapeFamily family);
/// Shape level -> family, most distinct families first.
ShapeFamily shape_for_level(int level);

/// Recipe for a cue-planted dataset. Cues not listed as informative are nuisance
/// cues, balanced across classes within every split.
struct CueSpec {
  int classes = 2;
  std::vector<Cue> informative = {Cue::kColor};
  int image_size = 64;
  int train_per_class = 20;
  int val_per_class = 10;
  int test_per_class = 20;
  std::uint64_t seed = 0;

  /// Throws UsageError for K outside [2, 6], duplicate cues, an empty
  /// informative set, image_size < 16, or non-positive split counts.
  void validate() const;
  [[nodiscard]] bool is_informative(Cue cue) const;
};

/// Drawn level of each cue for one sample.
struct CueRecord {
  std::array<int, 3> levels{};  // indexed by Cue

  [[nodiscard]] int level(Cue cue) const { return levels[static_cast<std::size_t>(cue)]; }
  int& level(Cue cue) { return levels[static_cast<std::size_t>(cue)]; }
};

struct SynthDataset {
  LabeledDataset data;
  std::vector<CueRecord> cues;  // parallel to data.samples
};

/// Draws one image + exact mask for the given cue levels.
/// Geometry, tone and texture phase are jittered from `rng`.
std::pair<Image, Mask> render_sample(const CueRecord& levels, int classes, int image_size,
                                     RngStream& rng);

/// Lesion colour for a hue level (all channels darker than the background).
Rgb lesion_color(int level, int classes);
/// Base background tone.
Rgb background_color();
/// Stripe orientation (radians) and frequency (cycles per image side) for a texture level.
std::pair<double, double> texture_wave(int level, int classes);

/// Builds every split. Deterministic in spec.seed.
SynthDataset generate(const CueSpec& spec);

struct AuditReport {
  int classes = 0;
  std::size_t samples = 0;
  std::array<double, 3> mutual_information{};  // nats, indexed by Cue
  std::array<bool, 3> informative{};
};

/// Plug-in mutual information between each cue level and the label.
/// Throws DataError when `cues` does not match the samples.
AuditReport audit(const LabeledDataset& data, const std::vector<CueRecord>& cues,
                  const CueSpec& spec);

/// Plug-in MI estimate in nats between two discrete sequences.
double mutual_information(const std::vector<int>& x, const std::vector<int>& y);

}  // namespace featiso
