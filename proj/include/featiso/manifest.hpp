#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "featiso/dataset.hpp"
#include "featiso/synthgen.hpp"

namespace featiso {

inline constexpr const char* kManifestFile = "manifest.jsonl";
inline constexpr const char* kMetadataFile = "metadata.json";
inline constexpr const char* kConfigSnapshotFile = "run_config.txt";
inline constexpr const char* kToolVersion = "featiso 0.1.0";

/// One manifest line. Paths are relative to the manifest directory unless absolute.
struct SampleRecord {
  std::string sample_id;
  std::string image_path;
  std::optional<std::string> mask_path;
  std::string label;
  Split split = Split::kTrain;
  // Optional provenance fields; readers ignore them when absent.
  std::optional<std::string> label_source;
  std::optional<std::string> partner_id;
  std::optional<CueRecord> cues;
};

struct ManifestMetadata {
  std::vector<std::string> classes;
  Rgb mean_rgb = Rgb::Constant(0.5);
  std::uint64_t seed = 0;
  std::string version = kToolVersion;
};

struct Manifest {
  std::filesystem::path dir;
  std::vector<SampleRecord> records;
  ManifestMetadata metadata;

  [[nodiscard]] std::filesystem::path resolve(const std::string& path) const;
  [[nodiscard]] std::string name() const;
  [[nodiscard]] int label_index(const std::string& label) const;
};

/// Throws DataError on duplicate sample ids or labels outside the class list.
void validate(const Manifest& manifest);

/// Reads `dir/manifest.jsonl` and `dir/metadata.json`. `dir` may also name the
/// manifest file itself. Throws DataError on malformed content.
Manifest read_manifest(const std::filesystem::path& dir);

/// Writes both files into manifest.dir (created if needed).
void write_manifest(const Manifest& manifest);

/// Filesystem-safe stem for a sample id.
std::string file_stem(const std::string& sample_id);

/// Relative path from `base` to `target` when possible, else absolute.
std::string relative_to(const std::filesystem::path& target, const std::filesystem::path& base);

/// Loads every record's image (and mask when present).
/// Throws DataError when a mask's size differs from its image.
LabeledDataset load_dataset(const Manifest& manifest, bool expand_gray, int workers);

/// Writes images/ and masks/ PNGs plus the manifest into out_dir.
/// `cues`, when given, is parallel to data.samples and logged per record.
Manifest write_dataset(const LabeledDataset& data, const std::filesystem::path& out_dir, int workers,
                       const std::vector<CueRecord>* cues = nullptr);

}  // namespace featiso
