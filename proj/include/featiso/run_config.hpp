#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "featiso/ablation.hpp"
#include "featiso/probe.hpp"
#include "featiso/spectral.hpp"
#include "featiso/synthgen.hpp"

namespace featiso {

/// Every tunable of a pipeline run. Serialized as sorted `key=value` lines,
/// the same format `--config` reads, so a snapshot reproduces its run.
struct RunConfig {
  std::uint64_t seed = 0;
  int workers = 1;
  AblationConfig ablation;
  AprVariant apr_variant = AprVariant::kAprP;
  std::string apr_pairing = "derangement";
  FeatureSpec features;
  TrainConfig train;
  int repetitions = 10;
  std::vector<Setting> settings;  // empty: the protocol's defaults
  CueSpec synth;
  double ingest_train_fraction = 0.7;
  double ingest_val_fraction = 0.1;
  bool expand_gray = false;

  /// Throws UsageError for unknown keys or unparsable values.
  void set(std::string_view key, std::string_view value);
  /// Applies `key=value` lines; '#' starts a comment.
  void apply_text(std::string_view text);
  void apply_file(const std::filesystem::path& path);
  [[nodiscard]] std::string serialize() const;

  [[nodiscard]] ProtocolConfig protocol_config() const;
};

/// Writes serialize() to dir/run_config.txt.
void write_config_snapshot(const RunConfig& cfg, const std::filesystem::path& dir);

}  // namespace featiso
