#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string_view>

#include "featiso/manifest.hpp"
#include "featiso/run_config.hpp"

namespace featiso {

/// Scans `dir` for PNGs labeled by their class subdirectory. Splits come from
/// top-level train/ val/ test/ directories when present, else a per-class
/// stratified split (ingest.train_fraction / ingest.val_fraction, rest test).
/// Masks, when `mask_dir` is given, mirror the image paths beneath it.
/// The manifest is written to out_dir with paths relative to it.
Manifest cmd_ingest(const std::filesystem::path& dir, const std::optional<std::filesystem::path>& mask_dir,
                    const std::filesystem::path& out_dir, const RunConfig& cfg);

/// Transforms every record with its per-sample stream and writes a new dataset.
Manifest cmd_ablate(const Manifest& manifest, AblationKind kind, const std::filesystem::path& out_dir,
                    const RunConfig& cfg);

enum class SpectralCommand { kAmplitudeOnly, kPhaseOnly, kAprP, kAfAprP, kMixAprP };

std::string_view to_string(SpectralCommand c);
std::optional<SpectralCommand> parse_spectral_command(std::string_view name);

/// Uniform random derangement of [0, n) by rejection; n must be >= 2.
std::vector<std::size_t> random_derangement(std::size_t n, RngStream& rng);

/// amplitude_only / phase_only transform each image; APR settings pair each
/// record with a derangement partner inside its split.
/// Throws DataError when a split holds exactly one sample under APR.
Manifest cmd_spectral(const Manifest& manifest, SpectralCommand setting,
                      const std::filesystem::path& out_dir, const RunConfig& cfg);

/// Generates a cue-planted dataset from cfg.synth with cfg.seed.
Manifest cmd_synth(const std::filesystem::path& out_dir, const RunConfig& cfg);

struct ProbeOutputs {
  MetricsTable table;
  std::filesystem::path csv_path;
  std::filesystem::path summary_path;
};

/// Runs a protocol on `manifest`, using materialized `variants` where given
/// and on-the-fly transforms otherwise. Writes metrics.csv, summary.json and a
/// config snapshot.
ProbeOutputs cmd_probe(Protocol protocol, const Manifest& manifest,
                       const std::map<Setting, Manifest>& variants, const std::filesystem::path& out_dir,
                       const RunConfig& cfg);

/// Writes one log-magnitude spectrum PNG per record; returns the count.
std::size_t cmd_spectrum(const Manifest& manifest, const std::filesystem::path& out_dir,
                         const RunConfig& cfg);

}  // namespace featiso
