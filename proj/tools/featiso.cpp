// featiso: ingest, ablate, spectral, synth, probe and spectrum subcommands.
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "featiso/pipeline.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInvariant = 4;

using featiso::UsageError;

template <typename T, typename Parse>
T parse_or_throw(const std::string& what, const std::string& value, Parse parse) {
  const auto parsed = parse(value);
  if (!parsed) throw UsageError("unknown " + what + " '" + value + "'");
  return *parsed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature isolation toolkit for image classifiers"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string config_file;
  std::vector<std::string> overrides;
  app.add_option("--seed", seed, "Global seed");
  app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--config", config_file, "key=value configuration file");
  app.add_option("--set", overrides, "Override one configuration key (key=value)");

  std::string in_dir, mask_dir, out_dir, manifest_path, kind_name, setting_name, protocol_name;
  std::vector<std::string> variants, settings;

  auto* ingest = app.add_subcommand("ingest", "Build a manifest from a directory of class folders");
  ingest->add_option("dir", in_dir, "Image root")->required();
  ingest->add_option("--masks", mask_dir, "Mask root mirroring the image tree");
  ingest->add_option("--out", out_dir, "Manifest directory")->required();

  auto* ablate = app.add_subcommand("ablate", "Apply one feature ablation to every record");
  ablate->add_option("manifest", manifest_path, "Input manifest directory")->required();
  ablate->add_option("--kind", kind_name, "original, color_only, shape_only, ... or TSC, C, S, ...")->required();
  ablate->add_option("--out", out_dir, "Output directory")->required();

  auto* spectral = app.add_subcommand("spectral", "Spectral randomization or amplitude-phase recombination");
  spectral->add_option("manifest", manifest_path, "Input manifest directory")->required();
  spectral->add_option("--setting", setting_name, "amplitude_only, phase_only, apr_p, af_apr_p, mix_apr_p")
      ->required();
  spectral->add_option("--out", out_dir, "Output directory")->required();

  auto* synth = app.add_subcommand("synth", "Generate a planted-cue dataset");
  synth->add_option("--out", out_dir, "Output directory")->required();

  auto* probe = app.add_subcommand("probe", "Run a probe protocol and write metrics");
  probe->add_option("manifest", manifest_path, "Original manifest directory")->required();
  probe->add_option("--protocol", protocol_name, "train_on_ablation, cross_transfer, dfr, spectral_randomization")
      ->required();
  probe->add_option("--variant", variants, "setting=manifest_dir for a materialized variant");
  probe->add_option("--settings", settings, "Settings to evaluate (default depends on protocol)")->delimiter(',');
  probe->add_option("--out", out_dir, "Output directory")->required();

  auto* spectrum = app.add_subcommand("spectrum", "Export log-magnitude spectra");
  spectrum->add_option("manifest", manifest_path, "Input manifest directory")->required();
  spectrum->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    featiso::RunConfig cfg;
    if (!config_file.empty()) cfg.apply_file(config_file);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;

    if (ingest->parsed()) {
      std::optional<std::filesystem::path> masks;
      if (!mask_dir.empty()) masks = mask_dir;
      const auto m = featiso::cmd_ingest(in_dir, masks, out_dir, cfg);
      std::printf("ingested %zu records, %zu classes\n", m.records.size(), m.metadata.classes.size());
    } else if (ablate->parsed()) {
      const auto kind = parse_or_throw<featiso::AblationKind>("ablation", kind_name, featiso::parse_ablation);
      const auto m = featiso::cmd_ablate(featiso::read_manifest(manifest_path), kind, out_dir, cfg);
      std::printf("wrote %zu %s records\n", m.records.size(), std::string(featiso::to_string(kind)).c_str());
    } else if (spectral->parsed()) {
      const auto s =
          parse_or_throw<featiso::SpectralCommand>("spectral setting", setting_name, featiso::parse_spectral_command);
      const auto m = featiso::cmd_spectral(featiso::read_manifest(manifest_path), s, out_dir, cfg);
      std::printf("wrote %zu %s records\n", m.records.size(), std::string(featiso::to_string(s)).c_str());
    } else if (synth->parsed()) {
      const auto m = featiso::cmd_synth(out_dir, cfg);
      std::printf("generated %zu records\n", m.records.size());
    } else if (probe->parsed()) {
      const auto protocol = parse_or_throw<featiso::Protocol>("protocol", protocol_name, featiso::parse_protocol);
      std::map<featiso::Setting, featiso::Manifest> materialized;
      for (const auto& v : variants) {
        const auto eq = v.find('=');
        if (eq == std::string::npos) throw UsageError("--variant expects setting=dir, got '" + v + "'");
        const auto s = parse_or_throw<featiso::Setting>("setting", v.substr(0, eq), featiso::parse_setting);
        materialized[s] = featiso::read_manifest(v.substr(eq + 1));
      }
      for (const auto& name : settings) {
        cfg.settings.push_back(parse_or_throw<featiso::Setting>("setting", name, featiso::parse_setting));
      }
      const auto out = featiso::cmd_probe(protocol, featiso::read_manifest(manifest_path), materialized, out_dir, cfg);
      for (const auto& row : featiso::summarize(out.table)) {
        std::printf("%-28s acc %.4f  f1 %.4f  delta %+.2f\n", row.setting.c_str(), row.accuracy.mean,
                    row.macro_f1.mean, row.relative_delta.mean);
      }
    } else if (spectrum->parsed()) {
      const auto n = featiso::cmd_spectrum(featiso::read_manifest(manifest_path), out_dir, cfg);
      std::printf("wrote %zu spectra\n", n);
    }
  } catch (const featiso::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const featiso::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInvariant;
  }
  return 0;
}
