#include "featiso/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <array>
#include <cmath>
#include <fstream>
#include <map>

#include "featiso/parallel.hpp"
#include "featiso/png_io.hpp"

namespace featiso {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 5> kSpectralNames = {"amplitude_only", "phase_only", "apr_p",
                                                            "af_apr_p", "mix_apr_p"};

bool is_png(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png";
}

std::vector<fs::path> sorted_entries(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

struct Found {
  fs::path rel;  // relative to the scanned root
  std::string label;
  std::optional<Split> split;
};

// Class directories under `root`; `prefix` is prepended to relative paths.
void scan_classes(const fs::path& root, const fs::path& prefix, std::optional<Split> split,
                  std::vector<Found>& out) {
  for (const auto& entry : sorted_entries(root)) {
    if (fs::is_regular_file(entry) && is_png(entry)) {
      throw DataError("file " + entry.string() + " is not inside a class directory");
    }
    if (!fs::is_directory(entry)) continue;
    const std::string label = entry.filename().string();
    for (const auto& file : sorted_entries(entry)) {
      if (fs::is_regular_file(file) && is_png(file)) {
        out.push_back({prefix / label / file.filename(), label, split});
      }
    }
  }
}

Manifest derived_manifest(const Manifest& src, const fs::path& out_dir, const RunConfig& cfg) {
  Manifest m;
  m.dir = out_dir;
  m.metadata = src.metadata;
  m.metadata.seed = cfg.seed;
  m.metadata.version = kToolVersion;
  return m;
}

Sample load_sample(const Manifest& manifest, const SampleRecord& r, bool expand_gray, bool with_mask) {
  Sample s;
  s.id = r.sample_id;
  s.split = r.split;
  s.label = manifest.label_index(r.label);
  s.image = load_image(manifest.resolve(r.image_path), LoadOptions{expand_gray});
  if (with_mask && r.mask_path) {
    s.mask = load_mask(manifest.resolve(*r.mask_path));
    require_same_size(s.image, *s.mask);
  }
  return s;
}

}  // namespace

Manifest cmd_ingest(const fs::path& dir, const std::optional<fs::path>& mask_dir, const fs::path& out_dir,
                    const RunConfig& cfg) {
  if (!fs::is_directory(dir)) throw DataError(dir.string() + " is not a directory");
  std::vector<Found> found;
  bool has_split_dirs = false;
  for (const auto s : {Split::kTrain, Split::kVal, Split::kTest}) {
    has_split_dirs = has_split_dirs || fs::is_directory(dir / std::string(to_string(s)));
  }
  if (has_split_dirs) {
    for (const auto s : {Split::kTrain, Split::kVal, Split::kTest}) {
      const fs::path sub = dir / std::string(to_string(s));
      if (fs::is_directory(sub)) scan_classes(sub, std::string(to_string(s)), s, found);
    }
  } else {
    scan_classes(dir, {}, std::nullopt, found);
  }
  if (found.empty()) throw DataError("no PNG images found under " + dir.string());

  std::vector<std::string> classes;
  for (const auto& f : found) {
    if (std::find(classes.begin(), classes.end(), f.label) == classes.end()) classes.push_back(f.label);
  }
  std::sort(classes.begin(), classes.end());

  if (!has_split_dirs) {
    const double train_frac = cfg.ingest_train_fraction;
    const double val_frac = cfg.ingest_val_fraction;
    if (train_frac < 0 || val_frac < 0 || train_frac + val_frac > 1.0) {
      throw UsageError("split fractions must be non-negative and sum to at most 1");
    }
    for (const auto& label : classes) {
      std::vector<Found*> members;
      for (auto& f : found) {
        if (f.label == label) members.push_back(&f);
      }
      RngStream rng(cfg.seed, "ingest/" + label, "split");
      rng.shuffle(std::span<Found*>(members));
      const auto n = static_cast<double>(members.size());
      const auto n_train = static_cast<std::size_t>(std::lround(train_frac * n));
      const auto n_val = std::min(members.size() - n_train, static_cast<std::size_t>(std::lround(val_frac * n)));
      for (std::size_t i = 0; i < members.size(); ++i) {
        members[i]->split = i < n_train ? Split::kTrain : (i < n_train + n_val ? Split::kVal : Split::kTest);
      }
    }
  }

  Manifest m;
  m.dir = out_dir;
  m.metadata.classes = classes;
  m.metadata.seed = cfg.seed;
  for (const auto& f : found) {
    SampleRecord r;
    r.sample_id = fs::path(f.rel).replace_extension().generic_string();
    r.image_path = relative_to(dir / f.rel, out_dir);
    if (mask_dir) {
      const fs::path mask = *mask_dir / f.rel;
      if (!fs::is_regular_file(mask)) throw DataError("missing mask " + mask.string());
      r.mask_path = relative_to(mask, out_dir);
    }
    r.label = f.label;
    r.split = *f.split;
    m.records.push_back(std::move(r));
  }
  validate(m);

  const LabeledDataset data = load_dataset(m, cfg.expand_gray, cfg.workers);
  bool any_train = false;
  for (const auto& s : data.samples) any_train = any_train || s.split == Split::kTrain;
  m.metadata.mean_rgb = any_train ? train_mean_rgb(data) : Rgb::Constant(0.5);
  write_manifest(m);
  write_config_snapshot(cfg, out_dir);
  return m;
}

Manifest cmd_ablate(const Manifest& manifest, AblationKind kind, const fs::path& out_dir,
                    const RunConfig& cfg) {
  if (requires_mask(kind)) {
    for (const auto& r : manifest.records) {
      if (!r.mask_path) {
        throw DataError(std::string(to_string(kind)) + " needs masks; " + r.sample_id + " has none");
      }
    }
  }
  Manifest out = derived_manifest(manifest, out_dir, cfg);
  out.records.resize(manifest.records.size());
  fs::create_directories(out_dir / "images");
  fs::create_directories(out_dir / "masks");
  AblationConfig ablation = cfg.ablation;
  ablation.mean_rgb = manifest.metadata.mean_rgb;
  const Setting setting = from_ablation(kind);

  parallel_for(manifest.records.size(), cfg.workers, [&](std::size_t i) {
    const SampleRecord& src = manifest.records[i];
    const Sample sample = load_sample(manifest, src, cfg.expand_gray, true);
    require_transform_size(sample.image);
    const Image result = render_setting(setting, sample, ablation, cfg.seed);

    SampleRecord& r = out.records[i];
    r = src;
    r.image_path = "images/" + file_stem(src.sample_id) + ".png";
    r.label_source.reset();
    r.partner_id.reset();
    save_image(result, out_dir / r.image_path);
    r.mask_path.reset();
    if (sample.mask && result.rows() == sample.image.rows() && result.cols() == sample.image.cols()) {
      r.mask_path = "masks/" + file_stem(src.sample_id) + ".png";
      save_mask(*sample.mask, out_dir / *r.mask_path);
    }
  });
  write_manifest(out);
  write_config_snapshot(cfg, out_dir);
  return out;
}

std::string_view to_string(SpectralCommand c) { return kSpectralNames[static_cast<std::size_t>(c)]; }

std::optional<SpectralCommand> parse_spectral_command(std::string_view name) {
  for (std::size_t i = 0; i < kSpectralNames.size(); ++i) {
    if (name == kSpectralNames[i]) return static_cast<SpectralCommand>(i);
  }
  return std::nullopt;
}

std::vector<std::size_t> random_derangement(std::size_t n, RngStream& rng) {
  if (n < 2) throw DataError("a derangement needs at least two elements");
  std::vector<std::size_t> perm(n);
  for (;;) {
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(std::span<std::size_t>(perm));
    bool fixed_point = false;
    for (std::size_t i = 0; i < n && !fixed_point; ++i) fixed_point = perm[i] == i;
    if (!fixed_point) return perm;
  }
}

Manifest cmd_spectral(const Manifest& manifest, SpectralCommand setting, const fs::path& out_dir,
                      const RunConfig& cfg) {
  const bool apr = setting != SpectralCommand::kAmplitudeOnly && setting != SpectralCommand::kPhaseOnly;
  const std::string op = "spectral/" + std::string(to_string(setting));

  // Partner index per record (APR only), drawn per split.
  std::vector<std::size_t> partner(manifest.records.size());
  if (apr) {
    for (const auto split : {Split::kTrain, Split::kVal, Split::kTest}) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < manifest.records.size(); ++i) {
        if (manifest.records[i].split == split) members.push_back(i);
      }
      if (members.empty()) continue;
      if (members.size() == 1) {
        throw DataError("split " + std::string(to_string(split)) + " has a single sample; APR needs a partner");
      }
      RngStream rng(cfg.seed, "split/" + std::string(to_string(split)), op + "/pairing");
      const auto perm = random_derangement(members.size(), rng);
      for (std::size_t k = 0; k < members.size(); ++k) partner[members[k]] = members[perm[k]];
    }
  }

  std::vector<Sample> samples(manifest.records.size());
  parallel_for(manifest.records.size(), cfg.workers, [&](std::size_t i) {
    samples[i] = load_sample(manifest, manifest.records[i], cfg.expand_gray, false);
    require_transform_size(samples[i].image);
  });

  Manifest out = derived_manifest(manifest, out_dir, cfg);
  out.records.resize(manifest.records.size());
  fs::create_directories(out_dir / "images");
  parallel_for(manifest.records.size(), cfg.workers, [&](std::size_t i) {
    const SampleRecord& src = manifest.records[i];
    SampleRecord& r = out.records[i];
    r = src;
    r.mask_path.reset();
    r.cues.reset();
    r.image_path = "images/" + file_stem(src.sample_id) + ".png";
    RngStream rng(cfg.seed, src.sample_id, op);
    Image result;
    switch (setting) {
      case SpectralCommand::kAmplitudeOnly:
        result = phase_randomize(samples[i].image, rng);
        break;
      case SpectralCommand::kPhaseOnly:
        result = amplitude_randomize(samples[i].image, rng);
        break;
      default: {
        const AprVariant variant = setting == SpectralCommand::kAprP     ? AprVariant::kAprP
                                   : setting == SpectralCommand::kAfAprP ? AprVariant::kAfAprP
                                                                         : AprVariant::kMixAprP;
        const std::size_t k = partner[i];
        RecombinedSample rs = apr_augment(variant, samples[i].image, samples[k].image, rng);
        result = std::move(rs.image);
        // x_j supplies the labeled component, so the label stays x_j's.
        r.label_source = std::string(to_string(rs.label_source));
        r.partner_id = manifest.records[k].sample_id;
        break;
      }
    }
    save_image(result, out_dir / r.image_path);
  });
  write_manifest(out);
  write_config_snapshot(cfg, out_dir);
  return out;
}

Manifest cmd_synth(const fs::path& out_dir, const RunConfig& cfg) {
  CueSpec spec = cfg.synth;
  spec.seed = cfg.seed;
  const SynthDataset synth = generate(spec);
  Manifest m = write_dataset(synth.data, out_dir, cfg.workers, &synth.cues);
  write_config_snapshot(cfg, out_dir);
  return m;
}

ProbeOutputs cmd_probe(Protocol protocol, const Manifest& manifest, const std::map<Setting, Manifest>& variants,
                       const fs::path& out_dir, const RunConfig& cfg) {
  const LabeledDataset data = load_dataset(manifest, cfg.expand_gray, cfg.workers);
  std::map<Setting, LabeledDataset> loaded;
  VariantMap variant_map;
  for (const auto& [setting, vm] : variants) {
    if (vm.metadata.classes != manifest.metadata.classes) {
      throw DataError("variant " + std::string(to_string(setting)) + " has a different class list");
    }
    if (vm.records.size() != manifest.records.size()) {
      throw DataError("variant " + std::string(to_string(setting)) + " does not match the manifest's records");
    }
    loaded.emplace(setting, load_dataset(vm, cfg.expand_gray, cfg.workers));
    variant_map[setting] = &loaded.at(setting);
  }

  ProbeOutputs out;
  out.table = run_protocol(protocol, data, variant_map, cfg.protocol_config());
  fs::create_directories(out_dir);
  out.csv_path = out_dir / "metrics.csv";
  out.summary_path = out_dir / "summary.json";
  {
    std::ofstream csv(out.csv_path);
    if (!csv) throw DataError("cannot write " + out.csv_path.string());
    csv << to_csv(out.table);
  }
  nlohmann::json summary;
  summary["protocol"] = std::string(to_string(protocol));
  summary["dataset"] = data.name;
  summary["repetitions"] = cfg.repetitions;
  auto& rows = summary["settings"] = nlohmann::json::array();
  for (const auto& s : summarize(out.table)) {
    auto stat = [](const SummaryStat& st) {
      return nlohmann::json{{"mean", st.mean}, {"sd", st.sd}};
    };
    rows.push_back({{"setting", s.setting},
                    {"runs", s.runs},
                    {"accuracy", stat(s.accuracy)},
                    {"macro_f1", stat(s.macro_f1)},
                    {"relative_delta", stat(s.relative_delta)}});
  }
  std::ofstream js(out.summary_path);
  if (!js) throw DataError("cannot write " + out.summary_path.string());
  js << summary.dump(2) << "\n";
  write_config_snapshot(cfg, out_dir);
  return out;
}

std::size_t cmd_spectrum(const Manifest& manifest, const fs::path& out_dir, const RunConfig& cfg) {
  fs::create_directories(out_dir);
  parallel_for(manifest.records.size(), cfg.workers, [&](std::size_t i) {
    const SampleRecord& r = manifest.records[i];
    const Image img = load_image(manifest.resolve(r.image_path), LoadOptions{cfg.expand_gray});
    save_image(export_spectrum(img), out_dir / (file_stem(r.sample_id) + ".png"));
  });
  write_config_snapshot(cfg, out_dir);
  return manifest.records.size();
}

}  // namespace featiso
