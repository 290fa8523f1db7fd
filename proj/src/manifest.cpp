#include "featiso/manifest.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "featiso/parallel.hpp"
#include "featiso/png_io.hpp"

namespace featiso {

namespace fs = std::filesystem;
using nlohmann::json;

std::filesystem::path Manifest::resolve(const std::string& path) const {
  const fs::path p(path);
  return p.is_absolute() ? p : (dir / p).lexically_normal();
}

std::string Manifest::name() const {
  const fs::path canonical = fs::weakly_canonical(dir);
  return canonical.filename().string();
}

int Manifest::label_index(const std::string& label) const {
  const auto it = std::find(metadata.classes.begin(), metadata.classes.end(), label);
  if (it == metadata.classes.end()) throw DataError("label '" + label + "' is not in the class list");
  return static_cast<int>(it - metadata.classes.begin());
}

void validate(const Manifest& manifest) {
  std::set<std::string> seen;
  for (const auto& r : manifest.records) {
    if (!seen.insert(r.sample_id).second) throw DataError("duplicate sample_id '" + r.sample_id + "'");
    static_cast<void>(manifest.label_index(r.label));
  }
}

Manifest read_manifest(const std::filesystem::path& where) {
  Manifest m;
  m.dir = fs::is_directory(where) ? where : where.parent_path();
  if (m.dir.empty()) m.dir = ".";
  const fs::path manifest_path = fs::is_directory(where) ? where / kManifestFile : where;
  const fs::path metadata_path = m.dir / kMetadataFile;

  std::ifstream meta_in(metadata_path);
  if (!meta_in) throw DataError("cannot read " + metadata_path.string());
  try {
    const json meta = json::parse(meta_in);
    m.metadata.classes = meta.at("classes").get<std::vector<std::string>>();
    const auto rgb = meta.at("mean_rgb").get<std::vector<double>>();
    if (rgb.size() != 3) throw DataError("mean_rgb must have three entries");
    m.metadata.mean_rgb = Rgb(rgb[0], rgb[1], rgb[2]);
    m.metadata.seed = meta.at("seed").get<std::uint64_t>();
    m.metadata.version = meta.value("version", std::string{});
  } catch (const json::exception& e) {
    throw DataError("malformed " + metadata_path.string() + ": " + e.what());
  }

  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot read " + manifest_path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      SampleRecord r;
      r.sample_id = j.at("sample_id").get<std::string>();
      r.image_path = j.at("image_path").get<std::string>();
      if (j.contains("mask_path") && !j.at("mask_path").is_null()) {
        r.mask_path = j.at("mask_path").get<std::string>();
      }
      r.label = j.at("label").get<std::string>();
      const auto split = parse_split(j.at("split").get<std::string>());
      if (!split) throw DataError("unknown split");
      r.split = *split;
      if (j.contains("label_source")) r.label_source = j.at("label_source").get<std::string>();
      if (j.contains("partner_id")) r.partner_id = j.at("partner_id").get<std::string>();
      if (j.contains("cues")) {
        CueRecord cues;
        for (const auto cue : kAllCues) cues.level(cue) = j.at("cues").at(std::string(to_string(cue))).get<int>();
        r.cues = cues;
      }
      m.records.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw DataError(manifest_path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  validate(m);
  return m;
}

void write_manifest(const Manifest& manifest) {
  fs::create_directories(manifest.dir);
  {
    json meta;
    meta["classes"] = manifest.metadata.classes;
    meta["mean_rgb"] = {manifest.metadata.mean_rgb[0], manifest.metadata.mean_rgb[1],
                        manifest.metadata.mean_rgb[2]};
    meta["seed"] = manifest.metadata.seed;
    meta["version"] = manifest.metadata.version;
    std::ofstream out(manifest.dir / kMetadataFile);
    if (!out) throw DataError("cannot write metadata in " + manifest.dir.string());
    out << meta.dump(2) << "\n";
  }
  std::ofstream out(manifest.dir / kManifestFile);
  if (!out) throw DataError("cannot write manifest in " + manifest.dir.string());
  for (const auto& r : manifest.records) {
    json j;
    j["sample_id"] = r.sample_id;
    j["image_path"] = r.image_path;
    j["mask_path"] = r.mask_path ? json(*r.mask_path) : json(nullptr);
    j["label"] = r.label;
    j["split"] = std::string(to_string(r.split));
    if (r.label_source) j["label_source"] = *r.label_source;
    if (r.partner_id) j["partner_id"] = *r.partner_id;
    if (r.cues) {
      json cues;
      for (const auto cue : kAllCues) cues[std::string(to_string(cue))] = r.cues->level(cue);
      j["cues"] = cues;
    }
    out << j.dump() << "\n";
  }
}

std::string file_stem(const std::string& sample_id) {
  std::string out;
  for (const char c : sample_id) {
    if (c == '/' || c == '\\') {
      out += "__";
    } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') {
      out += c;
    } else {
      out += '_';
    }
  }
  return out;
}

std::string relative_to(const std::filesystem::path& target, const std::filesystem::path& base) {
  const fs::path rel = fs::relative(fs::absolute(target), fs::absolute(base));
  return rel.empty() ? fs::absolute(target).string() : rel.generic_string();
}

LabeledDataset load_dataset(const Manifest& manifest, bool expand_gray, int workers) {
  LabeledDataset data;
  data.name = manifest.name();
  data.classes = manifest.metadata.classes;
  data.mean_rgb = manifest.metadata.mean_rgb;
  data.seed = manifest.metadata.seed;
  data.samples.resize(manifest.records.size());
  parallel_for(manifest.records.size(), workers, [&](std::size_t i) {
    const SampleRecord& r = manifest.records[i];
    Sample& s = data.samples[i];
    s.id = r.sample_id;
    s.split = r.split;
    s.label = manifest.label_index(r.label);
    s.image = load_image(manifest.resolve(r.image_path), LoadOptions{expand_gray});
    if (r.mask_path) {
      s.mask = load_mask(manifest.resolve(*r.mask_path));
      if (s.mask->rows() != s.image.rows() || s.mask->cols() != s.image.cols()) {
        throw DataError("mask size differs from image for sample " + r.sample_id);
      }
    }
  });
  return data;
}

Manifest write_dataset(const LabeledDataset& data, const std::filesystem::path& out_dir, int workers,
                       const std::vector<CueRecord>* cues) {
  Manifest m;
  m.dir = out_dir;
  m.metadata.classes = data.classes;
  m.metadata.mean_rgb = data.mean_rgb;
  m.metadata.seed = data.seed;
  fs::create_directories(out_dir / "images");
  if (std::any_of(data.samples.begin(), data.samples.end(), [](const Sample& s) { return s.mask.has_value(); })) {
    fs::create_directories(out_dir / "masks");
  }
  m.records.resize(data.samples.size());
  parallel_for(data.samples.size(), workers, [&](std::size_t i) {
    const Sample& s = data.samples[i];
    SampleRecord& r = m.records[i];
    r.sample_id = s.id;
    r.label = data.classes.at(static_cast<std::size_t>(s.label));
    r.split = s.split;
    r.image_path = "images/" + file_stem(s.id) + ".png";
    save_image(s.image, out_dir / r.image_path);
    if (s.mask) {
      r.mask_path = "masks/" + file_stem(s.id) + ".png";
      save_mask(*s.mask, out_dir / *r.mask_path);
    }
    if (cues) r.cues = cues->at(i);
  });
  write_manifest(m);
  return m;
}

}  // namespace featiso
