#include "featiso/run_config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "featiso/manifest.hpp"

namespace featiso {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw UsageError("invalid value '" + std::string(value) + "' for " + std::string(key));
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw UsageError("invalid boolean '" + std::string(value) + "' for " + std::string(key));
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "workers") {
    workers = parse_number<int>(key, value);
    if (workers < 1) throw UsageError("workers must be at least 1");
  } else if (key == "patch_size") {
    ablation.patch_size = parse_number<int>(key, value);
  } else if (key == "sketch.sigma") {
    ablation.sketch.sigma = parse_number<double>(key, value);
  } else if (key == "sketch.k") {
    ablation.sketch.k = parse_number<double>(key, value);
  } else if (key == "sketch.epsilon") {
    ablation.sketch.epsilon = parse_number<double>(key, value);
  } else if (key == "sketch.phi") {
    ablation.sketch.phi = parse_number<double>(key, value);
  } else if (key == "shape_contrast") {
    ablation.shape_contrast = parse_number<double>(key, value);
  } else if (key == "apr.variant") {
    const auto v = parse_apr_variant(value);
    if (!v) throw UsageError("unknown APR variant '" + std::string(value) + "'");
    apr_variant = *v;
  } else if (key == "apr.pairing") {
    if (value != "derangement") throw UsageError("only derangement pairing is supported");
    apr_pairing = value;
  } else if (key == "probe.feature") {
    const auto k = parse_feature_kind(value);
    if (!k) throw UsageError("unknown feature map '" + std::string(value) + "'");
    features.kind = *k;
  } else if (key == "probe.downsample") {
    features.downsample = parse_number<int>(key, value);
  } else if (key == "probe.dim") {
    features.dim = parse_number<int>(key, value);
  } else if (key == "probe.bins") {
    features.bins = parse_number<int>(key, value);
  } else if (key == "probe.learning_rate") {
    train.learning_rate = parse_number<double>(key, value);
  } else if (key == "probe.epochs") {
    train.max_epochs = parse_number<int>(key, value);
  } else if (key == "probe.l2") {
    train.l2 = parse_number<double>(key, value);
  } else if (key == "probe.patience") {
    train.patience = parse_number<int>(key, value);
  } else if (key == "probe.eval_every") {
    train.eval_every = parse_number<int>(key, value);
  } else if (key == "probe.repetitions") {
    repetitions = parse_number<int>(key, value);
  } else if (key == "probe.settings") {
    settings.clear();
    std::string_view rest = value;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = trim(rest.substr(0, comma));
      const auto s = parse_setting(item);
      if (!s) throw UsageError("unknown setting '" + std::string(item) + "'");
      settings.push_back(*s);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
  } else if (key == "synth.classes") {
    synth.classes = parse_number<int>(key, value);
  } else if (key == "synth.informative") {
    synth.informative.clear();
    std::string_view rest = value;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = trim(rest.substr(0, comma));
      const auto cue = parse_cue(item);
      if (!cue) throw UsageError("unknown cue '" + std::string(item) + "'");
      synth.informative.push_back(*cue);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
  } else if (key == "synth.image_size") {
    synth.image_size = parse_number<int>(key, value);
  } else if (key == "synth.train") {
    synth.train_per_class = parse_number<int>(key, value);
  } else if (key == "synth.val") {
    synth.val_per_class = parse_number<int>(key, value);
  } else if (key == "synth.test") {
    synth.test_per_class = parse_number<int>(key, value);
  } else if (key == "ingest.train_fraction") {
    ingest_train_fraction = parse_number<double>(key, value);
  } else if (key == "ingest.val_fraction") {
    ingest_val_fraction = parse_number<double>(key, value);
  } else if (key == "expand_gray") {
    expand_gray = parse_bool(key, value);
  } else {
    throw UsageError("unknown configuration key '" + std::string(key) + "'");
  }
}

void RunConfig::apply_text(std::string_view text) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError("config line " + std::to_string(line_no) + " is not key=value");
    }
    set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

void RunConfig::apply_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  apply_text(ss.str());
}

std::string RunConfig::serialize() const {
  std::map<std::string, std::string> kv;
  kv["seed"] = std::to_string(seed);
  // workers is omitted: it never changes outputs.
  kv["patch_size"] = std::to_string(ablation.patch_size);
  kv["sketch.sigma"] = format_double(ablation.sketch.sigma);
  kv["sketch.k"] = format_double(ablation.sketch.k);
  kv["sketch.epsilon"] = format_double(ablation.sketch.epsilon);
  kv["sketch.phi"] = format_double(ablation.sketch.phi);
  kv["shape_contrast"] = format_double(ablation.shape_contrast);
  kv["apr.variant"] = std::string(to_string(apr_variant));
  kv["apr.pairing"] = apr_pairing;
  kv["probe.feature"] = std::string(to_string(features.kind));
  kv["probe.downsample"] = std::to_string(features.downsample);
  kv["probe.dim"] = std::to_string(features.dim);
  kv["probe.bins"] = std::to_string(features.bins);
  kv["probe.learning_rate"] = format_double(train.learning_rate);
  kv["probe.epochs"] = std::to_string(train.max_epochs);
  kv["probe.l2"] = format_double(train.l2);
  kv["probe.patience"] = std::to_string(train.patience);
  kv["probe.eval_every"] = std::to_string(train.eval_every);
  kv["probe.repetitions"] = std::to_string(repetitions);
  std::string names;
  for (const auto st : settings) names += (names.empty() ? "" : ",") + std::string(to_string(st));
  kv["probe.settings"] = names;
  kv["synth.classes"] = std::to_string(synth.classes);
  std::string cues;
  for (const auto cue : synth.informative) cues += (cues.empty() ? "" : ",") + std::string(to_string(cue));
  kv["synth.informative"] = cues;
  kv["synth.image_size"] = std::to_string(synth.image_size);
  kv["synth.train"] = std::to_string(synth.train_per_class);
  kv["synth.val"] = std::to_string(synth.val_per_class);
  kv["synth.test"] = std::to_string(synth.test_per_class);
  kv["ingest.train_fraction"] = format_double(ingest_train_fraction);
  kv["ingest.val_fraction"] = format_double(ingest_val_fraction);
  kv["expand_gray"] = expand_gray ? "true" : "false";
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

ProtocolConfig RunConfig::protocol_config() const {
  ProtocolConfig pc;
  pc.features = features;
  pc.train = train;
  pc.ablation = ablation;
  pc.repetitions = repetitions;
  pc.settings = settings;
  pc.seed = seed;
  pc.workers = workers;
  return pc;
}

void write_config_snapshot(const RunConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / kConfigSnapshotFile);
  if (!out) throw DataError("cannot write config snapshot in " + dir.string());
  out << cfg.serialize();
}

}  // namespace featiso
