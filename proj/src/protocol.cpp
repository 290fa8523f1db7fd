#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <unordered_map>

#include "featiso/parallel.hpp"
#include "featiso/probe.hpp"
#include "featiso/spectral.hpp"

namespace featiso {

namespace {

constexpr std::array<std::string_view, 9> kSettingNames = {
    "original",      "color_only",    "shape_only",     "texture_only", "texture_shape",
    "texture_color", "shape_color",   "amplitude_only", "phase_only"};
constexpr std::array<std::string_view, 4> kProtocolNames = {"train_on_ablation", "cross_transfer",
                                                            "dfr", "spectral_randomization"};

struct SplitFeatures {
  FeatureSet train;
  FeatureSet val;
  FeatureSet test;
};

bool needs_mask(Setting s) {
  const auto kind = as_ablation(s);
  return kind && requires_mask(*kind);
}

class FeatureCache {
 public:
  FeatureCache(const LabeledDataset& data, const VariantMap& variants, const AblationConfig& cfg,
               const FeatureMap& features, std::uint64_t seed, int workers)
      : data_(data), variants_(variants), cfg_(cfg), features_(features), seed_(seed), workers_(workers) {}

  const SplitFeatures& get(Setting s) {
    auto it = cache_.find(s);
    if (it == cache_.end()) it = cache_.emplace(s, compute(s)).first;
    return it->second;
  }

 private:
  SplitFeatures compute(Setting s) {
    const LabeledDataset* materialized = nullptr;
    if (auto v = variants_.find(s); v != variants_.end()) materialized = v->second;
    std::unordered_map<std::string, const Sample*> by_id;
    if (materialized) {
      for (const auto& sample : materialized->samples) by_id.emplace(sample.id, &sample);
    }

    const auto n = data_.samples.size();
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(n), features_.output_dim());
    parallel_for(n, workers_, [&](std::size_t i) {
      const Sample& sample = data_.samples[i];
      if (materialized) {
        const auto found = by_id.find(sample.id);
        if (found == by_id.end()) {
          throw DataError("variant " + std::string(to_string(s)) + " lacks sample " + sample.id);
        }
        rows.row(static_cast<Eigen::Index>(i)) = features_.extract(found->second->image).transpose();
      } else {
        rows.row(static_cast<Eigen::Index>(i)) =
            features_.extract(render_setting(s, sample, cfg_, seed_)).transpose();
      }
    });

    SplitFeatures out;
    auto pick = [&](Split split, FeatureSet& dst) {
      std::vector<Eigen::Index> idx;
      for (std::size_t i = 0; i < n; ++i) {
        if (data_.samples[i].split == split) {
          idx.push_back(static_cast<Eigen::Index>(i));
          dst.y.push_back(data_.samples[i].label);
        }
      }
      dst.x = rows(idx, Eigen::all);
    };
    pick(Split::kTrain, out.train);
    pick(Split::kVal, out.val);
    pick(Split::kTest, out.test);
    return out;
  }

  const LabeledDataset& data_;
  const VariantMap& variants_;
  const AblationConfig& cfg_;
  const FeatureMap& features_;
  std::uint64_t seed_;
  int workers_;
  std::map<Setting, SplitFeatures> cache_;
};

std::vector<Setting> default_settings(Protocol p) {
  if (p == Protocol::kSpectralRandomization) return {Setting::kAmplitudeOnly, Setting::kPhaseOnly};
  return {Setting::kColorOnly,   Setting::kShapeOnly,    Setting::kTextureOnly,
          Setting::kTextureShape, Setting::kTextureColor, Setting::kShapeColor};
}

double delta_or_nan(double baseline, double value) {
  return baseline > 0.0 ? relative_delta(100.0 * baseline, 100.0 * value)
                        : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::string_view to_string(Setting s) { return kSettingNames[static_cast<std::size_t>(s)]; }

std::optional<Setting> parse_setting(std::string_view name) {
  for (std::size_t i = 0; i < kSettingNames.size(); ++i) {
    if (name == kSettingNames[i]) return static_cast<Setting>(i);
  }
  if (const auto kind = parse_ablation(name)) return from_ablation(*kind);
  return std::nullopt;
}

std::optional<AblationKind> as_ablation(Setting s) {
  if (s == Setting::kAmplitudeOnly || s == Setting::kPhaseOnly) return std::nullopt;
  return static_cast<AblationKind>(static_cast<int>(s));
}

Setting from_ablation(AblationKind kind) { return static_cast<Setting>(static_cast<int>(kind)); }

std::string setting_op_name(Setting s) {
  return (as_ablation(s) ? "ablate/" : "spectral/") + std::string(to_string(s));
}

Image render_setting(Setting s, const Sample& sample, const AblationConfig& cfg, std::uint64_t seed) {
  RngStream rng(seed, sample.id, setting_op_name(s));
  switch (s) {
    case Setting::kAmplitudeOnly:
      return phase_randomize(sample.image, rng);
    case Setting::kPhaseOnly:
      return amplitude_randomize(sample.image, rng);
    default:
      return apply_ablation(*as_ablation(s), sample.image, sample.mask, cfg, rng);
  }
}

std::string_view to_string(Protocol p) { return kProtocolNames[static_cast<std::size_t>(p)]; }

std::optional<Protocol> parse_protocol(std::string_view name) {
  for (std::size_t i = 0; i < kProtocolNames.size(); ++i) {
    if (name == kProtocolNames[i]) return static_cast<Protocol>(i);
  }
  return std::nullopt;
}

MetricsTable run_protocol(Protocol protocol, const LabeledDataset& data, const VariantMap& variants,
                          const ProtocolConfig& config) {
  if (config.repetitions < 1) throw UsageError("repetitions must be at least 1");
  if (data.class_count() < 2) throw DataError("dataset needs at least two classes");
  std::vector<Setting> settings = config.settings.empty() ? default_settings(protocol) : config.settings;
  std::erase(settings, Setting::kOriginal);
  if (protocol == Protocol::kSpectralRandomization) {
    for (const auto s : settings) {
      if (as_ablation(s)) throw UsageError("spectral_randomization takes spectral settings only");
    }
  }
  for (const auto s : settings) {
    if (needs_mask(s) && !variants.contains(s)) {
      for (const auto& sample : data.samples) {
        if (!sample.mask) {
          throw DataError(std::string(to_string(s)) + " needs masks; sample " + sample.id + " has none");
        }
      }
    }
  }

  AblationConfig ablation = config.ablation;
  ablation.mean_rgb = data.mean_rgb;
  const std::string protocol_name(to_string(protocol));

  MetricsTable table;
  for (int r = 0; r < config.repetitions; ++r) {
    const std::uint64_t seed = derive_seed(config.seed, static_cast<std::uint64_t>(r));
    FeatureSpec spec = config.features;
    spec.seed = seed;
    const FeatureMap features(spec);
    FeatureCache cache(data, variants, ablation, features, seed, config.workers);

    auto train = [&](const SplitFeatures& f) {
      ProbeModel model;
      model.classes = data.class_count();
      model.config = config.train;
      return train_head(std::move(model), f.train, &f.val);
    };
    auto emit = [&](std::string setting, const Metrics& m, double baseline_accuracy) {
      table.push_back({protocol_name, data.name, std::move(setting), seed, m.accuracy, m.macro_f1,
                       delta_or_nan(baseline_accuracy, m.accuracy)});
    };

    const SplitFeatures& original = cache.get(Setting::kOriginal);
    const ProbeModel baseline = train(original);
    const Metrics base_metrics = evaluate(baseline, original.test);
    const double base_acc = base_metrics.accuracy;

    switch (protocol) {
      case Protocol::kTrainOnAblation:
      case Protocol::kSpectralRandomization: {
        emit("original", base_metrics, base_acc);
        for (const auto s : settings) {
          const SplitFeatures& f = cache.get(s);
          emit(std::string(to_string(s)), evaluate(train(f), f.test), base_acc);
        }
        break;
      }
      case Protocol::kCrossTransfer: {
        emit("original->original", base_metrics, base_acc);
        for (const auto s : settings) {
          const SplitFeatures& f = cache.get(s);
          const std::string name(to_string(s));
          emit("original->" + name, evaluate(baseline, f.test), base_acc);
          emit(name + "->original", evaluate(train(f), original.test), base_acc);
        }
        break;
      }
      case Protocol::kDfr: {
        auto retrain = [&](const SplitFeatures& f) {
          ProbeModel head = baseline;
          return train_head(std::move(head), f.train, &f.val, HeadOptions{.freeze_scaler = true});
        };
        emit("original", evaluate(retrain(original), original.test), base_acc);
        for (const auto s : settings) {
          const SplitFeatures& f = cache.get(s);
          emit(std::string(to_string(s)), evaluate(retrain(f), f.test), base_acc);
        }
        break;
      }
    }
  }
  return table;
}

std::vector<SummaryRow> summarize(const MetricsTable& table) {
  std::vector<SummaryRow> out;
  std::vector<std::vector<const MetricsRow*>> groups;
  for (const auto& row : table) {
    auto it = std::find_if(out.begin(), out.end(), [&](const SummaryRow& s) {
      return s.protocol == row.protocol && s.setting == row.setting;
    });
    if (it == out.end()) {
      SummaryRow fresh;
      fresh.protocol = row.protocol;
      fresh.setting = row.setting;
      out.push_back(std::move(fresh));
      groups.emplace_back();
      it = out.end() - 1;
    }
    groups[static_cast<std::size_t>(it - out.begin())].push_back(&row);
  }
  auto stat = [](const std::vector<const MetricsRow*>& rows, double MetricsRow::*field) {
    SummaryStat s;
    const double n = static_cast<double>(rows.size());
    for (const auto* r : rows) s.mean += r->*field / n;
    if (rows.size() > 1) {
      double ss = 0.0;
      for (const auto* r : rows) ss += (r->*field - s.mean) * (r->*field - s.mean);
      s.sd = std::sqrt(ss / (n - 1.0));
    }
    return s;
  };
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].runs = groups[i].size();
    out[i].accuracy = stat(groups[i], &MetricsRow::accuracy);
    out[i].macro_f1 = stat(groups[i], &MetricsRow::macro_f1);
    out[i].relative_delta = stat(groups[i], &MetricsRow::relative_delta);
  }
  return out;
}

std::string to_csv(const MetricsTable& table) {
  std::string out = "protocol,dataset,setting,seed,accuracy,macro_f1,relative_delta\n";
  char buf[128];
  for (const auto& r : table) {
    std::snprintf(buf, sizeof buf, ",%llu,%.6f,%.6f,%.2f\n", static_cast<unsigned long long>(r.seed),
                  r.accuracy, r.macro_f1, r.relative_delta);
    out += r.protocol + "," + r.dataset + "," + r.setting + buf;
  }
  return out;
}

}  // namespace featiso
