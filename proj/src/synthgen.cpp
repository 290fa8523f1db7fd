#include "featiso/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <string>

namespace featiso {

namespace {

using std::numbers::pi;

constexpr std::array<std::string_view, 3> kCueNames = {"color", "shape", "texture"};
constexpr std::array<std::string_view, 6> kShapeNames = {"disk",     "ellipse", "square",
                                                         "triangle", "star5",   "blob6"};
constexpr std::array<ShapeFamily, 6> kShapeOrder = {ShapeFamily::kDisk,   ShapeFamily::kTriangle,
                                                    ShapeFamily::kStar5,  ShapeFamily::kSquare,
                                                    ShapeFamily::kEllipse, ShapeFamily::kBlob6};

constexpr double kStarInnerRatio = 0.5;
constexpr double kBlobRipple = 0.25;
constexpr double kTextureDepth = 0.25;
constexpr double kNoiseSigma = 0.015;
constexpr double kCenterJitter = 0.04;   // fraction of the side
constexpr double kRotationJitter = 15.0;  // degrees
constexpr double kMinArea = 0.26;
constexpr double kMaxArea = 0.34;

struct Point {
  double x;
  double y;
};

bool inside_polygon(const std::vector<Point>& poly, Point p) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) {
      inside = !inside;
    }
  }
  return inside;
}

std::vector<Point> regular_star(int spikes, double outer, double inner) {
  std::vector<Point> pts;
  const int n = inner > 0 ? 2 * spikes : spikes;
  for (int i = 0; i < n; ++i) {
    const double r = (inner > 0 && i % 2 == 1) ? inner : outer;
    const double angle = -pi / 2 + 2 * pi * i / n;
    pts.push_back({r * std::cos(angle), r * std::sin(angle)});
  }
  return pts;
}

// Membership in the unit-area shape centred at the origin.
class UnitShape {
 public:
  explicit UnitShape(ShapeFamily family) : family_(family) {
    switch (family) {
      case ShapeFamily::kTriangle:
        polygon_ = regular_star(3, std::sqrt(4.0 / (3.0 * std::sqrt(3.0))), 0.0);
        break;
      case ShapeFamily::kStar5: {
        const double outer = std::sqrt(1.0 / (5.0 * kStarInnerRatio * std::sin(pi / 5)));
        polygon_ = regular_star(5, outer, kStarInnerRatio * outer);
        break;
      }
      default:
        break;
    }
  }

  [[nodiscard]] bool contains(Point p) const {
    switch (family_) {
      case ShapeFamily::kDisk:
        return p.x * p.x + p.y * p.y <= 1.0 / pi;
      case ShapeFamily::kEllipse: {
        const double b = 1.0 / std::sqrt(2.0 * pi);
        const double a = 2.0 * b;
        return (p.x * p.x) / (a * a) + (p.y * p.y) / (b * b) <= 1.0;
      }
      case ShapeFamily::kSquare:
        return std::abs(p.x) <= 0.5 && std::abs(p.y) <= 0.5;
      case ShapeFamily::kBlob6: {
        const double base = std::sqrt(1.0 / (pi * (1.0 + kBlobRipple * kBlobRipple / 2.0)));
        const double r = std::hypot(p.x, p.y);
        const double theta = std::atan2(p.y, p.x);
        return r <= base * (1.0 + kBlobRipple * std::cos(6.0 * theta));
      }
      case ShapeFamily::kTriangle:
      case ShapeFamily::kStar5:
        return inside_polygon(polygon_, p);
    }
    return false;
  }

 private:
  ShapeFamily family_;
  std::vector<Point> polygon_;
};

Rgb hsv_to_rgb(double hue_deg, double s, double v) {
  const double h = std::fmod(hue_deg, 360.0) / 60.0;
  const double c = v * s;
  const double x = c * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0));
  const double m = v - c;
  Rgb rgb;
  switch (static_cast<int>(h)) {
    case 0: rgb << c, x, 0; break;
    case 1: rgb << x, c, 0; break;
    case 2: rgb << 0, c, x; break;
    case 3: rgb << 0, x, c; break;
    case 4: rgb << x, 0, c; break;
    default: rgb << c, 0, x; break;
  }
  return rgb + m;
}

std::string sample_id(Split split, int label, int index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_c%d_%04d", std::string(to_string(split)).c_str(), label, index);
  return buf;
}

}  // namespace

std::string_view to_string(Cue cue) { return kCueNames[static_cast<std::size_t>(cue)]; }

std::optional<Cue> parse_cue(std::string_view name) {
  for (const auto cue : kAllCues) {
    if (name == to_string(cue)) return cue;
  }
  return std::nullopt;
}

std::string_view to_string(ShapeFamily family) {
  return kShapeNames[static_cast<std::size_t>(family)];
}

ShapeFamily shape_for_level(int level) { return kShapeOrder.at(static_cast<std::size_t>(level)); }

void CueSpec::validate() const {
  if (classes < 2 || classes > kMaxCueLevels) {
    throw UsageError("classes must be between 2 and " + std::to_string(kMaxCueLevels) +
                     " (cue levels available)");
  }
  if (informative.empty()) throw UsageError("at least one informative cue is required");
  for (std::size_t i = 0; i < informative.size(); ++i) {
    for (std::size_t j = i + 1; j < informative.size(); ++j) {
      if (informative[i] == informative[j]) throw UsageError("duplicate informative cue");
    }
  }
  if (image_size < 16) throw UsageError("image_size must be at least 16");
  if (train_per_class <= 0 || val_per_class <= 0 || test_per_class <= 0) {
    throw UsageError("samples per class must be positive in every split");
  }
}

bool CueSpec::is_informative(Cue cue) const {
  return std::find(informative.begin(), informative.end(), cue) != informative.end();
}

Rgb lesion_color(int level, int classes) {
  return hsv_to_rgb(20.0 + 360.0 * level / classes, 0.65, 0.55);
}

Rgb background_color() { return Rgb(0.86, 0.78, 0.72); }

std::pair<double, double> texture_wave(int level, int classes) {
  return {pi * level / classes, 6.0 + 3.0 * level};
}

std::pair<Image, Mask> render_sample(const CueRecord& levels, int classes, int image_size,
                                     RngStream& rng) {
  const int n = image_size;
  const UnitShape shape(shape_for_level(levels.level(Cue::kShape)));
  const double area = rng.uniform(kMinArea, kMaxArea);
  const double scale = std::sqrt(area) * n;
  const double cx = n * (0.5 + rng.uniform(-kCenterJitter, kCenterJitter));
  const double cy = n * (0.5 + rng.uniform(-kCenterJitter, kCenterJitter));
  const double rot = rng.uniform(-kRotationJitter, kRotationJitter) * pi / 180.0;
  const double cos_r = std::cos(rot);
  const double sin_r = std::sin(rot);

  const Rgb lesion = lesion_color(levels.level(Cue::kColor), classes) * rng.uniform(0.97, 1.03);
  const Rgb background = background_color() * rng.uniform(0.98, 1.02);
  const auto [orientation, frequency] = texture_wave(levels.level(Cue::kTexture), classes);
  const double wave_phase = rng.uniform(0.0, 2.0 * pi);
  const double kx = 2.0 * pi * frequency / n * std::cos(orientation);
  const double ky = 2.0 * pi * frequency / n * std::sin(orientation);

  Mask::Data mask_data(n, n);
  Planes<double> planes;
  for (auto& p : planes) p.resize(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double dx = (x + 0.5 - cx) / scale;
      const double dy = (y + 0.5 - cy) / scale;
      const Point local{cos_r * dx + sin_r * dy, -sin_r * dx + cos_r * dy};
      const bool in_lesion = shape.contains(local);
      mask_data(y, x) = in_lesion ? 1 : 0;
      Rgb value = background;
      if (in_lesion) {
        value = lesion * (1.0 + kTextureDepth * std::sin(kx * x + ky * y + wave_phase));
      }
      for (int c = 0; c < 3; ++c) planes[c](y, x) = value[c] + kNoiseSigma * rng.normal();
    }
  }
  return {Image::clamped(std::move(planes)), Mask(std::move(mask_data))};
}

SynthDataset generate(const CueSpec& spec) {
  spec.validate();
  SynthDataset out;
  out.data.seed = spec.seed;
  for (int k = 0; k < spec.classes; ++k) out.data.classes.push_back("class_" + std::to_string(k));

  const std::array<std::pair<Split, int>, 3> splits = {
      {{Split::kTrain, spec.train_per_class},
       {Split::kVal, spec.val_per_class},
       {Split::kTest, spec.test_per_class}}};

  for (const auto& [split, count] : splits) {
    for (int label = 0; label < spec.classes; ++label) {
      // Nuisance levels cycle through all K levels and are then shuffled, so
      // every class sees each nuisance level equally often.
      std::array<std::vector<int>, 3> nuisance;
      for (const auto cue : kAllCues) {
        if (spec.is_informative(cue)) continue;
        auto& lv = nuisance[static_cast<std::size_t>(cue)];
        for (int i = 0; i < count; ++i) lv.push_back(i % spec.classes);
        RngStream rng(spec.seed, std::string(to_string(split)) + "/" + std::to_string(label),
                      "synth/nuisance/" + std::string(to_string(cue)));
        rng.shuffle(std::span<int>(lv));
      }
      for (int i = 0; i < count; ++i) {
        CueRecord record;
        for (const auto cue : kAllCues) {
          record.level(cue) = spec.is_informative(cue)
                                  ? label
                                  : nuisance[static_cast<std::size_t>(cue)][static_cast<std::size_t>(i)];
        }
        Sample sample;
        sample.id = sample_id(split, label, i);
        sample.label = label;
        sample.split = split;
        RngStream rng(spec.seed, sample.id, "synth/render");
        auto [image, mask] = render_sample(record, spec.classes, spec.image_size, rng);
        sample.image = std::move(image);
        sample.mask = std::move(mask);
        out.data.samples.push_back(std::move(sample));
        out.cues.push_back(record);
      }
    }
  }
  out.data.mean_rgb = train_mean_rgb(out.data);
  return out;
}

double mutual_information(const std::vector<int>& x, const std::vector<int>& y) {
  if (x.size() != y.size() || x.empty()) throw DataError("mutual information needs paired samples");
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> px, py;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    joint[{x[i], y[i]}] += 1.0 / n;
    px[x[i]] += 1.0 / n;
    py[y[i]] += 1.0 / n;
  }
  double mi = 0.0;
  for (const auto& [key, p] : joint) mi += p * std::log(p / (px[key.first] * py[key.second]));
  return std::max(0.0, mi);
}

AuditReport audit(const LabeledDataset& data, const std::vector<CueRecord>& cues,
                  const CueSpec& spec) {
  if (cues.empty() || cues.size() != data.samples.size()) {
    throw DataError("cue records missing or not aligned with samples");
  }
  AuditReport report;
  report.classes = data.class_count();
  report.samples = data.samples.size();
  std::vector<int> labels;
  for (const auto& s : data.samples) labels.push_back(s.label);
  for (const auto cue : kAllCues) {
    std::vector<int> levels;
    for (const auto& r : cues) levels.push_back(r.level(cue));
    const auto i = static_cast<std::size_t>(cue);
    report.mutual_information[i] = mutual_information(levels, labels);
    report.informative[i] = spec.is_informative(cue);
  }
  return report;
}

}  // namespace featiso
