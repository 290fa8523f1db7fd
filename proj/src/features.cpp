#include "featiso/probe.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "featiso/rng.hpp"

namespace featiso {

namespace {

constexpr std::array<std::string_view, 3> kFeatureNames = {"raw_downsample", "random_relu",
                                                           "channel_hist"};
constexpr double kReluBiasScale = 0.1;

// Row i spreads pixel j's unit width over output cells in proportion to overlap,
// normalized so every output cell is an average.
Eigen::MatrixXd overlap_matrix(Eigen::Index out, Eigen::Index in) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(out, in);
  const double cell = static_cast<double>(in) / static_cast<double>(out);
  for (Eigen::Index i = 0; i < out; ++i) {
    const double lo = i * cell;
    const double hi = (i + 1) * cell;
    const auto first = static_cast<Eigen::Index>(std::floor(lo));
    const auto last = std::min<Eigen::Index>(in - 1, static_cast<Eigen::Index>(std::ceil(hi)) - 1);
    for (Eigen::Index j = first; j <= last; ++j) {
      const double overlap = std::min(hi, double(j + 1)) - std::max(lo, double(j));
      if (overlap > 0) m(i, j) = overlap / cell;
    }
  }
  return m;
}

Eigen::VectorXd raw_vector(const Image& img, int d) {
  const Eigen::MatrixXd rows = overlap_matrix(d, img.rows());
  const Eigen::MatrixXd cols = overlap_matrix(d, img.cols());
  Eigen::VectorXd out(3 * d * d);
  for (int c = 0; c < 3; ++c) {
    const Eigen::MatrixXd pooled = rows * img.channel(c).matrix() * cols.transpose();
    for (int r = 0; r < d; ++r) {
      for (int k = 0; k < d; ++k) out[c * d * d + r * d + k] = pooled(r, k);
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(FeatureKind kind) { return kFeatureNames[static_cast<std::size_t>(kind)]; }

std::optional<FeatureKind> parse_feature_kind(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureNames.size(); ++i) {
    if (name == kFeatureNames[i]) return static_cast<FeatureKind>(i);
  }
  return std::nullopt;
}

Eigen::MatrixXd area_downsample(const Plane<double>& src, Eigen::Index rows, Eigen::Index cols) {
  return overlap_matrix(rows, src.rows()) * src.matrix() * overlap_matrix(cols, src.cols()).transpose();
}

FeatureMap::FeatureMap(FeatureSpec spec) : spec_(spec) {
  if (spec_.downsample < 1) throw UsageError("feature downsample must be positive");
  if (spec_.bins < 1) throw UsageError("histogram bins must be positive");
  if (spec_.kind == FeatureKind::kRandomRelu) {
    if (spec_.dim < 1) throw UsageError("random_relu dimension must be positive");
    const Eigen::Index in = 3 * Eigen::Index{spec_.downsample} * spec_.downsample;
    RngStream rng(spec_.seed, "feature_map", "random_relu");
    const double w_scale = 1.0 / std::sqrt(static_cast<double>(in));
    weights_.resize(spec_.dim, in);
    for (Eigen::Index i = 0; i < weights_.size(); ++i) weights_.data()[i] = rng.normal() * w_scale;
    bias_.resize(spec_.dim);
    for (Eigen::Index i = 0; i < bias_.size(); ++i) bias_[i] = rng.normal() * kReluBiasScale;
  }
}

Eigen::Index FeatureMap::output_dim() const {
  switch (spec_.kind) {
    case FeatureKind::kRawDownsample:
      return 3 * Eigen::Index{spec_.downsample} * spec_.downsample;
    case FeatureKind::kRandomRelu:
      return spec_.dim;
    case FeatureKind::kChannelHist:
      return 3 * Eigen::Index{spec_.bins};
  }
  return 0;
}

Eigen::VectorXd FeatureMap::extract(const Image& img) const {
  switch (spec_.kind) {
    case FeatureKind::kRawDownsample:
      return raw_vector(img, spec_.downsample);
    case FeatureKind::kRandomRelu: {
      const Eigen::VectorXd x = raw_vector(img, spec_.downsample).array() - 0.5;
      return (weights_ * x + bias_).cwiseMax(0.0);
    }
    case FeatureKind::kChannelHist: {
      Eigen::VectorXd out = Eigen::VectorXd::Zero(3 * spec_.bins);
      const double inv_n = 1.0 / static_cast<double>(img.pixel_count());
      for (int c = 0; c < 3; ++c) {
        const auto& ch = img.channel(c);
        for (Eigen::Index i = 0; i < ch.size(); ++i) {
          const int bin = std::min(spec_.bins - 1, static_cast<int>(ch.data()[i] * spec_.bins));
          out[c * spec_.bins + bin] += inv_n;
        }
      }
      return out;
    }
  }
  throw InvariantError("unknown feature kind");
}

}  // namespace featiso
