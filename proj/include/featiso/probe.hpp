#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "featiso/ablation.hpp"
#include "featiso/dataset.hpp"

namespace featiso {

// ---------------------------------------------------------------------------
// Frozen feature maps

enum class FeatureKind { kRawDownsample, kRandomRelu, kChannelHist };

std::string_view to_string(FeatureKind kind);
std::optional<FeatureKind> parse_feature_kind(std::string_view name);

struct FeatureSpec {
  FeatureKind kind = FeatureKind::kRandomRelu;
  int downsample = 16;  // d: raw_downsample grid, also the random_relu input
  int dim = 512;        // D: random_relu width
  int bins = 16;        // channel_hist bins per channel
  std::uint64_t seed = 0;
};

/// Parameters are drawn once at construction; equal specs give equal features.
///
/// - raw_downsample: area average onto a d x d grid (fractional overlap at
///   ragged edges), flattened channel-major, 3 d^2 values.
/// - random_relu: max(0, W (x - 0.5) + b) on the raw_downsample vector x, with
///   W ~ N(0, 1 / dim(x)) and b ~ N(0, 0.1^2).
/// - channel_hist: per-channel histograms over [0, 1] normalized to sum 1.
class FeatureMap {
 public:
  explicit FeatureMap(FeatureSpec spec);

  [[nodiscard]] Eigen::VectorXd extract(const Image& img) const;
  [[nodiscard]] Eigen::Index output_dim() const;
  [[nodiscard]] const FeatureSpec& spec() const { return spec_; }

 private:
  FeatureSpec spec_;
  Eigen::MatrixXd weights_;
  Eigen::VectorXd bias_;
};

/// Area-averaging downsample of one channel to rows x cols.
Eigen::MatrixXd area_downsample(const Plane<double>& src, Eigen::Index rows, Eigen::Index cols);

// ---------------------------------------------------------------------------
// Softmax head

/// Samples as rows.
struct FeatureSet {
  Eigen::MatrixXd x;
  std::vector<int> y;
};

/// Column standardization fitted on training features, then scaled by
/// 1/sqrt(D) so rows have unit expected squared norm. Constant columns are zeroed.
struct FeatureScaler {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static FeatureScaler fit(const Eigen::MatrixXd& x);
  [[nodiscard]] Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  [[nodiscard]] bool empty() const { return mean.size() == 0; }
};

struct TrainConfig {
  double learning_rate = 0.1;
  int max_epochs = 2000;
  double l2 = 1e-4;
  int patience = 20;    // evaluations without improvement
  int eval_every = 10;  // epochs
};

struct ProbeModel {
  int classes = 0;
  FeatureScaler scaler;
  Eigen::MatrixXd weights;  // classes x D
  Eigen::VectorXd bias;     // classes
  TrainConfig config;
  int epochs_run = 0;

  /// Logits for raw (unscaled) features.
  [[nodiscard]] Eigen::MatrixXd logits(const Eigen::MatrixXd& features) const;
  [[nodiscard]] std::vector<int> predict(const Eigen::MatrixXd& features) const;
};

struct LossGradient {
  double loss = 0.0;
  Eigen::MatrixXd grad_weights;
  Eigen::VectorXd grad_bias;
};

/// Mean softmax cross-entropy plus (l2 / 2) * ||W||^2, with gradients.
LossGradient softmax_loss(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                          const Eigen::MatrixXd& x, const std::vector<int>& y, double l2);

/// Row-wise argmax; ties go to the lowest class index.
std::vector<int> argmax_rows(const Eigen::MatrixXd& scores);

struct HeadOptions {
  /// Keep model.scaler instead of refitting it on the training features.
  bool freeze_scaler = false;
};

/// Full-batch gradient descent from a zero head. Validation macro-F1 is checked
/// every eval_every epochs (ties broken by lower validation loss); training
/// stops after `patience` checks without improvement and returns the best
/// snapshot. Without validation data the training split is monitored.
/// Throws DataError when a class is absent from `train`.
ProbeModel train_head(ProbeModel model, const FeatureSet& train, const FeatureSet* val,
                      HeadOptions options = {});

// ---------------------------------------------------------------------------
// Metrics

struct Metrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  Eigen::MatrixXi confusion;  // rows: true class, cols: predicted
};

/// F1 of a class with no true and no predicted members is 0.
/// Throws DataError on empty input.
Metrics evaluate(const std::vector<int>& truth, const std::vector<int>& predicted, int classes);
Metrics evaluate(const ProbeModel& model, const FeatureSet& data);

/// 100 * (value - baseline) / baseline. Throws DataError unless baseline > 0.
double relative_delta(double baseline, double value);
double round2(double v);

// ---------------------------------------------------------------------------
// Protocols

/// A data condition a probe is trained or tested under.
enum class Setting {
  kOriginal,
  kColorOnly,
  kShapeOnly,
  kTextureOnly,
  kTextureShape,
  kTextureColor,
  kShapeColor,
  kAmplitudeOnly,
  kPhaseOnly,
};

std::string_view to_string(Setting s);
std::optional<Setting> parse_setting(std::string_view name);
std::optional<AblationKind> as_ablation(Setting s);
Setting from_ablation(AblationKind kind);

/// RNG op name used for a setting, shared by on-the-fly and materialized paths.
std::string setting_op_name(Setting s);

/// Applies a setting to one sample with the stream (seed, sample.id, op name).
Image render_setting(Setting s, const Sample& sample, const AblationConfig& cfg, std::uint64_t seed);

enum class Protocol { kTrainOnAblation, kCrossTransfer, kDfr, kSpectralRandomization };

std::string_view to_string(Protocol p);
std::optional<Protocol> parse_protocol(std::string_view name);

struct ProtocolConfig {
  FeatureSpec features;
  TrainConfig train;
  AblationConfig ablation;  // mean_rgb is taken from the dataset
  /// Settings to evaluate besides the baseline. Empty selects the protocol's
  /// defaults: all six ablations, or amplitude_only + phase_only.
  std::vector<Setting> settings;
  int repetitions = 10;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct MetricsRow {
  std::string protocol;
  std::string dataset;
  std::string setting;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double relative_delta = 0.0;  // percent, accuracy vs the repetition's baseline
};

using MetricsTable = std::vector<MetricsRow>;

/// Materialized variants keyed by setting; sample ids must match the base dataset.
using VariantMap = std::map<Setting, const LabeledDataset*>;

/// Executes a protocol R times with seeds derive_seed(config.seed, r).
///
/// - train_on_ablation: one probe per setting, trained and tested on it.
/// - cross_transfer: "original->s" rows test the baseline probe on s;
///   "s->original" rows test the s-trained probe on original data.
/// - dfr: the baseline probe's feature map and scaler stay frozen; only the
///   head is retrained on each setting and tested on it.
/// - spectral_randomization: baseline, amplitude_only and phase_only probes.
///
/// Throws DataError when a setting needs masks the dataset lacks.
MetricsTable run_protocol(Protocol protocol, const LabeledDataset& data, const VariantMap& variants,
                          const ProtocolConfig& config);

struct SummaryStat {
  double mean = 0.0;
  double sd = 0.0;
};

struct SummaryRow {
  std::string protocol;
  std::string setting;
  std::size_t runs = 0;
  SummaryStat accuracy;
  SummaryStat macro_f1;
  SummaryStat relative_delta;
};

/// Mean and sample SD per (protocol, setting), in first-appearance order.
std::vector<SummaryRow> summarize(const MetricsTable& table);

/// CSV with header protocol,dataset,setting,seed,accuracy,macro_f1,relative_delta.
std::string to_csv(const MetricsTable& table);

}  // namespace featiso
