#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "featiso/probe.hpp"

namespace featiso {

FeatureScaler FeatureScaler::fit(const Eigen::MatrixXd& x) {
  FeatureScaler s;
  const double n = static_cast<double>(x.rows());
  s.mean = x.colwise().mean();
  const Eigen::RowVectorXd var = (x.rowwise() - s.mean).array().square().colwise().sum() / n;
  const double norm = 1.0 / std::sqrt(static_cast<double>(x.cols()));
  s.scale = var.unaryExpr([norm](double v) { return v > 1e-16 ? norm / std::sqrt(v) : 0.0; });
  return s;
}

Eigen::MatrixXd FeatureScaler::apply(const Eigen::MatrixXd& x) const {
  if (x.cols() != mean.size()) throw DataError("feature width does not match the fitted scaler");
  return ((x.rowwise() - mean).array().rowwise() * scale.array()).matrix();
}

Eigen::MatrixXd ProbeModel::logits(const Eigen::MatrixXd& features) const {
  return (scaler.apply(features) * weights.transpose()).rowwise() + bias.transpose();
}

std::vector<int> ProbeModel::predict(const Eigen::MatrixXd& features) const {
  return argmax_rows(logits(features));
}

std::vector<int> argmax_rows(const Eigen::MatrixXd& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c) {
      if (scores(r, c) > scores(r, best)) best = c;
    }
    out[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return out;
}

LossGradient softmax_loss(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                          const Eigen::MatrixXd& x, const std::vector<int>& y, double l2) {
  const auto n = x.rows();
  Eigen::MatrixXd z = (x * weights.transpose()).rowwise() + bias.transpose();
  const Eigen::VectorXd zmax = z.rowwise().maxCoeff();
  z.colwise() -= zmax;
  Eigen::MatrixXd p = z.array().exp();
  const Eigen::VectorXd norm = p.rowwise().sum();
  p.array().colwise() /= norm.array();

  LossGradient out;
  double nll = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int label = y[static_cast<std::size_t>(i)];
    nll -= z(i, label) - std::log(norm[i]);
    p(i, label) -= 1.0;
  }
  p /= static_cast<double>(n);
  out.loss = nll / static_cast<double>(n) + 0.5 * l2 * weights.squaredNorm();
  out.grad_weights = p.transpose() * x + l2 * weights;
  out.grad_bias = p.colwise().sum().transpose();
  return out;
}

ProbeModel train_head(ProbeModel model, const FeatureSet& train, const FeatureSet* val,
                      HeadOptions options) {
  if (train.x.rows() == 0) throw DataError("training split is empty");
  if (model.classes < 2) throw DataError("a probe needs at least two classes");
  std::vector<int> per_class(static_cast<std::size_t>(model.classes), 0);
  for (const int label : train.y) {
    if (label < 0 || label >= model.classes) throw DataError("label out of range");
    ++per_class[static_cast<std::size_t>(label)];
  }
  for (int k = 0; k < model.classes; ++k) {
    if (per_class[static_cast<std::size_t>(k)] == 0) {
      throw DataError("class " + std::to_string(k) + " is absent from the training split");
    }
  }

  if (!options.freeze_scaler || model.scaler.empty()) model.scaler = FeatureScaler::fit(train.x);
  const Eigen::MatrixXd x = model.scaler.apply(train.x);
  const FeatureSet& monitor = (val != nullptr && val->x.rows() > 0) ? *val : train;
  const Eigen::MatrixXd x_monitor = model.scaler.apply(monitor.x);

  const TrainConfig& cfg = model.config;
  model.weights = Eigen::MatrixXd::Zero(model.classes, x.cols());
  model.bias = Eigen::VectorXd::Zero(model.classes);

  ProbeModel best = model;
  double best_f1 = -1.0;
  double best_loss = std::numeric_limits<double>::infinity();
  int stale = 0;
  const int eval_every = std::max(1, cfg.eval_every);

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const LossGradient g = softmax_loss(model.weights, model.bias, x, train.y, cfg.l2);
    model.weights -= cfg.learning_rate * g.grad_weights;
    model.bias -= cfg.learning_rate * g.grad_bias;
    model.epochs_run = epoch;

    if (epoch % eval_every != 0 && epoch != cfg.max_epochs) continue;
    const Eigen::MatrixXd scores = (x_monitor * model.weights.transpose()).rowwise() + model.bias.transpose();
    const double f1 = evaluate(monitor.y, argmax_rows(scores), model.classes).macro_f1;
    const double loss = softmax_loss(model.weights, model.bias, x_monitor, monitor.y, 0.0).loss;
    const bool better = f1 > best_f1 + 1e-12 || (std::abs(f1 - best_f1) <= 1e-12 && loss < best_loss - 1e-12);
    if (better) {
      best = model;
      best_f1 = f1;
      best_loss = loss;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  best.epochs_run = model.epochs_run;
  return best;
}

Metrics evaluate(const std::vector<int>& truth, const std::vector<int>& predicted, int classes) {
  if (truth.empty()) throw DataError("cannot evaluate on an empty set");
  if (truth.size() != predicted.size()) throw DataError("prediction count differs from label count");
  Metrics m;
  m.confusion = Eigen::MatrixXi::Zero(classes, classes);
  for (std::size_t i = 0; i < truth.size(); ++i) ++m.confusion(truth[i], predicted[i]);
  m.accuracy = static_cast<double>(m.confusion.trace()) / static_cast<double>(truth.size());
  double f1_sum = 0.0;
  for (int k = 0; k < classes; ++k) {
    const double tp = m.confusion(k, k);
    const double denom = m.confusion.row(k).sum() + m.confusion.col(k).sum();
    f1_sum += denom > 0 ? 2.0 * tp / denom : 0.0;
  }
  m.macro_f1 = f1_sum / classes;
  return m;
}

Metrics evaluate(const ProbeModel& model, const FeatureSet& data) {
  return evaluate(data.y, model.predict(data.x), model.classes);
}

double relative_delta(double baseline, double value) {
  if (!(baseline > 0.0)) throw DataError("relative delta needs a positive baseline");
  return 100.0 * (value - baseline) / baseline;
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace featiso
