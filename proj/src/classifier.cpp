#include "fvkit/classifier.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "fvkit/errors.hpp"

namespace fvkit {

namespace {

// Dual coordinate descent for the hinge-loss SVM
//   min_w 0.5 ||w||^2 + C sum max(0, 1 - y_i w'x_i)
// on bias-augmented samples.
BinarySvmReport train_binary(const RowMatrix& X, const Vector& sqnorm, const std::vector<double>& y,
                             const SvmOptions& opt, std::mt19937_64& rng, Vector& w) {
  const auto n = X.rows();
  const auto d = X.cols();
  w = Vector::Zero(d + 1);
  Vector alpha = Vector::Zero(n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  BinarySvmReport report;
  for (std::size_t epoch = 1; epoch <= opt.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index i : order) {
      const double qii = sqnorm[i] + 1.0;
      const double yi = y[static_cast<std::size_t>(i)];
      const double margin = yi * (X.row(i).dot(w.head(d)) + w[d]);
      const double grad = margin - 1.0;
      const double next = std::clamp(alpha[i] - grad / qii, 0.0, opt.C);
      const double delta = next - alpha[i];
      if (delta != 0.0) {
        w.head(d).noalias() += (delta * yi) * X.row(i).transpose();
        w[d] += delta * yi;
        alpha[i] = next;
      }
    }

    const double half_ww = 0.5 * w.squaredNorm();
    double hinge = 0.0;
    const Vector scores = X * w.head(d);
    for (Eigen::Index i = 0; i < n; ++i)
      hinge += std::max(0.0, 1.0 - y[static_cast<std::size_t>(i)] * (scores[i] + w[d]));
    report.epochs = epoch;
    report.primal = half_ww + opt.C * hinge;
    report.dual = alpha.sum() - half_ww;
    report.gap = report.primal - report.dual;
    report.dual_objective_trace.push_back(half_ww - alpha.sum());
    if (report.gap <= opt.gap_tol) break;
  }
  return report;
}

}  // namespace

SvmTrainResult svm_train(const RowMatrix& X, const std::vector<int>& labels, const SvmOptions& options) {
  if (static_cast<std::size_t>(X.rows()) != labels.size()) throw DimensionError("svm: labels and samples disagree");
  if (X.rows() == 0 || X.cols() == 0) throw InvalidArgument("svm: empty training set");
  if (!(options.C > 0.0)) throw InvalidArgument("svm: C must be positive");
  if (!X.allFinite()) throw DataError("svm: non-finite training data");
  const std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw InvalidArgument("svm: need at least two classes");

  SvmTrainResult result;
  result.model.class_ids.assign(distinct.begin(), distinct.end());
  const auto classes = static_cast<Eigen::Index>(distinct.size());
  result.model.weights = Matrix::Zero(classes, X.cols() + 1);

  const Vector sqnorm = X.rowwise().squaredNorm();
  std::mt19937_64 rng(options.seed);
  for (Eigen::Index c = 0; c < classes; ++c) {
    const int id = result.model.class_ids[static_cast<std::size_t>(c)];
    std::vector<double> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == id ? 1.0 : -1.0;
    Vector w;
    auto report = train_binary(X, sqnorm, y, options, rng, w);
    report.class_id = id;
    result.model.weights.row(c) = w.transpose();
    result.reports.push_back(std::move(report));
  }
  return result;
}

RowMatrix stack_rows(const std::vector<FisherVector>& vectors) {
  if (vectors.empty()) throw InvalidArgument("no vectors");
  const auto len = vectors.front().values.size();
  RowMatrix X(static_cast<Eigen::Index>(vectors.size()), len);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].values.size() != len) throw DimensionError("vectors of different length");
    X.row(static_cast<Eigen::Index>(i)) = vectors[i].values.transpose();
  }
  return X;
}

SvmTrainResult svm_train(const std::vector<FisherVector>& vectors, const std::vector<int>& labels,
                         const SvmOptions& options) {
  return svm_train(stack_rows(vectors), labels, options);
}

Prediction svm_predict(const SvmModel& model, const RowMatrix& X) {
  const auto d = static_cast<Eigen::Index>(model.dim());
  if (X.cols() != d) throw DimensionError("svm_predict: sample length does not match model");
  Prediction p;
  p.scores = X * model.weights.leftCols(d).transpose();
  p.scores.rowwise() += model.weights.col(d).transpose();
  p.labels.resize(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < p.scores.cols(); ++c)
      if (p.scores(i, c) > p.scores(i, best)) best = c;
    p.labels[static_cast<std::size_t>(i)] = model.class_ids[static_cast<std::size_t>(best)];
  }
  return p;
}

Prediction svm_predict(const SvmModel& model, const std::vector<FisherVector>& vectors) {
  return svm_predict(model, stack_rows(vectors));
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) throw DimensionError("accuracy: lengths differ");
  if (truth.empty()) throw InvalidArgument("accuracy: empty input");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += predicted[i] == truth[i];
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

double average_precision(const std::vector<double>& scores, const std::vector<bool>& positive) {
  if (scores.size() != positive.size()) throw DimensionError("average_precision: lengths differ");
  if (scores.empty()) throw InvalidArgument("average_precision: empty input");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (positive[order[r]]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  if (hits == 0) throw InvalidArgument("average_precision: no positives");
  return sum / static_cast<double>(hits);
}

double mean_average_precision(const Prediction& prediction, const std::vector<int>& class_ids,
                              const std::vector<int>& truth) {
  if (static_cast<std::size_t>(prediction.scores.rows()) != truth.size())
    throw DimensionError("mAP: lengths differ");
  if (truth.empty()) throw InvalidArgument("mAP: empty input");
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t c = 0; c < class_ids.size(); ++c) {
    std::vector<bool> pos(truth.size());
    bool any = false;
    for (std::size_t i = 0; i < truth.size(); ++i) any |= (pos[i] = truth[i] == class_ids[c]);
    if (!any) continue;
    std::vector<double> s(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i)
      s[i] = prediction.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
    sum += average_precision(s, pos);
    ++used;
  }
  if (used == 0) throw InvalidArgument("mAP: no class has positives");
  return sum / static_cast<double>(used);
}

double evaluate(const Prediction& prediction, const std::vector<int>& class_ids, const std::vector<int>& truth,
                Metric metric) {
  if (metric == Metric::Accuracy) return accuracy(prediction.labels, truth);
  return mean_average_precision(prediction, class_ids, truth);
}

}  // namespace fvkit
