#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fvkit/types.hpp"

namespace fvkit {

struct SvmOptions {
  double C = 1.0;
  std::size_t max_epochs = 20000;
  // Stop once the primal-dual gap of a binary problem falls below this.
  double gap_tol = 1e-3;
  std::uint64_t seed = 0;
};

// One-vs-rest linear SVMs. Row c of `weights` holds the weights of class
// `class_ids[c]`; the last column is the bias (trained as a constant feature
// of value 1).
struct SvmModel {
  std::vector<int> class_ids;  // ascending
  Matrix weights;              // classes x (dim + 1)

  std::size_t dim() const { return static_cast<std::size_t>(weights.cols() - 1); }
  friend bool operator==(const SvmModel&, const SvmModel&) = default;
};

struct BinarySvmReport {
  int class_id = 0;
  std::size_t epochs = 0;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  // 0.5 ||w||^2 - sum(alpha) after every epoch; dual coordinate descent
  // never increases it.
  std::vector<double> dual_objective_trace;
};

struct SvmTrainResult {
  SvmModel model;
  std::vector<BinarySvmReport> reports;
};

// Rows of X are samples.
SvmTrainResult svm_train(const RowMatrix& X, const std::vector<int>& labels, const SvmOptions& options);
SvmTrainResult svm_train(const std::vector<FisherVector>& vectors, const std::vector<int>& labels,
                         const SvmOptions& options);

struct Prediction {
  std::vector<int> labels;
  RowMatrix scores;  // samples x classes, columns follow SvmModel::class_ids
};

// Argmax of the per-class scores; ties go to the lowest class id.
Prediction svm_predict(const SvmModel& model, const RowMatrix& X);
Prediction svm_predict(const SvmModel& model, const std::vector<FisherVector>& vectors);

enum class Metric { Accuracy, MeanAveragePrecision };

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

// Non-interpolated AP: mean over positives of the precision at their rank.
// Equal scores keep input order.
double average_precision(const std::vector<double>& scores, const std::vector<bool>& positive);

// Mean over the model's classes that have at least one positive.
double mean_average_precision(const Prediction& prediction, const std::vector<int>& class_ids,
                              const std::vector<int>& truth);

double evaluate(const Prediction& prediction, const std::vector<int>& class_ids, const std::vector<int>& truth,
                Metric metric);

RowMatrix stack_rows(const std::vector<FisherVector>& vectors);

}  // namespace fvkit
