#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rppg/pad/features.hpp"

namespace rppg::pad {

// Polynomial kernel (gamma * <x, y> + coef0)^degree. gamma = 0 means
// 1 / feature_count, resolved at training time and stored in the model.
struct KernelParams {
  int degree = 3;
  double gamma = 0.0;
  double coef0 = 1.0;
  double c = 1.0;  // soft-margin penalty
};

// Per-feature standardization fitted on the training part only. A feature
// with zero variance maps to 0 so it cannot dominate the kernel.
struct FeatureScaler {
  std::vector<double> mean;
  std::vector<double> sigma;

  std::vector<double> apply(std::span<const double> x) const;
};

struct SvmModel {
  KernelParams kernel;
  FeatureScaler scaler;
  std::vector<std::vector<double>> support_vectors;  // standardized space
  std::vector<double> coefficients;                  // alpha_i * y_i
  double bias = 0.0;
};

struct Prediction {
  int label = 0;          // 1 = attack
  double decision = 0.0;  // positive values fall on the attack side
};

struct FoldStat {
  int fold = 0;
  std::size_t test_count = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
};

struct CvReport {
  std::vector<FoldStat> folds;
  double accuracy = 0.0;  // pooled over every fold's test samples
  // confusion[actual][predicted]; row sums equal the class counts.
  std::array<std::array<std::size_t, 2>, 2> confusion = {};
};

struct TrainResult {
  SvmModel model;
  CvReport cv;
};

// Optional SMO introspection for verification.
struct SmoDiagnostics {
  std::vector<double> dual_trace;  // dual objective after every update
  std::size_t iterations = 0;
};

// Sequential minimal optimization on a raw feature matrix (rows already
// standardized by the caller). labels are {0, 1}. The returned model has an
// identity scaler.
SvmModel svm_train_matrix(const std::vector<std::vector<double>>& x,
                          const std::vector<int>& labels,
                          const KernelParams& params = {},
                          SmoDiagnostics* diag = nullptr);

// Full training path on PadSamples: subject-disjoint cross-validation over
// `folds` folds (scaler refitted per fold), then a final model fitted on all
// samples.
TrainResult svm_train(std::span<const PadSample> samples, int folds = 10,
                      const KernelParams& params = {});

Prediction svm_predict(const SvmModel& model,
                       std::span<const double> features);

// Subjects, ordered by sample count (descending, name as tie-break), are
// greedily assigned to the currently lightest fold; returns one fold index
// per sample.
std::vector<int> assign_subject_folds(std::span<const PadSample> samples,
                                      int folds);

void save_model_json(const SvmModel& model, const std::string& path);
SvmModel load_model_json(const std::string& path);

}  // namespace rppg::pad
