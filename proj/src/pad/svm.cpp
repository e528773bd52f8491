#include "rppg/pad/svm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include "json.hpp"
#include "rppg/errors.hpp"

namespace rppg::pad {
namespace {

constexpr const char* kWhere = "pad.svm";
constexpr double kStopTol = 1e-4;      // duality-gap stopping threshold
constexpr double kTau = 1e-12;         // curvature floor for the pair solve
constexpr std::size_t kMaxIter = 1000000;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double kernel_eval(const KernelParams& k, std::span<const double> a,
                   std::span<const double> b) {
  const double base = k.gamma * dot(a, b) + k.coef0;
  if (k.degree == 3) return base * base * base;
  return std::pow(base, k.degree);
}

std::vector<double> feature_row(const PadSample& s) {
  return {s.snr_db, s.magnitude, s.rho_ref};
}

FeatureScaler fit_scaler(const std::vector<std::vector<double>>& x) {
  FeatureScaler sc;
  if (x.empty()) return sc;
  const std::size_t dim = x[0].size();
  sc.mean.assign(dim, 0.0);
  sc.sigma.assign(dim, 0.0);
  for (const auto& row : x)
    for (std::size_t d = 0; d < dim; ++d) sc.mean[d] += row[d];
  for (std::size_t d = 0; d < dim; ++d)
    sc.mean[d] /= static_cast<double>(x.size());
  for (const auto& row : x)
    for (std::size_t d = 0; d < dim; ++d) {
      const double c = row[d] - sc.mean[d];
      sc.sigma[d] += c * c;
    }
  for (std::size_t d = 0; d < dim; ++d)
    sc.sigma[d] = std::sqrt(sc.sigma[d] / static_cast<double>(x.size()));
  return sc;
}

}  // namespace

std::vector<double> FeatureScaler::apply(std::span<const double> x) const {
  std::vector<double> z(x.size());
  for (std::size_t d = 0; d < x.size(); ++d)
    z[d] = sigma[d] > 0.0 ? (x[d] - mean[d]) / sigma[d] : 0.0;
  return z;
}

SvmModel svm_train_matrix(const std::vector<std::vector<double>>& x,
                          const std::vector<int>& labels,
                          const KernelParams& params, SmoDiagnostics* diag) {
  const std::size_t n = x.size();
  if (n < 2)
    fail(Errc::InsufficientData, kWhere, "need at least two samples");
  if (labels.size() != n)
    fail(Errc::DimensionMismatch, kWhere, "one label per sample required");
  const std::size_t dim = x[0].size();
  if (dim == 0) fail(Errc::DimensionMismatch, kWhere, "empty feature rows");
  for (const auto& row : x)
    if (row.size() != dim)
      fail(Errc::DimensionMismatch, kWhere, "ragged feature matrix");

  std::vector<double> y(n);
  bool has_pos = false;
  bool has_neg = false;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = labels[i] == 1 ? 1.0 : -1.0;
    (labels[i] == 1 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg)
    fail(Errc::SingleClass, kWhere, "training data contains a single class");

  KernelParams kp = params;
  if (kp.gamma <= 0.0) kp.gamma = 1.0 / static_cast<double>(dim);
  const double c_up = kp.c;

  // Full Gram cache of Q_ij = y_i y_j K(x_i, x_j); the training sets here are
  // a few thousand rows at most, so the O(n^2) table is the fast path.
  std::vector<double> q(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = y[i] * y[j] * kernel_eval(kp, x[i], x[j]);
      q[i * n + j] = v;
      q[j * n + i] = v;
    }
  }

  // Minimize f(a) = a'Qa/2 - sum(a) s.t. 0 <= a <= C, y'a = 0.
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // gradient of f at a = 0

  auto dual_objective = [&] {
    // W(a) = sum(a) - a'Qa/2, the maximized form; grad = Qa - 1.
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      w += alpha[i] - 0.5 * alpha[i] * (grad[i] + 1.0);
    return w;
  };

  std::size_t iter = 0;
  for (;; ++iter) {
    if (iter >= kMaxIter)
      fail(Errc::NoConvergence, kWhere,
           "SMO did not converge within the iteration budget");

    // First-order working-set selection over the box-feasible directions.
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    std::size_t i_sel = n;
    std::size_t j_sel = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      const bool in_up = (y[t] > 0.0 && alpha[t] < c_up) ||
                         (y[t] < 0.0 && alpha[t] > 0.0);
      const bool in_low = (y[t] > 0.0 && alpha[t] > 0.0) ||
                          (y[t] < 0.0 && alpha[t] < c_up);
      if (in_up && v > m_up) {
        m_up = v;
        i_sel = t;
      }
      if (in_low && v < m_low) {
        m_low = v;
        j_sel = t;
      }
    }
    if (i_sel == n || j_sel == n || m_up - m_low <= kStopTol) break;

    const std::size_t i = i_sel;
    const std::size_t j = j_sel;
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = q[i * n + i] + q[j * n + j] + 2.0 * q[i * n + j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else {
        if (alpha[i] < 0.0) {
          alpha[i] = 0.0;
          alpha[j] = -diff;
        }
      }
      if (diff > 0.0) {
        if (alpha[i] > c_up) {
          alpha[i] = c_up;
          alpha[j] = c_up - diff;
        }
      } else {
        if (alpha[j] > c_up) {
          alpha[j] = c_up;
          alpha[i] = c_up + diff;
        }
      }
    } else {
      double quad = q[i * n + i] + q[j * n + j] - 2.0 * q[i * n + j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c_up) {
        if (alpha[i] > c_up) {
          alpha[i] = c_up;
          alpha[j] = sum - c_up;
        }
        if (alpha[j] > c_up) {
          alpha[j] = c_up;
          alpha[i] = sum - c_up;
        }
      } else {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = sum;
        }
        if (alpha[i] < 0.0) {
          alpha[i] = 0.0;
          alpha[j] = sum;
        }
      }
    }

    const double dai = alpha[i] - old_ai;
    const double daj = alpha[j] - old_aj;
    const double* qi = &q[i * n];
    const double* qj = &q[j * n];
    for (std::size_t t = 0; t < n; ++t) grad[t] += qi[t] * dai + qj[t] * daj;

    if (diag != nullptr) diag->dual_trace.push_back(dual_objective());
  }
  if (diag != nullptr) diag->iterations = iter;

  // Bias from the KKT condition of the free support vectors; when none are
  // free, the midpoint of the feasible interval.
  double bias_sum = 0.0;
  std::size_t n_free = 0;
  double m_up = -std::numeric_limits<double>::infinity();
  double m_low = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < n; ++t) {
    const double v = -y[t] * grad[t];
    const bool in_up = (y[t] > 0.0 && alpha[t] < c_up) ||
                       (y[t] < 0.0 && alpha[t] > 0.0);
    const bool in_low = (y[t] > 0.0 && alpha[t] > 0.0) ||
                        (y[t] < 0.0 && alpha[t] < c_up);
    if (in_up) m_up = std::max(m_up, v);
    if (in_low) m_low = std::min(m_low, v);
    if (alpha[t] > 0.0 && alpha[t] < c_up) {
      bias_sum += v;
      ++n_free;
    }
  }
  const double bias = n_free > 0
                          ? bias_sum / static_cast<double>(n_free)
                          : 0.5 * (m_up + m_low);

  SvmModel model;
  model.kernel = kp;
  model.scaler.mean.assign(dim, 0.0);  // identity: caller standardized
  model.scaler.sigma.assign(dim, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] > 0.0) {
      model.support_vectors.push_back(x[i]);
      model.coefficients.push_back(alpha[i] * y[i]);
    }
  }
  model.bias = bias;
  return model;
}

std::vector<int> assign_subject_folds(std::span<const PadSample> samples,
                                      int folds) {
  std::map<std::string, std::size_t> counts;
  for (const auto& s : samples) ++counts[s.subject_id];
  std::vector<std::pair<std::string, std::size_t>> subjects(counts.begin(),
                                                            counts.end());
  std::sort(subjects.begin(), subjects.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  std::vector<std::size_t> load(static_cast<std::size_t>(folds), 0);
  std::map<std::string, int> fold_of;
  for (const auto& [name, count] : subjects) {
    const auto lightest = std::min_element(load.begin(), load.end());
    fold_of[name] = static_cast<int>(lightest - load.begin());
    *lightest += count;
  }
  std::vector<int> assignment(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    assignment[i] = fold_of[samples[i].subject_id];
  return assignment;
}

TrainResult svm_train(std::span<const PadSample> samples, int folds,
                      const KernelParams& params) {
  if (folds < 2)
    fail(Errc::BadConfig, kWhere, "cross-validation needs at least 2 folds");
  if (samples.empty())
    fail(Errc::InsufficientData, kWhere, "no samples");

  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::map<std::string, bool> subjects;
  for (const auto& s : samples) {
    (s.label == 1 ? n_pos : n_neg)++;
    subjects[s.subject_id] = true;
  }
  if (n_pos == 0 || n_neg == 0)
    fail(Errc::SingleClass, kWhere, "both classes must be present");
  if (n_pos < static_cast<std::size_t>(folds) ||
      n_neg < static_cast<std::size_t>(folds))
    fail(Errc::InsufficientData, kWhere,
         "need at least `folds` samples of each class");
  if (subjects.size() < static_cast<std::size_t>(folds))
    fail(Errc::InsufficientData, kWhere,
         "need at least `folds` distinct subjects for disjoint folds");

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  rows.reserve(samples.size());
  labels.reserve(samples.size());
  for (const auto& s : samples) {
    rows.push_back(feature_row(s));
    labels.push_back(s.label);
  }

  const std::vector<int> fold_of = assign_subject_folds(samples, folds);

  TrainResult out;
  std::size_t pooled_correct = 0;
  std::size_t pooled_total = 0;
  for (int f = 0; f < folds; ++f) {
    std::vector<std::vector<double>> train_x;
    std::vector<int> train_y;
    std::vector<std::size_t> test_idx;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (fold_of[i] == f) {
        test_idx.push_back(i);
      } else {
        train_x.push_back(rows[i]);
        train_y.push_back(labels[i]);
      }
    }

    FeatureScaler sc = fit_scaler(train_x);
    std::vector<std::vector<double>> train_z;
    train_z.reserve(train_x.size());
    for (const auto& r : train_x) train_z.push_back(sc.apply(r));
    SvmModel fold_model = svm_train_matrix(train_z, train_y, params);
    fold_model.scaler = sc;

    FoldStat stat;
    stat.fold = f;
    stat.test_count = test_idx.size();
    for (std::size_t i : test_idx) {
      const Prediction p = svm_predict(fold_model, rows[i]);
      if (p.label == labels[i]) ++stat.correct;
      ++out.cv.confusion[static_cast<std::size_t>(labels[i])]
                        [static_cast<std::size_t>(p.label)];
    }
    stat.accuracy = stat.test_count > 0
                        ? static_cast<double>(stat.correct) /
                              static_cast<double>(stat.test_count)
                        : 0.0;
    pooled_correct += stat.correct;
    pooled_total += stat.test_count;
    out.cv.folds.push_back(stat);
  }
  out.cv.accuracy = pooled_total > 0 ? static_cast<double>(pooled_correct) /
                                           static_cast<double>(pooled_total)
                                     : 0.0;

  FeatureScaler sc = fit_scaler(rows);
  std::vector<std::vector<double>> z;
  z.reserve(rows.size());
  for (const auto& r : rows) z.push_back(sc.apply(r));
  out.model = svm_train_matrix(z, labels, params);
  out.model.scaler = sc;
  return out;
}

Prediction svm_predict(const SvmModel& model,
                       std::span<const double> features) {
  if (features.size() != model.scaler.mean.size())
    fail(Errc::DimensionMismatch, "pad.predict",
         "feature dimension does not match the model");
  const std::vector<double> z = model.scaler.apply(features);
  double decision = model.bias;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
    decision += model.coefficients[i] *
                kernel_eval(model.kernel, model.support_vectors[i], z);
  Prediction p;
  p.decision = decision;
  p.label = decision >= 0.0 ? 1 : 0;  // boundary counts as attack
  return p;
}

void save_model_json(const SvmModel& model, const std::string& path) {
  nlohmann::json j;
  j["kernel"] = {{"degree", model.kernel.degree},
                 {"gamma", model.kernel.gamma},
                 {"coef0", model.kernel.coef0},
                 {"c", model.kernel.c}};
  j["scaler"] = {{"mean", model.scaler.mean}, {"sigma", model.scaler.sigma}};
  j["support_vectors"] = model.support_vectors;
  j["coefficients"] = model.coefficients;
  j["bias"] = model.bias;
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::IoFailure, "pad.save_model", "cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) fail(Errc::IoFailure, "pad.save_model", "write failed: " + path);
}

SvmModel load_model_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoFailure, "pad.load_model", "cannot open " + path);
  SvmModel model;
  try {
    nlohmann::json j = nlohmann::json::parse(in);
    model.kernel.degree = j.at("kernel").at("degree").get<int>();
    model.kernel.gamma = j.at("kernel").at("gamma").get<double>();
    model.kernel.coef0 = j.at("kernel").at("coef0").get<double>();
    model.kernel.c = j.at("kernel").at("c").get<double>();
    model.scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
    model.scaler.sigma = j.at("scaler").at("sigma").get<std::vector<double>>();
    model.support_vectors =
        j.at("support_vectors").get<std::vector<std::vector<double>>>();
    model.coefficients = j.at("coefficients").get<std::vector<double>>();
    model.bias = j.at("bias").get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::BadModel, "pad.load_model",
         std::string("malformed model file: ") + e.what());
  }
  if (model.support_vectors.size() != model.coefficients.size())
    fail(Errc::BadModel, "pad.load_model",
         "support vector and coefficient counts differ");
  if (model.scaler.mean.size() != model.scaler.sigma.size())
    fail(Errc::BadModel, "pad.load_model", "scaler shape mismatch");
  for (const auto& sv : model.support_vectors)
    if (sv.size() != model.scaler.mean.size())
      fail(Errc::BadModel, "pad.load_model",
           "support vector dimension does not match the scaler");
  return model;
}

}  // namespace rppg::pad
