#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "descriptors.hpp"
#include "feature_stats.hpp"
#include "optimize.hpp"
#include "random.hpp"
#include "task.hpp"

namespace lma {

inline constexpr int kModelFormatVersion = 1;

enum class Solver { lbfgs, gradient_descent };

struct TrainConfig {
  double l2_lambda = 1.0;
  int max_iters = 1000;
  double grad_tol = 1e-6;
  std::uint64_t seed = 0;
  Solver solver = Solver::lbfgs;
  // 0 starts from all-zero parameters; otherwise N(0, init_scale^2) draws
  // from `seed`.
  double init_scale = 0.0;

  void validate() const {
    if (!(l2_lambda >= 0.0)) throw Error("l2_lambda must be >= 0");
    if (max_iters < 1) throw Error("max_iters must be >= 1");
    if (!(grad_tol > 0.0)) throw Error("grad_tol must be > 0");
  }
};

// Multinomial logistic regression on standardized features.
struct LinearModel {
  int class_count = 0;
  Matrix weights;  // class_count x dims
  std::vector<double> biases;
  Standardizer standardizer;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;
  TaskKind task = TaskKind::four_way;
  double l2_lambda = 0.0;

  std::size_t dims() const { return weights.cols(); }
  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

// Flat parameter layout: weights row-major (class_count x dims), then biases.
inline std::size_t parameter_count(int class_count, std::size_t dims) {
  return static_cast<std::size_t>(class_count) * (dims + 1);
}

struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};

namespace detail {

// Writes softmax probabilities into `prob` from the logits already in it.
inline void softmax_in_place(std::span<double> prob) {
  const double m = *std::max_element(prob.begin(), prob.end());
  double total = 0.0;
  for (auto& p : prob) {
    p = std::exp(p - m);
    total += p;
  }
  for (auto& p : prob) p /= total;
}

inline void check_finite(const Matrix& X) {
  for (std::size_t r = 0; r < X.rows(); ++r) {
    for (std::size_t c = 0; c < X.cols(); ++c) {
      if (!std::isfinite(X(r, c))) {
        throw Error("non-finite feature value at row " + std::to_string(r) + ", column " +
                    std::to_string(c));
      }
    }
  }
}

}  // namespace detail

// Mean cross-entropy of softmax(W x + b) plus (lambda/2)||W||^2, biases
// unpenalized, with its exact gradient written to `grad`.
inline double logistic_objective(std::span<const double> params, const Matrix& X,
                                 std::span<const int> y, int class_count, double l2_lambda,
                                 std::span<double> grad) {
  const std::size_t dims = X.cols();
  const auto C = static_cast<std::size_t>(class_count);
  assert(params.size() == parameter_count(class_count, dims) && grad.size() == params.size());
  const double* W = params.data();
  const double* b = params.data() + C * dims;
  std::fill(grad.begin(), grad.end(), 0.0);
  double* gW = grad.data();
  double* gb = grad.data() + C * dims;

  std::vector<double> z(C);
  double mean_loss = 0.0;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto x = X.row(i);
    for (std::size_t c = 0; c < C; ++c) {
      double s = b[c];
      const double* w = W + c * dims;
      for (std::size_t d = 0; d < dims; ++d) s += w[d] * x[d];
      z[c] = s;
    }
    const auto yi = static_cast<std::size_t>(y[i]);
    const double m = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (std::size_t c = 0; c < C; ++c) total += std::exp(z[c] - m);
    const double row_loss = m + std::log(total) - z[yi];
    // Running mean: exact when every row contributes the same value.
    mean_loss += (row_loss - mean_loss) / static_cast<double>(i + 1);
    for (std::size_t c = 0; c < C; ++c) {
      const double r = std::exp(z[c] - m) / total - (c == yi ? 1.0 : 0.0);
      double* gw = gW + c * dims;
      for (std::size_t d = 0; d < dims; ++d) gw[d] += r * x[d];
      gb[c] += r;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(X.rows());
  double penalty = 0.0;
  for (std::size_t k = 0; k < C * dims; ++k) {
    gW[k] = gW[k] * inv_n + l2_lambda * W[k];
    penalty += W[k] * W[k];
  }
  for (std::size_t c = 0; c < C; ++c) gb[c] *= inv_n;
  return mean_loss + 0.5 * l2_lambda * penalty;
}

inline LossGradient loss_and_gradient(std::span<const double> params, const Matrix& X,
                                      std::span<const int> y, int class_count, double l2_lambda) {
  if (X.rows() == 0 || X.rows() != y.size()) throw Error("loss_and_gradient: bad shapes");
  for (double p : params) {
    if (!std::isfinite(p)) throw Error("non-finite parameter");
  }
  detail::check_finite(X);
  LossGradient out;
  out.gradient.resize(params.size());
  out.loss = logistic_objective(params, X, y, class_count, l2_lambda, out.gradient);
  return out;
}

// Optimizer output on already standardized features.
inline OptimizeResult fit_logistic_parameters(const Matrix& Z, std::span<const int> y,
                                              int class_count, const TrainConfig& config) {
  std::vector<double> x0(parameter_count(class_count, Z.cols()), 0.0);
  if (config.init_scale > 0.0) {
    Rng rng(config.seed);
    for (auto& v : x0) v = config.init_scale * rng.normal();
  }
  const Objective f = [&](std::span<const double> p, std::span<double> g) {
    return logistic_objective(p, Z, y, class_count, config.l2_lambda, g);
  };
  const OptimizeOptions opt{config.max_iters, config.grad_tol, 10};
  return config.solver == Solver::lbfgs ? minimize_lbfgs(f, std::move(x0), opt)
                                        : minimize_gradient_descent(f, std::move(x0), opt);
}

// Fits the standardizer on X, then minimizes the regularized objective.
// Identical inputs give a bit-identical model.
inline LinearModel train(const Matrix& X, std::span<const int> y, int class_count,
                         const TrainConfig& config = {}, OptimizeResult* diagnostics = nullptr) {
  config.validate();
  if (class_count < 2) throw Error("need at least 2 classes");
  if (X.rows() != y.size()) throw Error("feature/label row count mismatch");
  if (X.rows() < static_cast<std::size_t>(class_count)) {
    throw Error("need at least one row per class: " + std::to_string(X.rows()) + " rows for " +
                std::to_string(class_count) + " classes");
  }
  std::vector<std::size_t> per_class(static_cast<std::size_t>(class_count), 0);
  for (int label : y) {
    if (label < 0 || label >= class_count) throw Error("label " + std::to_string(label) + " out of range");
    ++per_class[static_cast<std::size_t>(label)];
  }
  for (int c = 0; c < class_count; ++c) {
    if (per_class[static_cast<std::size_t>(c)] == 0) {
      throw Error("class " + std::to_string(c) + " has no training rows");
    }
  }
  detail::check_finite(X);

  LinearModel model;
  model.class_count = class_count;
  model.l2_lambda = config.l2_lambda;
  model.standardizer = fit_standardizer(X);
  const Matrix Z = model.standardizer.transform(X);

  OptimizeResult fit = fit_logistic_parameters(Z, y, class_count, config);
  const auto C = static_cast<std::size_t>(class_count);
  model.weights = Matrix(C, X.cols());
  std::copy(fit.x.begin(), fit.x.begin() + static_cast<std::ptrdiff_t>(C * X.cols()),
            model.weights.data().begin());
  model.biases.assign(fit.x.begin() + static_cast<std::ptrdiff_t>(C * X.cols()), fit.x.end());
  for (std::size_t d = 0; d < X.cols(); ++d) model.feature_names.push_back("x" + std::to_string(d));
  for (int c = 0; c < class_count; ++c) model.class_names.push_back(std::to_string(c));
  if (diagnostics) *diagnostics = std::move(fit);
  return model;
}

// x holds raw (unstandardized) features in model.feature_names order.
inline std::vector<double> predict_proba(const LinearModel& model, std::span<const double> x) {
  if (x.size() != model.dims()) {
    throw Error("expected " + std::to_string(model.dims()) + " features, got " +
                std::to_string(x.size()));
  }
  const auto z = model.standardizer.transform(x);
  std::vector<double> p(static_cast<std::size_t>(model.class_count));
  for (std::size_t c = 0; c < p.size(); ++c) {
    double s = model.biases[c];
    const auto w = model.weights.row(c);
    for (std::size_t d = 0; d < z.size(); ++d) s += w[d] * z[d];
    p[c] = s;
  }
  detail::softmax_in_place(p);
  return p;
}

// First index of the maximum, so ties go to the lower class id.
inline int argmax(std::span<const double> p) {
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

inline int predict(const LinearModel& model, std::span<const double> x) {
  return argmax(predict_proba(model, x));
}

// ---------------------------------------------------------------------------
// Model files

inline nlohmann::json model_to_json(const LinearModel& m) {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["feature_schema"] = kFeatureSchema;
  j["task"] = std::string(to_string(m.task));
  j["class_count"] = m.class_count;
  j["class_names"] = m.class_names;
  j["feature_names"] = m.feature_names;
  j["standardizer"] = {{"means", m.standardizer.means}, {"stds", m.standardizer.stds}};
  nlohmann::json w = nlohmann::json::array();
  for (std::size_t c = 0; c < m.weights.rows(); ++c) {
    const auto row = m.weights.row(c);
    w.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["weights"] = std::move(w);
  j["biases"] = m.biases;
  j["l2_lambda"] = m.l2_lambda;
  return j;
}

inline LinearModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != kModelFormatVersion) {
      throw Error("unsupported model format_version " + j.at("format_version").dump());
    }
    LinearModel m;
    m.task = parse_task_kind(j.at("task").get<std::string>());
    m.class_count = j.at("class_count").get<int>();
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.standardizer.means = j.at("standardizer").at("means").get<std::vector<double>>();
    m.standardizer.stds = j.at("standardizer").at("stds").get<std::vector<double>>();
    m.biases = j.at("biases").get<std::vector<double>>();
    m.l2_lambda = j.at("l2_lambda").get<double>();
    const auto rows = j.at("weights").get<std::vector<std::vector<double>>>();
    const std::size_t dims = m.feature_names.size();
    if (rows.size() != static_cast<std::size_t>(m.class_count) ||
        m.biases.size() != rows.size() || m.class_names.size() != rows.size() ||
        m.standardizer.means.size() != dims || m.standardizer.stds.size() != dims) {
      throw Error("model file has inconsistent dimensions");
    }
    m.weights = Matrix(rows.size(), dims);
    for (std::size_t c = 0; c < rows.size(); ++c) {
      if (rows[c].size() != dims) throw Error("weight row " + std::to_string(c) + " has wrong length");
      std::copy(rows[c].begin(), rows[c].end(), m.weights.row(c).begin());
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed model file: ") + e.what());
  }
}

inline void save_model(const LinearModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << model_to_json(m).dump(2) << '\n';
}

inline LinearModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace lma
