#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "logistic.hpp"
#include "random.hpp"
#include "task.hpp"

namespace lma {

struct TaskLabels {
  std::vector<int> labels;             // one per kept row
  std::vector<std::size_t> kept_rows;  // original row indices, ascending
  std::vector<bool> kept;              // mask over the input rows
};

inline TaskLabels remap_task(std::span<const int> tiers, const TaskSpec& task) {
  TaskLabels out;
  out.kept.assign(tiers.size(), false);
  for (std::size_t r = 0; r < tiers.size(); ++r) {
    if (!valid_tier(tiers[r])) {
      throw Error("row " + std::to_string(r) + " has unknown tier " + std::to_string(tiers[r]));
    }
    if (const auto label = task.label_map[static_cast<std::size_t>(tiers[r])]) {
      out.labels.push_back(*label);
      out.kept_rows.push_back(r);
      out.kept[r] = true;
    }
  }
  return out;
}

// Per class: seeded shuffle, then deal rows round-robin to folds 0..k-1.
inline std::vector<int> stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed) {
  if (k < 2) throw Error("k must be at least 2");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t r = 0; r < labels.size(); ++r) by_class[labels[r]].push_back(r);
  for (const auto& [label, rows] : by_class) {
    if (rows.size() < static_cast<std::size_t>(k)) {
      throw Error("class " + std::to_string(label) + " has " + std::to_string(rows.size()) +
                  " rows, fewer than k = " + std::to_string(k));
    }
  }
  Rng rng(seed);
  std::vector<int> fold(labels.size(), -1);
  for (auto& [label, rows] : by_class) {
    rng.shuffle(std::span<std::size_t>(rows));
    for (std::size_t i = 0; i < rows.size(); ++i) fold[rows[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  }
  return fold;
}

// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  int classes = 0;
  std::vector<std::int64_t> counts;

  explicit ConfusionMatrix(int c = 0) : classes(c), counts(static_cast<std::size_t>(c * c), 0) {}
  std::int64_t operator()(int t, int p) const { return counts[static_cast<std::size_t>(t * classes + p)]; }
  std::int64_t& operator()(int t, int p) { return counts[static_cast<std::size_t>(t * classes + p)]; }

  std::int64_t total() const {
    std::int64_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }
  std::int64_t trace() const {
    std::int64_t s = 0;
    for (int i = 0; i < classes; ++i) s += (*this)(i, i);
    return s;
  }
  double accuracy() const {
    const auto n = total();
    return n == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(n);
  }
  std::int64_t row_total(int t) const {
    std::int64_t s = 0;
    for (int p = 0; p < classes; ++p) s += (*this)(t, p);
    return s;
  }
  std::int64_t column_total(int p) const {
    std::int64_t s = 0;
    for (int t = 0; t < classes; ++t) s += (*this)(t, p);
    return s;
  }
  // Empty rows stay all zero.
  std::vector<std::vector<double>> row_normalized() const {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(classes),
                                         std::vector<double>(static_cast<std::size_t>(classes), 0.0));
    for (int t = 0; t < classes; ++t) {
      const auto n = row_total(t);
      if (n == 0) continue;
      for (int p = 0; p < classes; ++p) {
        out[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)] =
            static_cast<double>((*this)(t, p)) / static_cast<double>(n);
      }
    }
    return out;
  }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred,
                                        int classes) {
  if (y_true.size() != y_pred.size()) throw Error("confusion_matrix: length mismatch");
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] < 0 || y_true[i] >= classes || y_pred[i] < 0 || y_pred[i] >= classes) {
      throw Error("confusion_matrix: label out of range at row " + std::to_string(i));
    }
    ++cm(y_true[i], y_pred[i]);
  }
  return cm;
}

inline std::vector<double> per_class_f1(const ConfusionMatrix& cm) {
  std::vector<double> f1(static_cast<std::size_t>(cm.classes), 0.0);
  for (int c = 0; c < cm.classes; ++c) {
    const auto tp = static_cast<double>(cm(c, c));
    const auto predicted = static_cast<double>(cm.column_total(c));
    const auto actual = static_cast<double>(cm.row_total(c));
    const double precision = predicted > 0 ? tp / predicted : 0.0;
    const double recall = actual > 0 ? tp / actual : 0.0;
    if (precision + recall > 0.0) {
      f1[static_cast<std::size_t>(c)] = 2.0 * precision * recall / (precision + recall);
    }
  }
  return f1;
}

inline double macro_f1(const ConfusionMatrix& cm) {
  if (cm.classes == 0) throw Error("macro_f1 of an empty confusion matrix");
  const auto f1 = per_class_f1(cm);
  double s = 0.0;
  for (double v : f1) s += v;
  return s / static_cast<double>(f1.size());
}

struct EvalReport {
  TaskKind task = TaskKind::four_way;
  std::vector<std::string> class_names;
  int folds = 0;
  std::size_t rows = 0;
  std::vector<double> fold_accuracy;
  std::vector<double> fold_macro_f1;
  double pooled_accuracy = 0.0;
  double mean_fold_accuracy = 0.0;
  double pooled_macro_f1 = 0.0;
  ConfusionMatrix confusion;
  std::vector<double> per_class_recall;
  std::vector<int> predictions;  // pooled out-of-fold, aligned with kept rows

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// Called once per fold with the model trained on the other folds.
using FoldObserver = std::function<void(int fold, const LinearModel& model)>;

// Stratified k-fold over the rows kept by `task`. Every fold fits its own
// standardizer and model on training rows only; held-out predictions are
// pooled into one confusion matrix. Folds may train on separate threads;
// the result does not depend on the thread count.
inline EvalReport cross_validate(const Matrix& features, std::span<const int> tiers,
                                 const TaskSpec& task, int k, const TrainConfig& config,
                                 std::uint64_t seed, int threads = 1,
                                 const FoldObserver& observer = {}) {
  if (features.rows() != tiers.size()) throw Error("feature/tier row count mismatch");
  const TaskLabels mapped = remap_task(tiers, task);
  const int C = task.class_count();
  const Matrix X = features.select_rows(mapped.kept_rows);
  const std::vector<int>& y = mapped.labels;
  const auto fold = stratified_kfold(y, k, seed);

  std::vector<int> predictions(y.size(), -1);
  std::vector<LinearModel> models(static_cast<std::size_t>(k));
  const auto run_fold = [&](int f) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t r = 0; r < y.size(); ++r) (fold[r] == f ? test_rows : train_rows).push_back(r);
    std::vector<int> train_y;
    train_y.reserve(train_rows.size());
    for (auto r : train_rows) train_y.push_back(y[r]);
    LinearModel model = train(X.select_rows(train_rows), train_y, C, config);
    model.task = task.kind;
    model.class_names = task.class_names;
    for (auto r : test_rows) predictions[r] = predict(model, X.row(r));
    models[static_cast<std::size_t>(f)] = std::move(model);
  };

  const int workers = std::clamp(threads, 1, k);
  if (workers == 1) {
    for (int f = 0; f < k; ++f) run_fold(f);
  } else {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(k));
    {
      std::vector<std::jthread> pool;
      std::atomic<int> next{0};
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (int f = next++; f < k; f = next++) {
            try {
              run_fold(f);
            } catch (...) {
              errors[static_cast<std::size_t>(f)] = std::current_exception();
            }
          }
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  if (observer) {
    for (int f = 0; f < k; ++f) observer(f, models[static_cast<std::size_t>(f)]);
  }

  EvalReport report;
  report.task = task.kind;
  report.class_names = task.class_names;
  report.folds = k;
  report.rows = y.size();
  report.predictions = predictions;
  report.confusion = confusion_matrix(y, predictions, C);
  report.pooled_accuracy = report.confusion.accuracy();
  report.pooled_macro_f1 = macro_f1(report.confusion);
  for (int c = 0; c < C; ++c) {
    const auto n = report.confusion.row_total(c);
    report.per_class_recall.push_back(
        n == 0 ? 0.0 : static_cast<double>(report.confusion(c, c)) / static_cast<double>(n));
  }
  for (int f = 0; f < k; ++f) {
    std::vector<int> t, p;
    for (std::size_t r = 0; r < y.size(); ++r) {
      if (fold[r] != f) continue;
      t.push_back(y[r]);
      p.push_back(predictions[r]);
    }
    const auto cm = confusion_matrix(t, p, C);
    report.fold_accuracy.push_back(cm.accuracy());
    report.fold_macro_f1.push_back(macro_f1(cm));
  }
  double s = 0.0;
  for (double a : report.fold_accuracy) s += a;
  report.mean_fold_accuracy = s / static_cast<double>(k);
  return report;
}

// Sum of confusion counts between classes one step apart vs. further apart.
struct OrdinalConfusionMass {
  std::int64_t adjacent = 0;
  std::int64_t non_adjacent = 0;
};

inline OrdinalConfusionMass ordinal_confusion_mass(const ConfusionMatrix& cm) {
  OrdinalConfusionMass m;
  for (int t = 0; t < cm.classes; ++t) {
    for (int p = 0; p < cm.classes; ++p) {
      const int gap = t > p ? t - p : p - t;
      if (gap == 1) m.adjacent += cm(t, p);
      if (gap > 1) m.non_adjacent += cm(t, p);
    }
  }
  return m;
}

inline nlohmann::json report_to_json(const EvalReport& r) {
  nlohmann::json j;
  j["task"] = std::string(to_string(r.task));
  j["class_names"] = r.class_names;
  j["folds"] = r.folds;
  j["rows"] = r.rows;
  j["fold_accuracy"] = r.fold_accuracy;
  j["fold_macro_f1"] = r.fold_macro_f1;
  j["pooled_accuracy"] = r.pooled_accuracy;
  j["mean_fold_accuracy"] = r.mean_fold_accuracy;
  j["pooled_macro_f1"] = r.pooled_macro_f1;
  nlohmann::json counts = nlohmann::json::array();
  for (int t = 0; t < r.confusion.classes; ++t) {
    std::vector<std::int64_t> row;
    for (int p = 0; p < r.confusion.classes; ++p) row.push_back(r.confusion(t, p));
    counts.push_back(row);
  }
  j["confusion"] = std::move(counts);
  j["confusion_row_normalized"] = r.confusion.row_normalized();
  j["per_class_recall"] = r.per_class_recall;
  const auto mass = ordinal_confusion_mass(r.confusion);
  j["adjacent_confusion"] = mass.adjacent;
  j["non_adjacent_confusion"] = mass.non_adjacent;
  return j;
}

// Row-normalized percentages, rows = true class.
inline std::string render_confusion(const EvalReport& r) {
  std::ostringstream out;
  char buf[64];
  out << "true \\ pred";
  for (const auto& n : r.class_names) {
    std::snprintf(buf, sizeof buf, "%8s", n.c_str());
    out << buf;
  }
  out << "     n\n";
  const auto norm = r.confusion.row_normalized();
  for (int t = 0; t < r.confusion.classes; ++t) {
    std::snprintf(buf, sizeof buf, "%-11s", r.class_names[static_cast<std::size_t>(t)].c_str());
    out << buf;
    for (int p = 0; p < r.confusion.classes; ++p) {
      std::snprintf(buf, sizeof buf, "%7.1f%%", 100.0 * norm[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)]);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "%6lld\n", static_cast<long long>(r.confusion.row_total(t)));
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "accuracy %.4f  macro-F1 %.4f  (pooled over %d folds)\n",
                r.pooled_accuracy, r.pooled_macro_f1, r.folds);
  out << buf;
  return out.str();
}

}  // namespace lma
