#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "core.hpp"

namespace lma {

inline constexpr double kStdFloor = 1e-8;

// Per-column z-scoring fitted on training rows only.
struct Standardizer {
  std::vector<double> means;
  std::vector<double> stds;

  std::size_t dims() const { return means.size(); }

  void transform_in_place(std::span<double> x) const {
    assert(x.size() == dims());
    for (std::size_t c = 0; c < x.size(); ++c) x[c] = (x[c] - means[c]) / stds[c];
  }

  std::vector<double> transform(std::span<const double> x) const {
    std::vector<double> out(x.begin(), x.end());
    transform_in_place(out);
    return out;
  }

  Matrix transform(const Matrix& X) const {
    Matrix out = X;
    for (std::size_t r = 0; r < out.rows(); ++r) transform_in_place(out.row(r));
    return out;
  }

  Matrix inverse_transform(const Matrix& Z) const {
    Matrix out = Z;
    for (std::size_t r = 0; r < out.rows(); ++r) {
      auto row = out.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) row[c] = row[c] * stds[c] + means[c];
    }
    return out;
  }

  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

inline Standardizer fit_standardizer(const Matrix& X) {
  if (X.rows() < 2) {
    throw Error("standardizer needs at least 2 rows, got " + std::to_string(X.rows()));
  }
  const double n = static_cast<double>(X.rows());
  Standardizer s;
  s.means.assign(X.cols(), 0.0);
  s.stds.assign(X.cols(), 0.0);
  for (std::size_t r = 0; r < X.rows(); ++r) {
    for (std::size_t c = 0; c < X.cols(); ++c) s.means[c] += X(r, c);
  }
  for (auto& m : s.means) m /= n;
  for (std::size_t r = 0; r < X.rows(); ++r) {
    for (std::size_t c = 0; c < X.cols(); ++c) {
      const double d = X(r, c) - s.means[c];
      s.stds[c] += d * d;
    }
  }
  for (auto& sd : s.stds) sd = std::max(kStdFloor, std::sqrt(sd / n));
  return s;
}

// Kruskal-Wallis H with average ranks for ties and the usual tie correction.
// Returns 0 when every value is identical.
inline double kruskal_wallis(std::span<const double> values, std::span<const int> labels) {
  if (values.empty()) throw Error("Kruskal-Wallis on empty input");
  if (values.size() != labels.size()) throw Error("Kruskal-Wallis: values/labels size mismatch");

  std::map<int, std::pair<double, std::size_t>> groups;  // label -> (rank sum, size)
  for (int l : labels) groups[l];
  if (groups.size() < 2) throw Error("Kruskal-Wallis needs at least 2 classes");

  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t k = i + 1;
    while (k < n && values[order[k]] == values[order[i]]) ++k;
    // ranks i+1..k share their average
    const double rank = 0.5 * static_cast<double>(i + 1 + k);
    for (std::size_t m = i; m < k; ++m) {
      auto& g = groups[labels[order[m]]];
      g.first += rank;
      ++g.second;
    }
    const double t = static_cast<double>(k - i);
    tie_term += t * t * t - t;
    i = k;
  }

  const double N = static_cast<double>(n);
  const double correction = 1.0 - tie_term / (N * N * N - N);
  if (correction <= 0.0) return 0.0;
  double sum = 0.0;
  for (const auto& [label, g] : groups) sum += g.first * g.first / static_cast<double>(g.second);
  const double h = (12.0 / (N * (N + 1.0)) * sum - 3.0 * (N + 1.0)) / correction;
  return std::max(0.0, h);
}

struct RankedFeature {
  std::string name;
  double h = 0.0;
};

// Descending H; equal H ordered by name.
struct FeatureRanking {
  std::vector<RankedFeature> entries;
};

inline FeatureRanking rank_features(const Matrix& X, std::span<const int> labels,
                                    const std::vector<std::string>& names) {
  if (names.size() != X.cols()) throw Error("rank_features: name count does not match columns");
  FeatureRanking ranking;
  std::vector<double> column(X.rows());
  for (std::size_t c = 0; c < X.cols(); ++c) {
    for (std::size_t r = 0; r < X.rows(); ++r) column[r] = X(r, c);
    ranking.entries.push_back({names[c], kruskal_wallis(column, labels)});
  }
  std::stable_sort(ranking.entries.begin(), ranking.entries.end(),
                   [](const RankedFeature& a, const RankedFeature& b) {
                     if (a.h != b.h) return a.h > b.h;
                     return a.name < b.name;
                   });
  return ranking;
}

}  // namespace lma
