#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <span>
#include <vector>

namespace lma {

// Value of the objective at x; the gradient is written into grad.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct OptimizeResult {
  std::vector<double> x;
  double value = 0.0;
  double grad_inf = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;  // objective after each accepted step, starting with f(x0)
};

struct OptimizeOptions {
  int max_iters = 1000;
  double grad_tol = 1e-6;  // infinity norm
  int memory = 10;         // L-BFGS correction pairs
};

namespace detail {

inline double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Armijo backtracking from `step`. On success x, g, f hold the new point.
inline bool armijo_step(const Objective& f, std::vector<double>& x, std::vector<double>& g,
                        double& fx, std::span<const double> dir, double step,
                        double& accepted_step) {
  constexpr double c1 = 1e-4;
  constexpr int max_halvings = 60;
  const double slope = dot(g, dir);
  std::vector<double> trial(x.size());
  std::vector<double> trial_g(x.size());
  for (int k = 0; k < max_halvings; ++k, step *= 0.5) {
    for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + step * dir[i];
    const double ft = f(trial, trial_g);
    if (std::isfinite(ft) && ft <= fx + c1 * step * slope) {
      x.swap(trial);
      g.swap(trial_g);
      fx = ft;
      accepted_step = step;
      return true;
    }
  }
  return false;
}

}  // namespace detail

// Limited-memory BFGS with a backtracking (Armijo) line search. Every
// accepted step strictly decreases the objective.
inline OptimizeResult minimize_lbfgs(const Objective& f, std::vector<double> x0,
                                     const OptimizeOptions& opt = {}) {
  OptimizeResult r;
  r.x = std::move(x0);
  const std::size_t n = r.x.size();
  std::vector<double> g(n);
  r.value = f(r.x, g);
  r.history.push_back(r.value);

  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::vector<double> dir(n), alpha(static_cast<std::size_t>(opt.memory));

  for (; r.iterations < opt.max_iters; ++r.iterations) {
    r.grad_inf = detail::inf_norm(g);
    if (r.grad_inf < opt.grad_tol) {
      r.converged = true;
      return r;
    }

    // Two-loop recursion: dir = -H g.
    for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
    const std::size_t m = s_hist.size();
    for (std::size_t k = m; k-- > 0;) {
      alpha[k] = rho_hist[k] * detail::dot(s_hist[k], dir);
      for (std::size_t i = 0; i < n; ++i) dir[i] -= alpha[k] * y_hist[k][i];
    }
    double step = 1.0;
    if (m > 0) {
      const double gamma = detail::dot(s_hist.back(), y_hist.back()) /
                           detail::dot(y_hist.back(), y_hist.back());
      for (auto& d : dir) d *= gamma;
      for (std::size_t k = 0; k < m; ++k) {
        const double beta = rho_hist[k] * detail::dot(y_hist[k], dir);
        for (std::size_t i = 0; i < n; ++i) dir[i] += (alpha[k] - beta) * s_hist[k][i];
      }
    } else {
      step = 1.0 / std::max(1.0, std::sqrt(detail::dot(g, g)));
    }
    if (detail::dot(dir, g) >= 0.0) {
      for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      step = 1.0 / std::max(1.0, std::sqrt(detail::dot(g, g)));
    }

    const std::vector<double> x_prev = r.x;
    const std::vector<double> g_prev = g;
    double accepted = 0.0;
    if (!detail::armijo_step(f, r.x, g, r.value, dir, step, accepted)) break;
    r.history.push_back(r.value);

    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = r.x[i] - x_prev[i];
      y[i] = g[i] - g_prev[i];
    }
    const double sy = detail::dot(s, y);
    if (sy > 1e-12 * std::sqrt(detail::dot(s, s) * detail::dot(y, y))) {
      if (static_cast<int>(s_hist.size()) == opt.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }
  }
  r.grad_inf = detail::inf_norm(g);
  r.converged = r.grad_inf < opt.grad_tol;
  return r;
}

// Steepest descent with backtracking; the step grows again after each
// success. Slow, but shares nothing with L-BFGS beyond the line search rule.
inline OptimizeResult minimize_gradient_descent(const Objective& f, std::vector<double> x0,
                                                const OptimizeOptions& opt = {}) {
  OptimizeResult r;
  r.x = std::move(x0);
  std::vector<double> g(r.x.size());
  std::vector<double> dir(r.x.size());
  r.value = f(r.x, g);
  r.history.push_back(r.value);
  double step = 1.0;
  for (; r.iterations < opt.max_iters; ++r.iterations) {
    r.grad_inf = detail::inf_norm(g);
    if (r.grad_inf < opt.grad_tol) {
      r.converged = true;
      return r;
    }
    for (std::size_t i = 0; i < g.size(); ++i) dir[i] = -g[i];
    double accepted = 0.0;
    if (!detail::armijo_step(f, r.x, g, r.value, dir, step, accepted)) break;
    r.history.push_back(r.value);
    step = accepted * 2.0;
  }
  r.grad_inf = detail::inf_norm(g);
  r.converged = r.grad_inf < opt.grad_tol;
  return r;
}

}  // namespace lma
