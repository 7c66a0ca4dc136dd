#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "qtlab/errors.hpp"

namespace qtlab {

namespace detail {

// 16-point Gauss-Legendre nodes/weights on [-1, 1], computed once by Newton
// iteration on the Legendre recurrence.
inline const std::vector<std::pair<double, double>>& gl16() {
  static const std::vector<std::pair<double, double>> table = [] {
    constexpr int n = 16;
    std::vector<std::pair<double, double>> nw(n);
    for (int i = 0; i < n; ++i) {
      double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int j = 2; j <= n; ++j) {
          const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      nw[i] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
    }
    return nw;
  }();
  return table;
}

}

struct QuadResult {
  double value = 0.0;
  bool converged = false;
  int panels = 0;
};

// Composite 16-point Gauss rule with panel doubling until two successive
// levels agree to rtol.
template <class F>
QuadResult integrate_adaptive(F&& f, double lo, double hi, double rtol,
                              int max_doublings = 22) {
  QuadResult res;
  if (lo == hi) {
    res.converged = true;
    return res;
  }
  const auto& nw = detail::gl16();
  double prev = 0.0;
  int panels = 1;
  for (int level = 0; level <= max_doublings; ++level, panels *= 2) {
    const double w = (hi - lo) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double c = lo + (p + 0.5) * w;
      double s = 0.0;
      for (const auto& [xi, wi] : nw) s += wi * f(c + 0.5 * w * xi);
      sum += 0.5 * w * s;
    }
    if (level > 0 && std::abs(sum - prev) <= rtol * std::abs(sum)) {
      res.value = sum;
      res.converged = true;
      res.panels = panels;
      return res;
    }
    prev = sum;
  }
  res.value = prev;
  res.panels = panels / 2;
  return res;
}

}
