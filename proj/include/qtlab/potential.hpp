#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "qtlab/errors.hpp"

namespace qtlab {

// Natural units with hbar = 1 throughout; mass is a free parameter.

struct Rectangular {
  double v0;
  double a;
  double b;
};

struct Eckart {
  double v0;
  double w;
};

struct Gaussian {
  double v0;
  double x0;
  double sigma;
};

struct Sampled {
  std::vector<double> x;
  std::vector<double> u;
};

struct PotentialSpec {
  std::variant<Rectangular, Eckart, Gaussian, Sampled> shape;
  double mass = 1.0;
};

struct TurningPoints {
  double a;
  double b;
  double energy;
};

inline void validate(const PotentialSpec& spec) {
  if (!(spec.mass > 0.0)) throw ConfigError("potential: mass must be positive");
  if (const auto* r = std::get_if<Rectangular>(&spec.shape)) {
    if (!(r->v0 > 0.0)) throw ConfigError("potential: V0 must be positive");
    if (!(r->a < r->b)) throw ConfigError("potential: rectangular needs a < b");
  } else if (const auto* e = std::get_if<Eckart>(&spec.shape)) {
    if (!(e->v0 > 0.0)) throw ConfigError("potential: V0 must be positive");
    if (!(e->w > 0.0)) throw ConfigError("potential: eckart width must be positive");
  } else if (const auto* g = std::get_if<Gaussian>(&spec.shape)) {
    if (!(g->v0 > 0.0)) throw ConfigError("potential: V0 must be positive");
    if (!(g->sigma > 0.0)) throw ConfigError("potential: gaussian sigma must be positive");
  } else if (const auto* s = std::get_if<Sampled>(&spec.shape)) {
    if (s->x.size() != s->u.size())
      throw ConfigError("potential: sampled table needs matching x/u lengths");
    if (s->x.size() < 3) throw ConfigError("potential: sampled table needs at least 3 points");
    for (std::size_t i = 1; i < s->x.size(); ++i)
      if (!(s->x[i] > s->x[i - 1]))
        throw ConfigError("potential: sampled x values must be strictly increasing");
  }
}

inline double evaluate(const PotentialSpec& spec, double x) {
  if (const auto* r = std::get_if<Rectangular>(&spec.shape))
    return (x >= r->a && x <= r->b) ? r->v0 : 0.0;
  if (const auto* e = std::get_if<Eckart>(&spec.shape)) {
    const double c = std::cosh(x / e->w);
    return e->v0 / (c * c);
  }
  if (const auto* g = std::get_if<Gaussian>(&spec.shape)) {
    const double d = x - g->x0;
    return g->v0 * std::exp(-d * d / (2.0 * g->sigma * g->sigma));
  }
  const auto& s = std::get<Sampled>(spec.shape);
  if (x <= s.x.front() || x >= s.x.back()) return 0.0;  // zero outside the table
  const auto it = std::upper_bound(s.x.begin(), s.x.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - s.x.begin());
  const double t = (x - s.x[i - 1]) / (s.x[i] - s.x[i - 1]);
  return s.u[i - 1] + t * (s.u[i] - s.u[i - 1]);
}

inline double barrier_top(const PotentialSpec& spec) {
  if (const auto* r = std::get_if<Rectangular>(&spec.shape)) return r->v0;
  if (const auto* e = std::get_if<Eckart>(&spec.shape)) return e->v0;
  if (const auto* g = std::get_if<Gaussian>(&spec.shape)) return g->v0;
  const auto& s = std::get<Sampled>(spec.shape);
  return *std::max_element(s.u.begin(), s.u.end());
}

// Positions beyond which |U| < eps. Closed-form where the shape allows it.
inline std::pair<double, double> asymptotic_check(const PotentialSpec& spec, double eps) {
  validate(spec);
  if (!(eps > 0.0)) throw ComputeError("asymptotic_check: eps must be positive");
  if (const auto* r = std::get_if<Rectangular>(&spec.shape)) return {r->a, r->b};
  if (const auto* e = std::get_if<Eckart>(&spec.shape)) {
    if (eps >= e->v0) return {0.0, 0.0};
    const double xc = e->w * std::acosh(std::sqrt(e->v0 / eps));
    return {-xc, xc};
  }
  if (const auto* g = std::get_if<Gaussian>(&spec.shape)) {
    if (eps >= g->v0) return {g->x0, g->x0};
    const double d = g->sigma * std::sqrt(2.0 * std::log(g->v0 / eps));
    return {g->x0 - d, g->x0 + d};
  }
  const auto& s = std::get<Sampled>(spec.shape);
  if (std::abs(s.u.front()) >= eps || std::abs(s.u.back()) >= eps)
    throw NonDecaying("asymptotic_check: sampled potential does not decay below eps at table ends");
  return {s.x.front(), s.x.back()};
}

namespace detail {

// Bisect U(x) - E = 0 inside [lo, hi] where the sign flips; refined close to
// machine width because downstream 1/sqrt(U - E) integrals are sensitive to
// turning-point placement.
inline double bisect_crossing(const PotentialSpec& spec, double E, double lo, double hi) {
  double flo = evaluate(spec, lo) - E;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double fm = evaluate(spec, mid) - E;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}

inline TurningPoints find_turning_points(const PotentialSpec& spec, double E) {
  validate(spec);
  if (!(E > 0.0)) throw ComputeError("find_turning_points: E must be positive");
  if (const auto* r = std::get_if<Rectangular>(&spec.shape)) {
    if (E >= r->v0) throw NoBarrier("find_turning_points: E at or above barrier top");
    return {r->a, r->b, E};
  }
  if (E >= barrier_top(spec)) throw NoBarrier("find_turning_points: E at or above barrier top");

  const double eps = std::min(1e-12 * barrier_top(spec), 0.5 * E);
  const auto [xl, xr] = asymptotic_check(spec, eps);
  constexpr int kScan = 1024;
  const double h = (xr - xl) / kScan;

  // Scan for forbidden intervals (U > E); more than one means a multi-bump
  // potential this library does not model.
  std::vector<std::pair<double, double>> intervals;
  bool inside = false;
  double start = 0.0;
  double prev_x = xl;
  bool prev_above = evaluate(spec, xl) > E;
  if (prev_above) {
    inside = true;
    start = xl;
  }
  for (int i = 1; i <= kScan; ++i) {
    const double x = (i == kScan) ? xr : xl + i * h;
    const bool above = evaluate(spec, x) > E;
    if (above && !prev_above) {
      inside = true;
      start = detail::bisect_crossing(spec, E, prev_x, x);
    } else if (!above && prev_above) {
      if (!inside) throw ComputeError("find_turning_points: inconsistent scan");
      intervals.emplace_back(start, detail::bisect_crossing(spec, E, prev_x, x));
      inside = false;
    }
    prev_above = above;
    prev_x = x;
  }
  if (inside) intervals.emplace_back(start, xr);

  if (intervals.empty()) throw NoBarrier("find_turning_points: no classically forbidden region");
  if (intervals.size() > 1)
    throw MultiBump("find_turning_points: " + std::to_string(intervals.size()) +
                    " forbidden intervals; single-barrier potentials only");
  return {intervals[0].first, intervals[0].second, E};
}

}
