#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "qtlab/potential.hpp"

namespace qtlab {

struct ScatteringSolution {
  double E;
  std::complex<double> r;  // reflection amplitude, plane-wave convention e^{ikx} incident
  std::complex<double> t;  // transmission amplitude, same convention
  double R;
  double T;
  double k;
  long slice_count;
  double log_t_mag;  // ln|t|, usable when T underflows
};

struct TransferMatrix {
  std::complex<double> m00, m01, m10, m11;  // right-side plane-wave coefficients from left-side
  double log_scale;                         // true matrix = e^{log_scale} * stored
  double E;
  double k;
};

struct SolveOptions {
  double rtol = 1e-10;   // relative stopping tolerance on T between slice doublings
  long n0 = 256;         // initial slice count
  long n_max = 1L << 25; // refuse to refine beyond this
};

namespace detail {

constexpr double kRescaleAt = 1e30;

struct PsiMatrix {
  double a11 = 1.0, a12 = 0.0, a21 = 0.0, a22 = 1.0;
  double ls = 0.0;  // accumulated log magnitude factored out of the entries
};

struct SliceGrid {
  double x_lo, x_hi;
  std::vector<double> edges;
};

inline SliceGrid build_slices(double xL, double xR, std::span<const double> breaks, long n) {
  std::vector<double> seg{xL};
  for (double b : breaks)
    if (b > xL && b < xR) seg.push_back(b);
  seg.push_back(xR);
  std::sort(seg.begin(), seg.end());
  seg.erase(std::unique(seg.begin(), seg.end()), seg.end());

  SliceGrid g{xL, xR, {xL}};
  const double W = xR - xL;
  for (std::size_t i = 0; i + 1 < seg.size(); ++i) {
    const double len = seg[i + 1] - seg[i];
    const long ns = std::max<long>(1, std::lround(static_cast<double>(n) * len / W));
    for (long j = 1; j < ns; ++j) g.edges.push_back(seg[i] + len * j / ns);
    g.edges.push_back(seg[i + 1]);
  }
  return g;
}

// exp([[0, s], [p, 0]]) multiplied onto M in place: the (psi, psi') map
// [[cosh mu, s sinh(mu)/mu], [p sinh(mu)/mu, cosh mu]] with mu = sqrt(s p).
// Real with unit determinant for any s, p, which keeps R + T = 1 exact.
// Entries are rescaled once they grow large; the factored-out log magnitude
// accumulates in ls.
inline void apply_factor(PsiMatrix& M, double s, double p, bool rescale) {
  double ch, sl, extra = 0.0;
  const double z = s * p;  // mu^2, either sign
  if (std::abs(z) < 1e-4) {
    ch = 1.0 + z * (0.5 + z * (1.0 / 24.0 + z / 720.0));
    sl = 1.0 + z * (1.0 / 6.0 + z * (1.0 / 120.0 + z / 5040.0));
  } else if (z > 0.0) {
    const double mu = std::sqrt(z);
    if (mu > 300.0) {
      // factor e^{mu} out so cosh/sinh stay representable
      const double em = std::exp(-2.0 * mu);
      ch = 0.5 * (1.0 + em);
      sl = 0.5 * (1.0 - em) / mu;
      extra = mu;
    } else {
      ch = std::cosh(mu);
      sl = std::sinh(mu) / mu;
    }
  } else {
    const double q = std::sqrt(-z);
    ch = std::cos(q);
    sl = std::sin(q) / q;
  }
  const double s11 = ch, s12 = s * sl, s21 = p * sl, s22 = ch;
  const double b11 = s11 * M.a11 + s12 * M.a21;
  const double b12 = s11 * M.a12 + s12 * M.a22;
  const double b21 = s21 * M.a11 + s22 * M.a21;
  const double b22 = s21 * M.a12 + s22 * M.a22;
  M.a11 = b11; M.a12 = b12; M.a21 = b21; M.a22 = b22;
  M.ls += extra;
  const double mx = std::max(std::max(std::abs(M.a11), std::abs(M.a12)),
                             std::max(std::abs(M.a21), std::abs(M.a22)));
  if (mx > kRescaleAt) {
    if (!rescale) throw Overflow("transfer matrix overflow with log-scaling disabled");
    M.a11 /= mx; M.a12 /= mx; M.a21 /= mx; M.a22 /= mx;
    M.ls += std::log(mx);
  }
}

// Exact constant-potential slice, kept for evaluating psi part-way into a slice.
inline void apply_slice(PsiMatrix& M, double m, double E, double u, double d,
                        bool rescale) {
  apply_factor(M, d, d * 2.0 * m * (u - E), rescale);
}

inline constexpr double kGaussHalfNode = 0.28867513459481288225457439025098;  // sqrt(3)/6
inline constexpr double kCf4A1 = 0.25 + kGaussHalfNode;
inline constexpr double kCf4A2 = 0.25 - kGaussHalfNode;

// Fourth-order commutator-free step across one slice: two real factors built
// from the potential at the two interior Gauss points. Reduces to the exact
// propagator when the potential is constant over the slice.
template <class U>
void apply_slice_cf4(PsiMatrix& M, U&& u, double m, double E, double lo, double hi,
                     bool rescale) {
  const double d = hi - lo;
  const double mid = 0.5 * (lo + hi);
  const double f1 = 2.0 * m * (u(mid - kGaussHalfNode * d) - E);
  const double f2 = 2.0 * m * (u(mid + kGaussHalfNode * d) - E);
  apply_factor(M, 0.5 * d, d * (kCf4A1 * f1 + kCf4A2 * f2), rescale);
  apply_factor(M, 0.5 * d, d * (kCf4A2 * f1 + kCf4A1 * f2), rescale);
}

template <class U>
PsiMatrix propagate_interval(U&& u, double m, double E, const SliceGrid& g,
                             bool rescale = true) {
  PsiMatrix M;
  for (std::size_t i = 0; i + 1 < g.edges.size(); ++i)
    apply_slice_cf4(M, u, m, E, g.edges[i], g.edges[i + 1], rescale);
  return M;
}

struct CoreAmplitudes {
  std::complex<double> r_hat, t_hat;
  double log_t_mag;
};

// With P = ik a11 - a21 and Q = ik a22 + k^2 a12 (scaled entries), the
// unimodular true matrix gives t = 2ik e^{-ls}/(P+Q) with no cancellation in
// opaque barriers, and r = (Q-P)/(Q+P).
inline CoreAmplitudes extract_amplitudes(const PsiMatrix& M, double k) {
  const std::complex<double> ik(0.0, k);
  const std::complex<double> P = ik * M.a11 - M.a21;
  const std::complex<double> Q = ik * M.a22 + k * k * M.a12;
  CoreAmplitudes out;
  out.r_hat = (Q - P) / (Q + P);
  out.t_hat = 2.0 * ik * std::exp(-M.ls) / (P + Q);
  out.log_t_mag = std::log(2.0 * k) - M.ls - std::log(std::abs(P + Q));
  return out;
}

template <class U>
ScatteringSolution solve_fixed(U&& u, double m, double E, double xL, double xR,
                               std::span<const double> breaks, long n) {
  const double k = std::sqrt(2.0 * m * E);
  const SliceGrid g = build_slices(xL, xR, breaks, n);
  const PsiMatrix M = propagate_interval(u, m, E, g);
  const CoreAmplitudes a = extract_amplitudes(M, k);
  ScatteringSolution s;
  s.E = E;
  s.k = k;
  s.slice_count = n;  // refinement parameter, reusable for matched grids at nearby E
  s.r = a.r_hat * std::exp(std::complex<double>(0.0, 2.0 * k * xL));
  s.t = a.t_hat * std::exp(std::complex<double>(0.0, -k * (xR - xL)));
  s.R = std::norm(a.r_hat);
  s.T = std::norm(a.t_hat);
  s.log_t_mag = a.log_t_mag;
  return s;
}

// Doubles the slice count until ln T is stable; works for transmissions far
// below double-precision underflow as well.
template <class U>
ScatteringSolution solve_adaptive(U&& u, double m, double E, double xL, double xR,
                                  std::span<const double> breaks, const SolveOptions& opt) {
  ScatteringSolution prev = solve_fixed(u, m, E, xL, xR, breaks, opt.n0);
  for (long n = opt.n0 * 2; n <= opt.n_max; n *= 2) {
    ScatteringSolution cur = solve_fixed(u, m, E, xL, xR, breaks, n);
    if (std::abs(cur.log_t_mag - prev.log_t_mag) <= 0.5 * opt.rtol) return cur;
    prev = cur;
  }
  throw NoConvergence("scattering_amplitudes: slice refinement hit the n_max cap");
}

inline std::vector<double> spec_breaks(const PotentialSpec& spec) {
  if (const auto* r = std::get_if<Rectangular>(&spec.shape)) return {r->a, r->b};
  if (const auto* s = std::get_if<Sampled>(&spec.shape)) return s->x;  // interpolation kinks
  return {};
}

inline std::pair<double, double> scattering_cuts(const PotentialSpec& spec) {
  const double top = barrier_top(spec);
  return asymptotic_check(spec, top > 0.0 ? 1e-12 * top : 1e-12);
}

}

inline ScatteringSolution scattering_amplitudes(const PotentialSpec& spec, double E,
                                                const SolveOptions& opt = {}) {
  validate(spec);
  if (!(E > 0.0)) throw ComputeError("scattering_amplitudes: E must be positive");
  const auto [xl, xr] = detail::scattering_cuts(spec);
  const auto breaks = detail::spec_breaks(spec);
  const auto u = [&](double x) { return evaluate(spec, x); };
  return detail::solve_adaptive(u, spec.mass, E, xl, xr, breaks, opt);
}

inline ScatteringSolution scattering_amplitudes_fixed(const PotentialSpec& spec, double E,
                                                      long n) {
  validate(spec);
  if (!(E > 0.0)) throw ComputeError("scattering_amplitudes: E must be positive");
  const auto [xl, xr] = detail::scattering_cuts(spec);
  const auto breaks = detail::spec_breaks(spec);
  const auto u = [&](double x) { return evaluate(spec, x); };
  return detail::solve_fixed(u, spec.mass, E, xl, xr, breaks, n);
}

// Plane-wave-basis transfer matrix: right-side (c+, c-) from left-side, local
// phase references at the asymptotic cuts.
inline TransferMatrix transfer_matrix(const PotentialSpec& spec, double E, long n,
                                      bool log_scaling = true) {
  validate(spec);
  if (!(E > 0.0)) throw ComputeError("transfer_matrix: E must be positive");
  if (n < 1) throw ComputeError("transfer_matrix: need at least one slice");
  const auto [xl, xr] = detail::scattering_cuts(spec);
  const auto breaks = detail::spec_breaks(spec);
  const auto u = [&](double x) { return evaluate(spec, x); };
  const detail::SliceGrid g = detail::build_slices(xl, xr, breaks, n);
  const detail::PsiMatrix M = detail::propagate_interval(u, spec.mass, E, g, log_scaling);

  const double k = std::sqrt(2.0 * spec.mass * E);
  const std::complex<double> ik(0.0, k);
  const std::complex<double> c1 = M.a11 + ik * M.a12;  // M_psi * B columns
  const std::complex<double> c2 = M.a11 - ik * M.a12;
  const std::complex<double> c3 = M.a21 + ik * M.a22;
  const std::complex<double> c4 = M.a21 - ik * M.a22;
  const std::complex<double> iok(0.0, 1.0 / k);
  TransferMatrix tm;
  tm.m00 = 0.5 * (c1 - iok * c3);
  tm.m01 = 0.5 * (c2 - iok * c4);
  tm.m10 = 0.5 * (c1 + iok * c3);
  tm.m11 = 0.5 * (c2 + iok * c4);
  tm.log_scale = M.ls;
  tm.E = E;
  tm.k = k;
  return tm;
}

// psi on the given grid for the left-incident solution with unit incident
// amplitude (incident current k/m); forward propagation over the converged
// slicing.
inline std::vector<std::complex<double>> interior_wavefunction(const PotentialSpec& spec,
                                                               double E,
                                                               std::span<const double> grid,
                                                               const SolveOptions& opt = {}) {
  const ScatteringSolution sol = scattering_amplitudes(spec, E, opt);
  const auto [xl, xr] = detail::scattering_cuts(spec);
  for (double x : grid)
    if (x < xl || x > xr)
      throw ComputeError("interior_wavefunction: grid point outside the asymptotic cuts");

  const auto breaks = detail::spec_breaks(spec);
  const detail::SliceGrid g = detail::build_slices(xl, xr, breaks, sol.slice_count);
  const double m = spec.mass;
  const double k = sol.k;
  const std::complex<double> ik(0.0, k);
  const std::complex<double> r_hat = sol.r * std::exp(std::complex<double>(0.0, -2.0 * k * xl));

  std::vector<std::complex<double>> out(grid.size());
  std::vector<std::size_t> order(grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return grid[a] < grid[b]; });

  std::complex<double> psi = 1.0 + r_hat;
  std::complex<double> dpsi = ik * (1.0 - r_hat);
  std::size_t qi = 0;
  const auto value_inside = [&](double u, double d, std::complex<double> p,
                                std::complex<double> dp) {
    detail::PsiMatrix S;
    detail::apply_slice(S, m, E, u, d, true);
    const double scale = std::exp(S.ls);
    return scale * (S.a11 * p + S.a12 * dp);
  };
  const auto u = [&](double x) { return evaluate(spec, x); };
  for (std::size_t i = 0; i + 1 < g.edges.size() && qi < order.size(); ++i) {
    const double lo = g.edges[i], hi = g.edges[i + 1];
    const double um = evaluate(spec, 0.5 * (lo + hi));
    while (qi < order.size() && grid[order[qi]] < hi) {
      const double x = grid[order[qi]];
      out[order[qi]] = (x <= lo) ? psi : value_inside(um, x - lo, psi, dpsi);
      ++qi;
    }
    detail::PsiMatrix S;
    detail::apply_slice_cf4(S, u, m, E, lo, hi, true);
    const double scale = std::exp(S.ls);
    const std::complex<double> p2 = scale * (S.a11 * psi + S.a12 * dpsi);
    const std::complex<double> d2 = scale * (S.a21 * psi + S.a22 * dpsi);
    psi = p2;
    dpsi = d2;
  }
  while (qi < order.size()) {
    out[order[qi]] = psi;  // x == x_hi
    ++qi;
  }
  return out;
}

}
