#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "qtlab/errors.hpp"

namespace qtlab {

struct LorentzParams {
  double omega_p;
  double omega_0;
  double gamma;
};

struct SusceptibilitySamples {
  std::vector<double> omega;               // strictly increasing, omega >= 0
  std::vector<std::complex<double>> chi;
  std::optional<LorentzParams> model;      // set when generated from the Lorentz model
};

struct RefractiveProfile {
  std::vector<double> omega;
  std::vector<std::complex<double>> n;
  std::vector<double> v_phase;
  std::vector<double> v_group;
};

inline std::complex<double> lorentz_susceptibility(const LorentzParams& p, double omega) {
  if (!(p.omega_0 > 0.0 && p.gamma > 0.0 && p.omega_p > 0.0))
    throw ConfigError("lorentz_susceptibility: parameters must be positive");
  const std::complex<double> den(p.omega_0 * p.omega_0 - omega * omega, -p.gamma * omega);
  return p.omega_p * p.omega_p / den;
}

inline SusceptibilitySamples lorentz_samples(const LorentzParams& p, double omega_max,
                                             std::size_t n_points) {
  if (n_points < 16) throw ConfigError("lorentz_samples: need at least 16 points");
  if (!(omega_max > 0.0)) throw ConfigError("lorentz_samples: omega_max must be positive");
  SusceptibilitySamples s;
  s.omega.resize(n_points);
  s.chi.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    s.omega[i] = omega_max * static_cast<double>(i) / static_cast<double>(n_points - 1);
    s.chi[i] = lorentz_susceptibility(p, s.omega[i]);
  }
  s.model = p;
  return s;
}

namespace detail {

inline void check_samples(const SusceptibilitySamples& s) {
  if (s.omega.size() != s.chi.size())
    throw ConfigError("susceptibility: omega/chi length mismatch");
  if (s.omega.size() < 16) throw ConfigError("susceptibility: need at least 16 samples");
  if (s.omega.front() < 0.0) throw ConfigError("susceptibility: omega must be nonnegative");
  for (std::size_t i = 1; i < s.omega.size(); ++i)
    if (!(s.omega[i] > s.omega[i - 1]))
      throw ConfigError("susceptibility: omega grid must increase strictly");
}

inline double interp_at(const std::vector<double>& xs, const std::vector<double>& ys,
                        double x) {
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  if (it == xs.begin()) return ys.front();
  if (it == xs.end()) return ys.back();
  const std::size_t i = static_cast<std::size_t>(it - xs.begin());
  const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return ys[i - 1] + t * (ys[i] - ys[i - 1]);
}

inline double trapezoid(const std::vector<double>& xs, const std::vector<double>& ys) {
  double acc = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i)
    acc += 0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1]);
  return acc;
}

// least-squares c1/w^p1 + c2/w^p2 over the top fifth of the grid; flags input
// that cannot decay that fast
inline std::pair<double, double> tail_fit(const std::vector<double>& omega,
                                          const std::vector<double>& data, double p1,
                                          double p2) {
  const double W = omega.back();
  double m11 = 0, m12 = 0, m22 = 0, b1 = 0, b2 = 0, yy = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (omega[i] < 0.8 * W || omega[i] <= 0.0) continue;
    const double x1 = std::pow(omega[i], -p1);
    const double x2 = std::pow(omega[i], -p2);
    m11 += x1 * x1; m12 += x1 * x2; m22 += x2 * x2;
    b1 += data[i] * x1; b2 += data[i] * x2;
    yy += data[i] * data[i];
    ++count;
  }
  if (count < 4) throw GridTooCoarse("kk: not enough grid points for the tail fit");
  if (yy == 0.0) return {0.0, 0.0};
  const double det = m11 * m22 - m12 * m12;
  double A, B;
  if (std::abs(det) < 1e-30 * m11 * m22 + 1e-300) {
    A = b1 / m11;  // degenerate basis, single-term fit
    B = 0.0;
  } else {
    A = (b2 * m12 - b1 * m22) / (m12 * m12 - m11 * m22);
    B = (b1 * m12 - b2 * m11) / (m12 * m12 - m11 * m22);
  }
  return {A, B};
}

// Eq-style convergence requires the input to decay; compare tail magnitude to
// the whole-grid magnitude.
inline void check_decaying(const std::vector<double>& omega, const std::vector<double>& data) {
  const double W = omega.back();
  double sum_all = 0.0, sum_tail = 0.0;
  std::size_t n_all = 0, n_tail = 0;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    sum_all += std::abs(data[i]);
    ++n_all;
    if (omega[i] >= 0.8 * W) {
      sum_tail += std::abs(data[i]);
      ++n_tail;
    }
  }
  if (sum_all == 0.0 || n_tail == 0) return;
  if (sum_tail / n_tail > 0.5 * (sum_all / n_all))
    throw NonDecayingInput("kk: input does not decay toward the grid end");
}

// Shared singularity-subtracted PV quadrature:
//   PV Int_0^W s(w')/(w'^2 - w^2) dw'
//     = Int (s(w') - s_w)/(w'^2 - w^2) dw'  +  s_w (1/2w) ln((W-w)/(W+w))
// the remainder evaluated at the pole node by the L'Hopital value s'(w)/(2w).
inline double pv_core(const std::vector<double>& omega, const std::vector<double>& s,
                      double w, double s_w) {
  const std::size_t N = omega.size();
  std::vector<double> g(N);
  double gmax = 0.0;
  std::ptrdiff_t node = -1;
  for (std::size_t i = 0; i < N; ++i) {
    const double d = omega[i] * omega[i] - w * w;
    if (std::abs(d) > 1e-14) {
      g[i] = (s[i] - s_w) / d;
      gmax = std::max(gmax, std::abs(g[i]));
    } else {
      node = static_cast<std::ptrdiff_t>(i);
    }
  }
  if (node >= 0) {
    std::size_t i = static_cast<std::size_t>(node);
    i = std::min(std::max<std::size_t>(i, 1), N - 2);
    const double ds = (s[i + 1] - s[i - 1]) / (omega[i + 1] - omega[i - 1]);
    g[node] = ds / (2.0 * w);
    // pole-subtraction residual estimate: the subtracted integrand must be
    // resolved by the grid around the node
    const double second = std::abs(g[i + 1] - 2.0 * g[node] + g[i - 1]);
    if (second > 1.0 * (std::abs(g[node]) + 0.05 * gmax))
      throw GridTooCoarse("kk: pole-subtraction residual above tolerance at this omega");
  }
  const double W = omega.back();
  return trapezoid(omega, g) + s_w * (0.5 / w) * std::log((W - w) / (W + w));
}

inline void check_interior(const SusceptibilitySamples& smp, double w) {
  if (!(w > smp.omega.front() && w < smp.omega.back()))
    throw ComputeError("kk: omega must lie strictly inside the sample grid");
}

inline void check_resolution(const SusceptibilitySamples& smp) {
  if (!smp.model) return;
  const double w0 = smp.model->omega_0, g = smp.model->gamma;
  std::size_t count = 0;
  for (double w : smp.omega)
    if (std::abs(w - w0) <= g) ++count;
  if (count < 10)
    throw GridTooCoarse("kk: resonance width gamma spans fewer than 10 grid points");
}

}

// Re chi(w) = (2/pi) PV Int_0^inf w' Im chi(w') / (w'^2 - w^2) dw'
inline double kk_real_from_imag(const SusceptibilitySamples& smp, double w) {
  detail::check_samples(smp);
  detail::check_interior(smp, w);
  detail::check_resolution(smp);
  const std::size_t N = smp.omega.size();
  std::vector<double> im(N), s(N);
  for (std::size_t i = 0; i < N; ++i) {
    im[i] = smp.chi[i].imag();
    s[i] = smp.omega[i] * im[i];
  }
  const double s_w = w * detail::interp_at(smp.omega, im, w);
  const double core = detail::pv_core(smp.omega, s, w, s_w);
  // tail beyond the grid: Im chi ~ A/w'^3 + B/w'^5, integrated in closed form
  detail::check_decaying(smp.omega, im);
  const auto [A, B] = detail::tail_fit(smp.omega, im, 3.0, 5.0);
  const double W = smp.omega.back();
  const double L = 0.5 / w * std::log((W + w) / (W - w));
  const double J2 = (L - 1.0 / W) / (w * w);
  const double J4 = (J2 - 1.0 / (3.0 * W * W * W)) / (w * w);
  return 2.0 / M_PI * (core + A * J2 + B * J4);
}

// Im chi(w) = -(2w/pi) PV Int_0^inf Re chi(w') / (w'^2 - w^2) dw'
inline double kk_imag_from_real(const SusceptibilitySamples& smp, double w) {
  detail::check_samples(smp);
  detail::check_interior(smp, w);
  detail::check_resolution(smp);
  const std::size_t N = smp.omega.size();
  std::vector<double> re(N);
  for (std::size_t i = 0; i < N; ++i) re[i] = smp.chi[i].real();
  const double s_w = detail::interp_at(smp.omega, re, w);
  const double core = detail::pv_core(smp.omega, re, w, s_w);
  detail::check_decaying(smp.omega, re);
  const auto [A, B] = detail::tail_fit(smp.omega, re, 2.0, 4.0);
  const double W = smp.omega.back();
  const double L = 0.5 / w * std::log((W + w) / (W - w));
  const double J2 = (L - 1.0 / W) / (w * w);
  const double J4 = (J2 - 1.0 / (3.0 * W * W * W)) / (w * w);
  return -2.0 * w / M_PI * (core + A * J2 + B * J4);
}

// n = sqrt(1 + chi) (principal branch, continuity-enforced), v_phase = 1/Re n,
// v_group = (d(w Re n)/dw)^-1, c = 1.
inline RefractiveProfile refractive_profile(const SusceptibilitySamples& smp) {
  detail::check_samples(smp);
  const std::size_t N = smp.omega.size();
  RefractiveProfile out;
  out.omega = smp.omega;
  out.n.resize(N);
  out.v_phase.resize(N);
  out.v_group.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const std::complex<double> z = 1.0 + smp.chi[i];
    if (z.real() < 0.0 && std::abs(z.imag()) <= 1e-14 * (1.0 + std::abs(z.real())))
      throw BranchAmbiguity("refractive_profile: 1 + chi on the negative real axis");
    if (i > 0) {
      const std::complex<double> zp = 1.0 + smp.chi[i - 1];
      if (zp.imag() * z.imag() < 0.0) {
        const double t = zp.imag() / (zp.imag() - z.imag());
        if (zp.real() + t * (z.real() - zp.real()) < 0.0)
          throw BranchAmbiguity("refractive_profile: 1 + chi crosses the negative real axis");
      }
    }
    std::complex<double> n = std::sqrt(z);
    if (i > 0 && std::abs(-n - out.n[i - 1]) < std::abs(n - out.n[i - 1])) n = -n;
    out.n[i] = n;
    out.v_phase[i] = 1.0 / n.real();
  }
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t lo = (i == 0) ? 0 : i - 1;
    const std::size_t hi = (i == N - 1) ? N - 1 : i + 1;
    const double df = smp.omega[hi] * out.n[hi].real() - smp.omega[lo] * out.n[lo].real();
    out.v_group[i] = (smp.omega[hi] - smp.omega[lo]) / df;
  }
  return out;
}

}
