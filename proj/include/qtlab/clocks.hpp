#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "qtlab/scatter.hpp"
#include "qtlab/wkb.hpp"

namespace qtlab {

struct PhaseTimes {
  double E;
  double tau_delay;      // d/dE arg(t e^{ik L_ref}); L_ref = extent of the classically
                         // forbidden interval at this energy, 0 at or above the top
  double tau_traversal;  // tau_delay + m L_ref / k
  double L_ref;
  double dE_used;
};

struct SpinChannelSolution {
  double E;
  double omega_L;
  std::complex<double> t_up, t_down;  // channel potentials U -+ omega_L/2 inside the window
  double P_x, P_y, P_z;               // transmitted polarization, incident spin along +x
  double window_lo, window_hi;
  long slice_n;
};

struct LarmorResult {
  double E;
  double tau_z;  // spin-alignment time, omega_L -> 0 extrapolation
  double tau_y;  // precession time, same extrapolation
  double residual;  // |extrapolation with/without the largest omega|, common scale
  double window_lo, window_hi;
  std::vector<double> omegas;
  long slice_n;
};

struct ClockReport {
  double E;
  double tau_phase_delay;
  double tau_phase_traversal;
  double tau_dwell;
  double tau_larmor_y;
  double tau_larmor_z;
  double tau_imag_wkb;
  double omega_L_used;
  double T_exact;
  double D_wkb;
};

namespace detail {

inline double nan_q() { return std::numeric_limits<double>::quiet_NaN(); }

// Extent of the E-level forbidden interval; zero at or above the barrier top.
inline double forbidden_extent(const PotentialSpec& spec, double E, double* lo = nullptr,
                               double* hi = nullptr) {
  if (E >= barrier_top(spec)) {
    if (lo) *lo = 0.0;
    if (hi) *hi = 0.0;
    return 0.0;
  }
  const TurningPoints tp = find_turning_points(spec, E);
  if (lo) *lo = tp.a;
  if (hi) *hi = tp.b;
  return tp.b - tp.a;
}

// Unwrapped barrier-referenced phase slope: four-point sampling plus one
// Richardson step. Steps producing phase jumps above pi/2 are rejected and
// retried with a smaller dE.
inline double phase_slope(const PotentialSpec& spec, double E, long n, double dE,
                          double* dE_used) {
  const auto [xl, xr] = scattering_cuts(spec);
  const double W = xr - xl;
  const auto theta = [&](double e) {
    const ScatteringSolution s = scattering_amplitudes_fixed(spec, e, n);
    return std::arg(s.t * std::exp(std::complex<double>(0.0, s.k * W)));
  };
  for (int attempt = 0; attempt < 4; ++attempt) {
    const double h = dE;
    if (E - h <= 0.0) throw ComputeError("phase_time: dE leaves the E > 0 domain");
    double th[4] = {theta(E - h), theta(E - 0.5 * h), theta(E + 0.5 * h), theta(E + h)};
    bool ok = true;
    const double two_pi = 2.0 * M_PI;
    for (int i = 1; i < 4; ++i) {
      double d = th[i] - th[i - 1];
      d -= two_pi * std::round(d / two_pi);
      if (std::abs(d) > 0.5 * M_PI) { ok = false; break; }
      th[i] = th[i - 1] + d;
    }
    if (!ok) { dE *= 0.1; continue; }
    const double d_h = (th[3] - th[0]) / (2.0 * h);
    const double d_h2 = (th[2] - th[1]) / h;
    if (dE_used) *dE_used = h;
    return (4.0 * d_h2 - d_h) / 3.0;
  }
  throw PhaseWrap("phase_time: phase steps exceed pi/2 even after shrinking dE");
}

// closed-form |psi|^2 integral over one constant-u slice from the left-edge
// (psi, psi') values
inline double slice_density_integral(double m, double E, double u, double d,
                                     std::complex<double> psi, std::complex<double> dpsi) {
  const double diff = 2.0 * m * (E - u);
  if (diff > 0.0) {
    const double q = std::sqrt(diff);
    const std::complex<double> iq(0.0, q);
    const std::complex<double> al = 0.5 * (psi + dpsi / iq);
    const std::complex<double> be = 0.5 * (psi - dpsi / iq);
    const std::complex<double> osc =
        al * std::conj(be) * (std::exp(std::complex<double>(0.0, 2.0 * q * d)) - 1.0) / (2.0 * iq);
    return (std::norm(al) + std::norm(be)) * d + 2.0 * osc.real();
  }
  if (diff < 0.0) {
    const double kp = std::sqrt(-diff);
    const std::complex<double> al = 0.5 * (psi + dpsi / kp);
    const std::complex<double> be = 0.5 * (psi - dpsi / kp);
    const double grow = std::expm1(2.0 * kp * d) / (2.0 * kp);
    const double decay = -std::expm1(-2.0 * kp * d) / (2.0 * kp);
    return std::norm(al) * grow + std::norm(be) * decay +
           2.0 * (al * std::conj(be)).real() * d;
  }
  const double c0 = std::norm(psi);
  const double c1 = (std::conj(psi) * dpsi).real();
  return c0 * d + c1 * d * d + std::norm(dpsi) * d * d * d / 3.0;
}

template <class U>
double dwell_integral_fixed(U&& u, double m, double E, double xL, double xR,
                            std::span<const double> breaks, long n, double wa, double wb) {
  const double k = std::sqrt(2.0 * m * E);
  const SliceGrid g = build_slices(xL, xR, breaks, n);
  const ScatteringSolution base = solve_fixed(u, m, E, xL, xR, breaks, n);
  const std::complex<double> r_hat =
      base.r * std::exp(std::complex<double>(0.0, -2.0 * k * xL));
  std::complex<double> psi = 1.0 + r_hat;
  std::complex<double> dpsi = std::complex<double>(0.0, k) * (1.0 - r_hat);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < g.edges.size(); ++i) {
    const double lo = g.edges[i], hi = g.edges[i + 1];
    const double um = u(0.5 * (lo + hi));
    if (lo >= wa && hi <= wb + 1e-14 * std::max(1.0, std::abs(wb)))
      acc += slice_density_integral(m, E, um, hi - lo, psi, dpsi);
    PsiMatrix S;
    apply_slice(S, m, E, um, hi - lo, true);
    const double scale = std::exp(S.ls);
    const std::complex<double> p2 = scale * (S.a11 * psi + S.a12 * dpsi);
    const std::complex<double> d2 = scale * (S.a21 * psi + S.a22 * dpsi);
    psi = p2;
    dpsi = d2;
  }
  return acc;
}

inline double neville_to_zero(const std::vector<double>& x, std::vector<double> y) {
  const std::size_t n = x.size();
  for (std::size_t m = 1; m < n; ++m)
    for (std::size_t i = 0; i + m < n; ++i)
      y[i] = (x[i + m] * y[i] - x[i] * y[i + 1]) / (x[i + m] - x[i]);
  return y[0];
}

inline SpinChannelSolution larmor_channels_fixed(const PotentialSpec& spec, double E,
                                                 double omega_L, double wa, double wb,
                                                 long n) {
  const auto [xl, xr] = scattering_cuts(spec);
  auto breaks = spec_breaks(spec);
  breaks.push_back(wa);
  breaks.push_back(wb);
  const auto chan = [&](double shift) {
    const auto u = [&, shift](double x) {
      double v = evaluate(spec, x);
      if (x >= wa && x <= wb) v += shift;
      return v;
    };
    return solve_fixed(u, spec.mass, E, xl, xr, breaks, n);
  };
  const ScatteringSolution up = chan(-0.5 * omega_L);
  const ScatteringSolution dn = chan(+0.5 * omega_L);
  SpinChannelSolution s;
  s.E = E;
  s.omega_L = omega_L;
  s.t_up = up.t;
  s.t_down = dn.t;
  s.window_lo = wa;
  s.window_hi = wb;
  s.slice_n = n;
  // Overflow-proof polarization: with dl = ln|t_up| - ln|t_down| and
  // dth = arg t_down - arg t_up,
  //   P_z = (Tu - Td)/(Tu + Td)        = tanh(dl)
  //   P_x = 2 Re(tu* td)/(Tu + Td)     = cos(dth)/cosh(dl)
  //   P_y = 2 Im(tu* td)/(Tu + Td)     = sin(dth)/cosh(dl)
  const double dl = up.log_t_mag - dn.log_t_mag;
  const double dth = std::arg(dn.t) - std::arg(up.t);
  s.P_z = std::tanh(dl);
  s.P_x = std::cos(dth) / std::cosh(dl);
  s.P_y = std::sin(dth) / std::cosh(dl);
  return s;
}

inline long larmor_base_slices(const PotentialSpec& spec, double E, double wa, double wb,
                               const SolveOptions& opt) {
  const auto [xl, xr] = scattering_cuts(spec);
  auto breaks = spec_breaks(spec);
  breaks.push_back(wa);
  breaks.push_back(wb);
  const auto u = [&](double x) { return evaluate(spec, x); };
  return solve_adaptive(u, spec.mass, E, xl, xr, breaks, opt).slice_count;
}

inline LarmorResult larmor_times_impl(const PotentialSpec& spec, double E,
                                      std::vector<double> omegas, double wa, double wb,
                                      const SolveOptions& opt) {
  if (omegas.size() < 3)
    throw ConfigError("larmor_times: need at least three omega_L values");
  for (std::size_t i = 1; i < omegas.size(); ++i)
    if (!(omegas[i] < omegas[i - 1]))
      throw ConfigError("larmor_times: omega_L sequence must decrease strictly");
  const double top = barrier_top(spec);
  if (top > 0.0 && E < top && E >= top - 0.5 * omegas.front())
    throw ChannelAboveBarrier("larmor_times: spin-up channel top drops below E");

  const long n = larmor_base_slices(spec, E, wa, wb, opt);
  std::vector<double> x2(omegas.size()), tz(omegas.size()), ty(omegas.size());
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    const double w = omegas[i];
    const SpinChannelSolution s = larmor_channels_fixed(spec, E, w, wa, wb, n);
    tz[i] = s.P_z / w;
    ty[i] = -s.P_y / w;
    x2[i] = w * w;
  }
  LarmorResult res;
  res.E = E;
  res.tau_z = neville_to_zero(x2, tz);
  res.tau_y = neville_to_zero(x2, ty);
  const std::vector<double> x2d(x2.begin() + 1, x2.end());
  const double tz_drop = neville_to_zero(x2d, {tz.begin() + 1, tz.end()});
  const double ty_drop = neville_to_zero(x2d, {ty.begin() + 1, ty.end()});
  const double scale = std::max({std::abs(res.tau_z), std::abs(res.tau_y), 1e-300});
  res.residual = std::max(std::abs(res.tau_z - tz_drop), std::abs(res.tau_y - ty_drop)) / scale;
  if (res.residual > 0.05)
    throw NoConvergence("larmor_times: omega_L -> 0 extrapolation residual above 5%");
  res.window_lo = wa;
  res.window_hi = wb;
  res.omegas = std::move(omegas);
  res.slice_n = n;
  return res;
}

inline std::vector<double> auto_omegas(const PotentialSpec& spec, double E) {
  const double top = barrier_top(spec);
  const double scale = (E < top) ? std::min(E, top - E) : E;
  const double w0 = 1e-3 * scale;
  return {w0, 0.5 * w0, 0.25 * w0};
}

}

inline PhaseTimes phase_time(const PotentialSpec& spec, double E, double dE = 0.0,
                             const SolveOptions& opt = {}) {
  validate(spec);
  if (!(E > 0.0)) throw ComputeError("phase_time: E must be positive");
  const ScatteringSolution sol = scattering_amplitudes(spec, E, opt);
  const double L_ref = detail::forbidden_extent(spec, E);
  const auto [xl, xr] = detail::scattering_cuts(spec);
  if (dE <= 0.0) dE = 1e-6 * E;
  PhaseTimes pt;
  pt.E = E;
  pt.L_ref = L_ref;
  // arg(t e^{ikW}) is sampled (slowly varying); the free-phase slope over the
  // non-barrier part of the window, -(m/k)(W - L_ref), is added analytically
  const double slope = detail::phase_slope(spec, E, sol.slice_count, dE, &pt.dE_used);
  pt.tau_delay = slope - spec.mass / sol.k * ((xr - xl) - L_ref);
  pt.tau_traversal = pt.tau_delay + spec.mass * L_ref / sol.k;
  return pt;
}

// Dwell time (m/k) Int_w |psi|^2 dx of the unit-incident stationary state over
// an explicit window.
inline double dwell_time_window(const PotentialSpec& spec, double E, double wa, double wb,
                                const SolveOptions& opt = {}) {
  validate(spec);
  if (!(E > 0.0)) throw ComputeError("dwell_time: E must be positive");
  const auto [xl, xr] = detail::scattering_cuts(spec);
  if (wa < xl - 1e-12 || wb > xr + 1e-12 || wa >= wb)
    throw ComputeError("dwell_time: window must lie inside the asymptotic cuts");
  auto breaks = detail::spec_breaks(spec);
  breaks.push_back(wa);
  breaks.push_back(wb);
  const auto u = [&](double x) { return evaluate(spec, x); };
  const double m = spec.mass;
  const double k = std::sqrt(2.0 * m * E);
  double prev = detail::dwell_integral_fixed(u, m, E, xl, xr, breaks, opt.n0, wa, wb);
  for (long n = opt.n0 * 2; n <= opt.n_max; n *= 2) {
    const double cur = detail::dwell_integral_fixed(u, m, E, xl, xr, breaks, n, wa, wb);
    if (std::abs(cur - prev) <= 1e-8 * std::abs(cur)) return m / k * cur;
    prev = cur;
  }
  throw NoConvergence("dwell_time: slice refinement hit the n_max cap");
}

// Dwell over the energy-level forbidden interval [a, b].
inline double dwell_time(const PotentialSpec& spec, double E, const SolveOptions& opt = {}) {
  double a, b;
  if (detail::forbidden_extent(spec, E, &a, &b) <= 0.0)
    throw NoBarrier("dwell_time: no forbidden interval at this energy; use a window");
  return dwell_time_window(spec, E, a, b, opt);
}

// Two-channel spin clock at one Zeeman splitting: channel potentials
// U -+ omega_L/2 inside [a, b], incident spin along +x.
inline SpinChannelSolution larmor_amplitudes(const PotentialSpec& spec, double E,
                                             double omega_L, const SolveOptions& opt = {}) {
  validate(spec);
  if (!(E > 0.0)) throw ComputeError("larmor_amplitudes: E must be positive");
  if (omega_L < 0.0) throw ConfigError("larmor_amplitudes: omega_L must be nonnegative");
  double wa, wb;
  if (detail::forbidden_extent(spec, E, &wa, &wb) <= 0.0)
    throw NoBarrier("larmor_amplitudes: no forbidden interval at this energy");
  if (E >= barrier_top(spec) - 0.5 * omega_L)
    throw ChannelAboveBarrier("larmor_amplitudes: spin-up channel top drops below E");
  const long n = detail::larmor_base_slices(spec, E, wa, wb, opt);
  return detail::larmor_channels_fixed(spec, E, omega_L, wa, wb, n);
}

inline LarmorResult larmor_times(const PotentialSpec& spec, double E,
                                 std::vector<double> omegas = {},
                                 const SolveOptions& opt = {}) {
  validate(spec);
  if (!(E > 0.0)) throw ComputeError("larmor_times: E must be positive");
  double wa, wb;
  if (detail::forbidden_extent(spec, E, &wa, &wb) <= 0.0)
    throw NoBarrier("larmor_times: no forbidden interval at this energy");
  if (omegas.empty()) omegas = detail::auto_omegas(spec, E);
  return detail::larmor_times_impl(spec, E, std::move(omegas), wa, wb, opt);
}

// Same clock with an explicit field window (e.g. a free-space segment).
inline LarmorResult larmor_times_window(const PotentialSpec& spec, double E,
                                        std::vector<double> omegas, double wa, double wb,
                                        const SolveOptions& opt = {}) {
  validate(spec);
  if (!(E > 0.0)) throw ComputeError("larmor_times: E must be positive");
  if (!(wa < wb)) throw ConfigError("larmor_times: window must have wa < wb");
  if (omegas.empty()) throw ConfigError("larmor_times: explicit window needs explicit omegas");
  return detail::larmor_times_impl(spec, E, std::move(omegas), wa, wb, opt);
}

inline ClockReport clock_report(const PotentialSpec& spec, double E,
                                const SolveOptions& opt = {}) {
  ClockReport c;
  c.E = E;
  const ScatteringSolution sol = scattering_amplitudes(spec, E, opt);
  c.T_exact = sol.T;
  const PhaseTimes pt = phase_time(spec, E, 0.0, opt);
  c.tau_phase_delay = pt.tau_delay;
  c.tau_phase_traversal = pt.tau_traversal;
  if (E < barrier_top(spec)) {
    c.D_wkb = transmission_wkb(spec, E);
    c.tau_imag_wkb = imaginary_traversal_time(spec, E);
    c.tau_dwell = dwell_time(spec, E, opt);
    const LarmorResult lr = larmor_times(spec, E, {}, opt);
    c.tau_larmor_z = lr.tau_z;
    c.tau_larmor_y = lr.tau_y;
    c.omega_L_used = lr.omegas.front();
  } else {
    c.D_wkb = 1.0;  // above-barrier convention, flagged in the CSV header
    c.tau_imag_wkb = detail::nan_q();
    c.tau_dwell = detail::nan_q();
    c.tau_larmor_z = detail::nan_q();
    c.tau_larmor_y = detail::nan_q();
    c.omega_L_used = detail::nan_q();
  }
  return c;
}

}
