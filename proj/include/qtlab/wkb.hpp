#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "qtlab/potential.hpp"
#include "qtlab/quadrature.hpp"

namespace qtlab {

struct PhasePiece {
  double x_lo;
  double x_hi;
  double integral;  // accumulated |p| dx over the piece
};

struct WKBReport {
  double E;
  TurningPoints turning;
  double action;
  double transmission;
  double tau_imag;
  std::array<PhasePiece, 3> phase;
};

namespace detail {

constexpr double kQuadRtol = 1e-9;
constexpr double kTauDivergent = 1e12;

inline double kappa(const PotentialSpec& spec, double E, double x) {
  const double d = evaluate(spec, x) - E;
  return std::sqrt(2.0 * spec.mass * std::max(0.0, d));
}

inline double momentum(const PotentialSpec& spec, double E, double x) {
  const double d = E - evaluate(spec, x);
  return std::sqrt(2.0 * spec.mass * std::max(0.0, d));
}

// Integrate f over [lo, hi] where f has an integrable 1/sqrt or sqrt
// singularity at `sing` (one of the interval ends): substituting
// x = sing -/+ u^2 makes the integrand smooth.
template <class F>
QuadResult integrate_endpoint(F&& f, double lo, double hi, double sing, double rtol) {
  if (sing == lo) {
    const double umax = std::sqrt(hi - lo);
    return integrate_adaptive([&](double u) { return 2.0 * u * f(lo + u * u); }, 0.0, umax, rtol);
  }
  const double umax = std::sqrt(hi - lo);
  return integrate_adaptive([&](double u) { return 2.0 * u * f(hi - u * u); }, 0.0, umax, rtol);
}

// Both interval ends are turning points: split in the middle and substitute
// on each side.
template <class F>
QuadResult integrate_two_endpoints(F&& f, double a, double b, double rtol) {
  const double mid = 0.5 * (a + b);
  const QuadResult l = integrate_endpoint(f, a, mid, a, rtol);
  const QuadResult r = integrate_endpoint(f, mid, b, b, rtol);
  return {l.value + r.value, l.converged && r.converged, l.panels + r.panels};
}

inline double slope_at(const PotentialSpec& spec, double x) {
  const double h = 1e-6 * std::max(1.0, std::abs(x));
  return (evaluate(spec, x + h) - evaluate(spec, x - h)) / (2.0 * h);
}

}

inline double barrier_action(const PotentialSpec& spec, double E) {
  const TurningPoints tp = find_turning_points(spec, E);
  const auto f = [&](double x) { return detail::kappa(spec, E, x); };
  const QuadResult q = detail::integrate_two_endpoints(f, tp.a, tp.b, detail::kQuadRtol);
  if (!q.converged) throw NoConvergence("barrier_action: quadrature did not converge");
  return q.value;
}

inline double transmission_wkb(const PotentialSpec& spec, double E,
                               bool above_barrier_ok = false) {
  validate(spec);
  if (E >= barrier_top(spec)) {
    if (above_barrier_ok) return 1.0;
    throw NoBarrier("transmission_wkb: E at or above barrier top");
  }
  return std::exp(-2.0 * barrier_action(spec, E));
}

inline double imaginary_traversal_time(const PotentialSpec& spec, double E) {
  const TurningPoints tp = find_turning_points(spec, E);
  const double m = spec.mass;
  const auto f = [&](double x) { return m / detail::kappa(spec, E, x); };
  const QuadResult q = detail::integrate_two_endpoints(f, tp.a, tp.b, detail::kQuadRtol);
  if (!q.converged || !(q.value < detail::kTauDivergent))
    throw Divergent("imaginary_traversal_time: integral diverges (E too close to barrier top?)");
  return q.value;
}

// Accumulated phase integrals over allowed-left / forbidden / allowed-right,
// with the asymptotic cuts as outer boundaries.
inline WKBReport wkb_report(const PotentialSpec& spec, double E) {
  const TurningPoints tp = find_turning_points(spec, E);
  const double eps = std::min(1e-12 * barrier_top(spec), 0.5 * E);
  const auto [xl, xr] = asymptotic_check(spec, eps);
  const auto p = [&](double x) { return detail::momentum(spec, E, x); };
  const double rtol = detail::kQuadRtol;

  WKBReport rep;
  rep.E = E;
  rep.turning = tp;
  rep.action = barrier_action(spec, E);
  rep.transmission = std::exp(-2.0 * rep.action);
  rep.tau_imag = imaginary_traversal_time(spec, E);
  rep.phase[0] = {xl, tp.a, detail::integrate_endpoint(p, xl, tp.a, tp.a, rtol).value};
  rep.phase[1] = {tp.a, tp.b, rep.action};
  rep.phase[2] = {tp.b, xr, detail::integrate_endpoint(p, tp.b, xr, tp.b, rtol).value};
  return rep;
}

inline double turning_exclusion_width(const PotentialSpec& spec, double x_turn) {
  const double slope = std::abs(detail::slope_at(spec, x_turn));
  if (slope <= 0.0) return 1e-3;
  return std::max(1e-3, std::pow(2.0 * spec.mass * slope, -1.0 / 3.0));
}

struct WkbWave {
  std::complex<double> psi;
  int region;  // 0 incident side, 1 under the barrier, 2 transmitted side
  std::complex<double> incident;   // populated on the incident side only
  std::complex<double> reflected;  // populated on the incident side only
};

// Piecewise semiclassical wavefunction at unit incident current. The overall
// sign of the transmitted branch is a global phase and is dropped.
inline WkbWave wkb_wavefunction_detail(const PotentialSpec& spec, double E, double x) {
  const TurningPoints tp = find_turning_points(spec, E);
  const double wa = turning_exclusion_width(spec, tp.a);
  const double wb = turning_exclusion_width(spec, tp.b);
  if (std::abs(x - tp.a) < wa || std::abs(x - tp.b) < wb)
    throw TurningPointRegion("wkb_wavefunction: x inside a turning-point exclusion window");

  const double m = spec.mass;
  const double A = barrier_action(spec, E);
  const double rtol = detail::kQuadRtol;
  WkbWave out{};
  if (x < tp.a) {
    const double p = detail::momentum(spec, E, x);
    const auto f = [&](double t) { return detail::momentum(spec, E, t); };
    const double phi = detail::integrate_endpoint(f, x, tp.a, tp.a, rtol).value;
    const double amp = std::sqrt(m / p);
    out.region = 0;
    out.incident = amp * std::exp(std::complex<double>(0.0, -phi + M_PI / 4.0));
    out.reflected = amp * std::exp(std::complex<double>(0.0, phi - M_PI / 4.0));
    out.psi = out.incident + out.reflected;
  } else if (x > tp.b) {
    const double p = detail::momentum(spec, E, x);
    const auto f = [&](double t) { return detail::momentum(spec, E, t); };
    const double phi = detail::integrate_endpoint(f, tp.b, x, tp.b, rtol).value;
    out.region = 2;
    out.psi = std::sqrt(m / p) * std::exp(-A) * std::exp(std::complex<double>(0.0, phi));
  } else {
    const double kap = detail::kappa(spec, E, x);
    const auto f = [&](double t) { return detail::kappa(spec, E, t); };
    const double tail = detail::integrate_endpoint(f, x, tp.b, tp.b, rtol).value;
    out.region = 1;
    out.psi = std::sqrt(m / kap) * std::exp(-A + tail);
  }
  return out;
}

inline std::complex<double> wkb_wavefunction(const PotentialSpec& spec, double E, double x) {
  return wkb_wavefunction_detail(spec, E, x).psi;
}

}
