#pragma once

// Independent reference implementations for the test suite. Everything here
// is deliberately built on different numerics than the library: tanh-sinh
// quadrature instead of adaptive Gauss panels, Numerov integration instead
// of piecewise-constant transfer matrices, and closed forms where they exist.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "qtlab/potential.hpp"

namespace oracles {

inline constexpr double kPi = 3.14159265358979323846264338327950288;

// Tanh-sinh quadrature on (a, b); handles integrable endpoint singularities.
inline double tanh_sinh(const std::function<double(double)>& f, double a, double b,
                        int levels = 12) {
  const double c = 0.5 * (a + b);
  const double d = 0.5 * (b - a);
  auto eval = [&](double t) {
    const double s = std::sinh(t);
    const double x = c + d * std::tanh(0.5 * kPi * s);
    if (!(x > a && x < b)) return 0.0;
    const double ch = std::cosh(0.5 * kPi * s);
    const double w = d * 0.5 * kPi * std::cosh(t) / (ch * ch);
    return w > 0.0 ? f(x) * w : 0.0;
  };
  double h = 1.0;
  double sum = eval(0.0);
  for (double t = h; t < 7.0; t += h) sum += eval(t) + eval(-t);
  double total = h * sum;
  for (int level = 1; level < levels; ++level) {
    h *= 0.5;
    for (double t = h; t < 7.0; t += 2.0 * h) sum += eval(t) + eval(-t);
    const double next = h * sum;
    if (level >= 4 && std::abs(next - total) <= 1e-13 * std::max(std::abs(next), 1e-300))
      return next;
    total = next;
  }
  return total;
}

// Rectangular barrier of height v0 on [0, L], E below the top.
struct RectAmplitudes {
  std::complex<double> t;  // transmission amplitude, global phase convention
  double T;
  double tau_delay;  // d/dE arg(t e^{ikL})
};

inline RectAmplitudes rect_exact(double m, double v0, double L, double E) {
  const double k = std::sqrt(2.0 * m * E);
  const double kappa = std::sqrt(2.0 * m * (v0 - E));
  const double chi = (kappa * kappa - k * k) / (2.0 * k * kappa);
  const double sh = std::sinh(kappa * L);
  const double ch = std::cosh(kappa * L);
  RectAmplitudes out;
  out.t = std::exp(std::complex<double>(0.0, -k * L)) /
          std::complex<double>(ch, chi * sh);
  out.T = 1.0 / (1.0 + v0 * v0 * sh * sh / (4.0 * E * (v0 - E)));
  const double N = kappa * kappa - k * k;
  const double dchi = -m * (4.0 * k * k * kappa * kappa + N * N) /
                      (2.0 * std::pow(k, 3) * std::pow(kappa, 3));
  const double th = std::tanh(kappa * L);
  const double sech2 = 1.0 / (ch * ch);
  const double u = chi * th;
  const double du = dchi * th - chi * L * sech2 * m / kappa;
  out.tau_delay = -du / (1.0 + u * u);
  return out;
}

// Eckart barrier v0 / cosh^2(x / w).
inline double eckart_T(double m, double v0, double w, double E) {
  const double k = std::sqrt(2.0 * m * E);
  const double s = std::sinh(kPi * k * w);
  const double arg = 8.0 * m * v0 * w * w - 1.0;
  double c;
  if (arg >= 0.0)
    c = std::cosh(0.5 * kPi * std::sqrt(arg));
  else
    c = std::cos(0.5 * kPi * std::sqrt(-arg));
  return s * s / (s * s + c * c);
}

inline double eckart_action(double m, double v0, double w, double E) {
  return kPi * w * (std::sqrt(2.0 * m * v0) - std::sqrt(2.0 * m * E));
}

inline double eckart_tau_imag(double m, double v0, double w, double E) {
  return kPi * w * std::sqrt(m / (2.0 * E));
}

// Gaussian barrier reference values, exp(-x^2/2), m = 1, v0 = 1,
// frozen from a 40-digit arbitrary-precision computation.
struct GaussianRef {
  double E;
  double b;         // right turning point
  double action;    // integral of sqrt(2 (U - E)) between turning points
  double tau_imag;  // integral of dx / sqrt(2 (U - E) / m)
};

inline constexpr GaussianRef kGaussE05{0.5, 1.177410022515474691011569,
                                       1.766335568828421022991444,
                                       4.067442643183884516192825};
inline constexpr GaussianRef kGaussE03{0.3, 1.551755653655520594328966,
                                       2.65460636832150209029586,
                                       4.912655837601415334234754};
inline constexpr double kGaussD05 = 0.02922674285465648783283321;       // e^{-2A} at E=0.5
inline constexpr double kGaussXcut1e12 = 7.433844377699676893904814;    // U(x)=1e-12, sigma=1
inline constexpr double kRectTCosh = 0.4199743416140260693944967;       // 1/cosh^2(1)
inline constexpr double kRectTAbove = 0.8912972171417729526320003;      // E=2, v0=1, L=1

// Numerov integration of psi'' = 2 m (U - E) psi, marching right to left
// from a pure outgoing wave. Returns |t|^2 for equal asymptotic momenta.
struct NumerovResult {
  std::complex<double> r;
  std::complex<double> t;
  double T;
};

inline NumerovResult numerov_scatter(const qtlab::PotentialSpec& spec, double E, double xl,
                                     double xr, std::size_t n) {
  const double m = spec.mass;
  const double k = std::sqrt(2.0 * m * E);
  const double h = (xr - xl) / static_cast<double>(n);
  auto f = [&](double x) { return 2.0 * m * (qtlab::evaluate(spec, x) - E); };
  auto w_of = [&](double x, std::complex<double> psi) {
    return (1.0 - h * h / 12.0 * f(x)) * psi;
  };
  std::complex<double> psi_next = std::exp(std::complex<double>(0.0, k * xr));
  std::complex<double> psi_curr = std::exp(std::complex<double>(0.0, k * (xr - h)));
  std::complex<double> w_next = w_of(xr, psi_next);
  std::complex<double> w_curr = w_of(xr - h, psi_curr);
  double x = xr - h;
  for (std::size_t i = 2; i <= n; ++i) {
    const std::complex<double> w_prev = 2.0 * w_curr - w_next + h * h * f(x) * psi_curr;
    x -= h;
    w_next = w_curr;
    w_curr = w_prev;
    psi_next = psi_curr;
    psi_curr = w_curr / (1.0 - h * h / 12.0 * f(x));
  }
  // psi_curr at xl, psi_next at xl + h; match A e^{ikx} + B e^{-ikx}:
  //   A e0 + B / e0 = psi_curr,  A e1 + B / e1 = psi_next.
  const std::complex<double> e0 = std::exp(std::complex<double>(0.0, k * xl));
  const std::complex<double> e1 = std::exp(std::complex<double>(0.0, k * (xl + h)));
  const std::complex<double> det = e0 / e1 - e1 / e0;
  const std::complex<double> A = (psi_curr / e1 - psi_next / e0) / det;
  const std::complex<double> B = (psi_next * e0 - psi_curr * e1) / det;
  NumerovResult out;
  out.t = 1.0 / A;
  out.r = B / A;
  out.T = std::norm(out.t);
  return out;
}

}  // namespace oracles
