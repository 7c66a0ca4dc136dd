#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <optional>
#include <vector>

#include "qtlab/potential.hpp"
#include "qtlab/scatter.hpp"

namespace qtlab {

struct PacketSpec {
  double x0;       // initial center, left of the barrier
  double k0;       // mean momentum, > 0
  double sigma_x;  // spatial width
  double mass = 1.0;
};

struct BoxSpec {
  double x_min;
  double x_max;
  std::size_t n;  // power of two
};

struct Snapshot {
  double time;
  std::vector<std::complex<double>> psi;
};

struct EvolutionRun {
  std::vector<double> x;
  double dx;
  double dt;
  double t_final;
  double gate_x;  // right barrier edge (box left edge for free runs)
  std::vector<Snapshot> snapshots;
  std::vector<double> norm_history;
};

struct FreeComparison {
  double advance;               // free arrival minus barrier arrival at the detector
  double transmitted_fraction;  // probability at x > gate after the barrier run
  double arrival_barrier;
  double arrival_free;
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

inline void validate_packet(const PacketSpec& p) {
  if (!(p.mass > 0.0)) throw ConfigError("wavepacket: mass must be positive");
  if (!(p.k0 > 0.0)) throw ConfigError("wavepacket: k0 must be positive");
  if (!(p.sigma_x > 0.0)) throw ConfigError("wavepacket: sigma_x must be positive");
}

inline void validate_box(const BoxSpec& b) {
  if (!(b.x_min < b.x_max)) throw ConfigError("wavepacket: box needs x_min < x_max");
  if (b.n < 16 || (b.n & (b.n - 1)) != 0)
    throw ConfigError("wavepacket: grid size must be a power of two >= 16");
}

}

// Second-order split-operator (potential half-step, spectral kinetic step,
// potential half-step) on a periodic box.
inline EvolutionRun evolve(const PacketSpec& packet,
                           const std::optional<PotentialSpec>& spec, const BoxSpec& box,
                           double dt, double t_final) {
  detail::validate_packet(packet);
  detail::validate_box(box);
  if (spec) validate(*spec);
  if (!(dt > 0.0) || !(t_final > dt)) throw ConfigError("wavepacket: need 0 < dt < t_final");

  const std::size_t N = box.n;
  const double L = box.x_max - box.x_min;
  const double dx = L / static_cast<double>(N);
  const double m = packet.mass;
  if (dt > 0.1 * m * dx * dx + 1e-15)
    throw ConfigError("wavepacket: dt exceeds the 0.1 m dx^2 accuracy bound");

  // box must cover ballistic extremes (either direction) with an 8 sigma margin
  const double reach = packet.k0 / m * t_final;
  if (box.x_min > packet.x0 - reach - 8.0 * packet.sigma_x ||
      box.x_max < packet.x0 + reach + 8.0 * packet.sigma_x)
    throw ConfigError("wavepacket: box edges closer than 8 sigma to ballistic extremes");
  if (spec) {
    const auto [ba, bb] = detail::scattering_cuts(*spec);
    (void)bb;
    if (!(packet.x0 + 4.0 * packet.sigma_x < ba))
      throw ConfigError("wavepacket: packet not initially clear of the barrier");
  }

  const long n_steps = static_cast<long>(std::ceil(t_final / dt - 1e-12));
  const double dte = t_final / static_cast<double>(n_steps);
  const long cadence = std::max<long>(1, static_cast<long>(t_final / (512.0 * dte)));

  EvolutionRun run;
  run.dx = dx;
  run.dt = dte;
  run.t_final = t_final;
  run.x.resize(N);
  for (std::size_t j = 0; j < N; ++j) run.x[j] = box.x_min + dx * static_cast<double>(j);
  run.gate_x = spec ? detail::scattering_cuts(*spec).second : box.x_min;

  std::vector<std::complex<double>> psi(N);
  const double norm_c = std::pow(2.0 * M_PI * packet.sigma_x * packet.sigma_x, -0.25);
  for (std::size_t j = 0; j < N; ++j) {
    const double d = run.x[j] - packet.x0;
    psi[j] = norm_c *
             std::exp(std::complex<double>(-d * d / (4.0 * packet.sigma_x * packet.sigma_x),
                                           packet.k0 * run.x[j]));
  }

  std::vector<std::complex<double>> half_v(N), kin(N);
  for (std::size_t j = 0; j < N; ++j) {
    const double u = spec ? evaluate(*spec, run.x[j]) : 0.0;
    half_v[j] = std::exp(std::complex<double>(0.0, -0.5 * u * dte));
    const double kj = 2.0 * M_PI / L *
                      (j <= N / 2 ? static_cast<double>(j)
                                  : static_cast<double>(j) - static_cast<double>(N));
    kin[j] = std::exp(std::complex<double>(0.0, -kj * kj * dte / (2.0 * m)));
  }

  fftw_plan fwd, bwd;
  {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    auto* buf = reinterpret_cast<fftw_complex*>(psi.data());
    fwd = fftw_plan_dft_1d(static_cast<int>(N), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_1d(static_cast<int>(N), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  const double inv_n = 1.0 / static_cast<double>(N);

  const auto record = [&](double t) {
    double norm = 0.0;
    for (const auto& v : psi) norm += std::norm(v);
    norm *= dx;
    run.snapshots.push_back({t, psi});
    run.norm_history.push_back(norm);
  };
  record(0.0);

  for (long step = 1; step <= n_steps; ++step) {
    for (std::size_t j = 0; j < N; ++j) psi[j] *= half_v[j];
    fftw_execute(fwd);
    for (std::size_t j = 0; j < N; ++j) psi[j] *= kin[j] * inv_n;
    fftw_execute(bwd);
    for (std::size_t j = 0; j < N; ++j) psi[j] *= half_v[j];
    if (step % cadence == 0 || step == n_steps) record(dte * static_cast<double>(step));
  }
  {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }

  const double norm0 = run.norm_history.front();
  for (double nv : run.norm_history)
    if (std::abs(nv / norm0 - 1.0) > 1e-8)
      throw UnstableStep("wavepacket: norm drifted beyond 1e-8 during the run");

  // wraparound control: probability within the edge bands must stay negligible
  const std::size_t band = std::max<std::size_t>(2, N / 256);
  double edge_max = 0.0;
  for (const auto& snap : run.snapshots) {
    double p = 0.0;
    for (std::size_t j = 0; j < band; ++j)
      p += std::norm(snap.psi[j]) + std::norm(snap.psi[N - 1 - j]);
    edge_max = std::max(edge_max, p * dx);
  }
  if (edge_max > 1e-10)
    throw BoxTooSmall("wavepacket: edge probability exceeded 1e-10 (wraparound risk)");

  return run;
}

// Arrival time of the |psi|^2 maximum at the detector, quadratic interpolation
// between snapshots.
inline double peak_arrival(const EvolutionRun& run, double detector_x) {
  if (detector_x < run.gate_x)
    throw ComputeError("peak_arrival: detector must sit beyond the barrier");
  if (detector_x < run.x.front() || detector_x > run.x.back())
    throw ComputeError("peak_arrival: detector outside the box");
  std::size_t j = static_cast<std::size_t>(
      std::lround((detector_x - run.x.front()) / run.dx));
  j = std::min(j, run.x.size() - 1);

  std::size_t best = 0;
  double best_v = -1.0;
  std::vector<double> series(run.snapshots.size());
  for (std::size_t s = 0; s < run.snapshots.size(); ++s) {
    series[s] = std::norm(run.snapshots[s].psi[j]);
    if (series[s] > best_v) {
      best_v = series[s];
      best = s;
    }
  }
  if (best_v < 1e-24)
    throw NoTransmission("peak_arrival: detector signal below the 1e-12 amplitude floor");
  if (best == 0 || best + 1 == series.size()) return run.snapshots[best].time;
  const double y0 = series[best - 1], y1 = series[best], y2 = series[best + 1];
  const double t0 = run.snapshots[best - 1].time, t1 = run.snapshots[best].time,
               t2 = run.snapshots[best + 1].time;
  const double denom = y0 - 2.0 * y1 + y2;
  if (denom >= 0.0) return t1;  // flat or non-concave sampling, no refinement
  const double delta = 0.5 * (y0 - y2) / denom;
  return t1 + delta * 0.5 * (t2 - t0);
}

// Probability beyond x_gate in the final snapshot.
inline double transmitted_fraction(const EvolutionRun& run, double x_gate) {
  const auto& last = run.snapshots.back().psi;
  double p = 0.0;
  for (std::size_t j = 0; j < run.x.size(); ++j)
    if (run.x[j] > x_gate) p += std::norm(last[j]);
  return p * run.dx / run.norm_history.back();
}

// Barrier run vs free run on the identical grid and step sequence.
inline FreeComparison compare_free(const PacketSpec& packet, const PotentialSpec& spec,
                                   double detector_x, const BoxSpec& box, double dt,
                                   double t_final) {
  const EvolutionRun with = evolve(packet, spec, box, dt, t_final);
  const EvolutionRun free_run = evolve(packet, std::nullopt, box, dt, t_final);
  FreeComparison out;
  out.arrival_barrier = peak_arrival(with, detector_x);
  out.arrival_free = peak_arrival(free_run, detector_x);
  out.advance = out.arrival_free - out.arrival_barrier;
  out.transmitted_fraction = transmitted_fraction(with, with.gate_x);
  return out;
}

}
