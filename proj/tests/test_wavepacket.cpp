#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "qtlab/quadrature.hpp"
#include "qtlab/wavepacket.hpp"

using namespace qtlab;

TEST_CASE("free packet follows the analytic dispersion pointwise", "[wavepacket]") {
  const PacketSpec packet{-40.0, 1.0, 5.0, 1.0};
  const BoxSpec box{-256.0, 256.0, 2048};
  const EvolutionRun run = evolve(packet, std::nullopt, box, 0.00625, 80.0);

  for (std::size_t s : {run.snapshots.size() / 2, run.snapshots.size() - 1}) {
    const auto& snap = run.snapshots[s];
    const double t = snap.time;
    const double st2 = packet.sigma_x * packet.sigma_x +
                       t * t / (4.0 * packet.sigma_x * packet.sigma_x);
    const double center = packet.x0 + packet.k0 * t;
    double worst = 0.0;
    for (std::size_t j = 0; j < run.x.size(); ++j) {
      const double d = run.x[j] - center;
      const double want = std::exp(-d * d / (2.0 * st2)) / std::sqrt(2.0 * M_PI * st2);
      worst = std::max(worst, std::abs(std::norm(snap.psi[j]) - want));
    }
    CHECK(worst < 1e-10);
  }
  for (double nv : run.norm_history) CHECK(nv == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("transmitted fraction matches the stationary spectral average",
          "[wavepacket]") {
  const PotentialSpec barrier{Gaussian{1.0, 0.0, 1.0}, 1.0};
  const PacketSpec packet{-70.0, 1.5, 10.0, 1.0};
  const BoxSpec box{-512.0, 512.0, 4096};
  const FreeComparison cmp = compare_free(packet, barrier, 10.0, box, 0.00625, 100.0);

  const double sk = 1.0 / (2.0 * packet.sigma_x);
  const double wnorm = std::sqrt(2.0 * packet.sigma_x * packet.sigma_x / M_PI);
  const auto integrand = [&](double k) {
    const double d = k - packet.k0;
    return wnorm * std::exp(-2.0 * packet.sigma_x * packet.sigma_x * d * d) *
           scattering_amplitudes(barrier, k * k / 2.0).T;
  };
  const QuadResult oracle =
      integrate_adaptive(integrand, packet.k0 - 8.0 * sk, packet.k0 + 8.0 * sk, 1e-9);
  CHECK(cmp.transmitted_fraction == Catch::Approx(oracle.value).epsilon(0.01));

  // mostly-transmitted packet: free arrival is ballistic, the barrier delays it
  CHECK(cmp.arrival_free ==
        Catch::Approx((10.0 - packet.x0) / packet.k0).epsilon(0.02));
  CHECK(std::isfinite(cmp.advance));
  CHECK(cmp.arrival_barrier > cmp.arrival_free);
}

TEST_CASE("a spreading packet outgrowing the box is reported", "[wavepacket]") {
  const PacketSpec packet{-10.0, 0.5, 0.5, 1.0};
  const BoxSpec box{-32.0, 32.0, 256};
  CHECK_THROWS_AS(evolve(packet, std::nullopt, box, 0.00625, 20.0), BoxTooSmall);
}

TEST_CASE("a detector the packet never reaches reports no transmission", "[wavepacket]") {
  // the packet ends the run at x = -80, far short of the barrier at 30
  const PotentialSpec barrier{Rectangular{1.0, 30.0, 32.0}, 1.0};
  const PacketSpec packet{-100.0, 1.0, 5.0, 1.0};
  const BoxSpec box{-256.0, 256.0, 2048};
  const EvolutionRun run = evolve(packet, barrier, box, 0.00625, 20.0);
  CHECK_THROWS_AS(peak_arrival(run, 40.0), NoTransmission);
  CHECK(transmitted_fraction(run, run.gate_x) < 1e-20);
}

TEST_CASE("time step and box constraints are enforced up front", "[wavepacket]") {
  const PacketSpec packet{-40.0, 1.0, 5.0, 1.0};
  const BoxSpec box{-256.0, 256.0, 2048};
  // dx = 0.25 caps dt at 0.1 m dx^2 = 0.00625
  CHECK_THROWS_AS(evolve(packet, std::nullopt, box, 0.007, 80.0), ConfigError);
  CHECK_THROWS_AS(evolve(packet, std::nullopt, box, 0.00625, 400.0), ConfigError);
  CHECK_THROWS_AS(evolve(packet, std::nullopt, BoxSpec{-256.0, 256.0, 2000}, 0.00625, 80.0),
                  ConfigError);
  CHECK_THROWS_AS(evolve(packet, std::nullopt, box, -1.0, 80.0), ConfigError);
  CHECK_THROWS_AS(evolve(PacketSpec{-40.0, -1.0, 5.0, 1.0}, std::nullopt, box, 0.00625, 80.0),
                  ConfigError);
  CHECK_THROWS_AS(evolve(PacketSpec{-40.0, 1.0, -5.0, 1.0}, std::nullopt, box, 0.00625, 80.0),
                  ConfigError);
  // packet tail on the barrier
  const PotentialSpec barrier{Rectangular{1.0, -2.0, 2.0}, 1.0};
  CHECK_THROWS_AS(evolve(PacketSpec{-18.0, 1.0, 5.0, 1.0}, barrier, box, 0.00625, 80.0),
                  ConfigError);
}

TEST_CASE("detector placement is validated against gate and box", "[wavepacket]") {
  const PacketSpec packet{-5.0, 1.0, 2.0, 1.0};
  const BoxSpec box{-32.0, 32.0, 256};
  const EvolutionRun run = evolve(packet, std::nullopt, box, 0.00625, 5.0);
  CHECK_THROWS_AS(peak_arrival(run, -33.0), ComputeError);
  CHECK_THROWS_AS(peak_arrival(run, 33.0), ComputeError);
}
