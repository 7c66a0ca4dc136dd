#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "qtlab/dispersion.hpp"

using namespace qtlab;

namespace {

const LorentzParams kModel{0.5, 1.0, 0.05};  // omega_p = omega_0/2, gamma = omega_0/20

SusceptibilitySamples model_grid(std::size_t n = 4096, double wmax = 6.0) {
  return lorentz_samples(kModel, wmax, n);
}

}  // namespace

TEST_CASE("lorentz susceptibility at its landmarks", "[dispersion]") {
  CHECK(lorentz_susceptibility(kModel, 0.0).real() == Catch::Approx(0.25));
  CHECK(lorentz_susceptibility(kModel, 0.0).imag() == 0.0);
  const auto at_res = lorentz_susceptibility(kModel, 1.0);
  CHECK(at_res.real() == Catch::Approx(0.0).margin(1e-15));
  CHECK(at_res.imag() == Catch::Approx(0.25 / 0.05));
  CHECK_THROWS_AS(lorentz_susceptibility({0.5, -1.0, 0.05}, 1.0), ConfigError);
}

TEST_CASE("real part is recovered from the imaginary part on the model grid",
          "[dispersion]") {
  const SusceptibilitySamples smp = model_grid();
  double worst = 0.0;
  for (double w : {0.2, 0.5, 0.8, 1.3, 2.0, 3.5, 5.0}) {
    const double got = kk_real_from_imag(smp, w);
    const double want = lorentz_susceptibility(kModel, w).real();
    worst = std::max(worst, std::abs(got - want) / std::abs(want));
  }
  CHECK(worst < 5e-3);
}

TEST_CASE("imaginary part is recovered from the real part away from the resonance",
          "[dispersion]") {
  const SusceptibilitySamples smp = model_grid();
  for (double w : {0.5, 0.8, 1.3, 2.0}) {
    const double got = kk_imag_from_real(smp, w);
    const double want = lorentz_susceptibility(kModel, w).imag();
    CHECK(got == Catch::Approx(want).epsilon(2e-2));
  }
}

TEST_CASE("a lossless input transforms to a vanishing real part", "[dispersion]") {
  SusceptibilitySamples smp = model_grid(1024);
  for (auto& c : smp.chi) c = std::complex<double>(c.real(), 0.0);
  smp.model.reset();
  CHECK(kk_real_from_imag(smp, 1.7) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("a non-decaying input is flagged rather than transformed", "[dispersion]") {
  SusceptibilitySamples smp = model_grid(1024);
  for (std::size_t i = 0; i < smp.omega.size(); ++i)
    smp.chi[i] = std::complex<double>(0.3, 0.7);
  smp.model.reset();
  CHECK_THROWS_AS(kk_real_from_imag(smp, 1.7), NonDecayingInput);
  CHECK_THROWS_AS(kk_imag_from_real(smp, 1.7), NonDecayingInput);
}

TEST_CASE("a grid that cannot resolve the resonance is refused", "[dispersion]") {
  const SusceptibilitySamples smp = lorentz_samples(kModel, 6.0, 64);
  CHECK_THROWS_AS(kk_real_from_imag(smp, 2.0), GridTooCoarse);
}

TEST_CASE("evaluation is interior-only", "[dispersion]") {
  const SusceptibilitySamples smp = model_grid(1024);
  CHECK_THROWS_AS(kk_real_from_imag(smp, 0.0), ComputeError);
  CHECK_THROWS_AS(kk_real_from_imag(smp, 6.0), ComputeError);
  CHECK_THROWS_AS(kk_real_from_imag(smp, 7.0), ComputeError);
}

TEST_CASE("sample validation catches malformed grids", "[dispersion]") {
  SusceptibilitySamples smp = model_grid(64);
  smp.model.reset();
  smp.omega[10] = smp.omega[9];
  CHECK_THROWS_AS(kk_real_from_imag(smp, 2.0), ConfigError);
  SusceptibilitySamples tiny;
  tiny.omega = {0.0, 1.0};
  tiny.chi = {{0.0, 0.0}, {0.0, 0.0}};
  CHECK_THROWS_AS(kk_real_from_imag(tiny, 0.5), ConfigError);
  CHECK_THROWS_AS(lorentz_samples(kModel, -1.0, 128), ConfigError);
  CHECK_THROWS_AS(lorentz_samples(kModel, 6.0, 8), ConfigError);
}

TEST_CASE("refractive profile is passive and continuous through the resonance",
          "[dispersion]") {
  const RefractiveProfile prof = refractive_profile(model_grid());
  for (std::size_t i = 0; i < prof.omega.size(); ++i) {
    CHECK(prof.n[i].imag() >= -1e-14);
    if (i > 0) CHECK(std::abs(prof.n[i] - prof.n[i - 1]) < 0.15);
  }
  CHECK(prof.n.front().real() == Catch::Approx(std::sqrt(1.25)).epsilon(1e-12));
}

TEST_CASE("anomalous dispersion produces superluminal and negative group velocity",
          "[dispersion]") {
  const RefractiveProfile prof = refractive_profile(model_grid());
  double vg_max = 0.0, vg_min = 0.0;
  for (double v : prof.v_group) {
    vg_max = std::max(vg_max, v);
    vg_min = std::min(vg_min, v);
  }
  CHECK(vg_max > 1.0);
  CHECK(vg_min < 0.0);
  // phase velocity exceeds c wherever Re n dips below one
  bool fast_phase = false;
  for (double v : prof.v_phase) fast_phase = fast_phase || v > 1.0;
  CHECK(fast_phase);
}

TEST_CASE("a branch crossing of 1 + chi is reported, not silently squared away",
          "[dispersion]") {
  SusceptibilitySamples smp;
  for (int i = 0; i < 32; ++i) {
    smp.omega.push_back(0.1 * (i + 1));
    smp.chi.emplace_back(-2.0, (i < 16) ? 1e-3 : -1e-3);
  }
  CHECK_THROWS_AS(refractive_profile(smp), BranchAmbiguity);
  SusceptibilitySamples axis;
  for (int i = 0; i < 32; ++i) {
    axis.omega.push_back(0.1 * (i + 1));
    axis.chi.emplace_back(-2.0, 0.0);
  }
  CHECK_THROWS_AS(refractive_profile(axis), BranchAmbiguity);
}
