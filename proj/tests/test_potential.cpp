#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qtlab/potential.hpp"

using namespace qtlab;

TEST_CASE("rectangular profile is v0 inside and zero outside", "[potential]") {
  const PotentialSpec spec{Rectangular{2.0, -1.0, 3.0}, 1.0};
  CHECK(evaluate(spec, 0.0) == 2.0);
  CHECK(evaluate(spec, -1.0) == 2.0);
  CHECK(evaluate(spec, 3.0) == 2.0);
  CHECK(evaluate(spec, -1.0000001) == 0.0);
  CHECK(evaluate(spec, 3.0000001) == 0.0);
  CHECK(barrier_top(spec) == 2.0);
}

TEST_CASE("eckart and gaussian profiles match their closed forms", "[potential]") {
  const PotentialSpec eck{Eckart{1.5, 0.7}, 1.0};
  CHECK(evaluate(eck, 0.0) == Catch::Approx(1.5).epsilon(1e-15));
  const double c = std::cosh(0.7 / 0.7);
  CHECK(evaluate(eck, 0.7) == Catch::Approx(1.5 / (c * c)).epsilon(1e-15));
  CHECK(barrier_top(eck) == 1.5);

  const PotentialSpec gau{Gaussian{2.5, 0.5, 1.3}, 1.0};
  CHECK(evaluate(gau, 0.5) == Catch::Approx(2.5).epsilon(1e-15));
  CHECK(evaluate(gau, 0.5 + 1.3) == Catch::Approx(2.5 * std::exp(-0.5)).epsilon(1e-15));
  CHECK(evaluate(gau, 0.5 - 1.3) == evaluate(gau, 0.5 + 1.3));
}

TEST_CASE("sampled profile interpolates linearly and vanishes outside", "[potential]") {
  const PotentialSpec spec{Sampled{{0.0, 1.0, 2.0}, {0.0, 4.0, 0.0}}, 1.0};
  CHECK(evaluate(spec, 0.5) == Catch::Approx(2.0));
  CHECK(evaluate(spec, 1.25) == Catch::Approx(3.0));
  CHECK(evaluate(spec, -0.1) == 0.0);
  CHECK(evaluate(spec, 2.1) == 0.0);
  CHECK(barrier_top(spec) == 4.0);
}

TEST_CASE("invalid shape parameters are rejected", "[potential]") {
  CHECK_THROWS_AS(validate(PotentialSpec{Rectangular{1.0, 0.0, 1.0}, -1.0}), ConfigError);
  CHECK_THROWS_AS(validate(PotentialSpec{Rectangular{-1.0, 0.0, 1.0}, 1.0}), ConfigError);
  CHECK_THROWS_AS(validate(PotentialSpec{Rectangular{1.0, 2.0, 1.0}, 1.0}), ConfigError);
  CHECK_THROWS_AS(validate(PotentialSpec{Eckart{1.0, 0.0}, 1.0}), ConfigError);
  CHECK_THROWS_AS(validate(PotentialSpec{Gaussian{1.0, 0.0, -2.0}, 1.0}), ConfigError);
  CHECK_THROWS_AS(validate(PotentialSpec{Sampled{{0.0, 1.0}, {0.0, 0.0, 0.0}}, 1.0}),
                  ConfigError);
  CHECK_THROWS_AS(validate(PotentialSpec{Sampled{{0.0, 1.0}, {0.0, 0.0}}, 1.0}), ConfigError);
  CHECK_THROWS_AS(validate(PotentialSpec{Sampled{{0.0, 1.0, 1.0}, {0.0, 1.0, 0.0}}, 1.0}),
                  ConfigError);
}

TEST_CASE("asymptotic cuts solve U = eps in closed form", "[potential]") {
  const double eps = 1e-10;
  const PotentialSpec eck{Eckart{2.0, 0.9}, 1.0};
  const auto [el, er] = asymptotic_check(eck, eps);
  CHECK(el == -er);
  CHECK(evaluate(eck, er) == Catch::Approx(eps).epsilon(1e-10));

  const PotentialSpec gau{Gaussian{2.0, -0.3, 1.1}, 1.0};
  const auto [gl, gr] = asymptotic_check(gau, eps);
  CHECK(0.5 * (gl + gr) == Catch::Approx(-0.3).margin(1e-12));
  CHECK(evaluate(gau, gr) == Catch::Approx(eps).epsilon(1e-10));

  const PotentialSpec rec{Rectangular{2.0, -1.0, 4.0}, 1.0};
  CHECK(asymptotic_check(rec, eps) == std::pair{-1.0, 4.0});
}

TEST_CASE("sampled table that stays high at the ends is flagged", "[potential]") {
  const PotentialSpec spec{Sampled{{0.0, 1.0, 2.0}, {0.5, 1.0, 0.5}}, 1.0};
  CHECK_THROWS_AS(asymptotic_check(spec, 1e-10), NonDecaying);
}

TEST_CASE("turning points of the analytic shapes", "[potential]") {
  const PotentialSpec rec{Rectangular{1.0, -2.0, 5.0}, 1.0};
  const TurningPoints tr = find_turning_points(rec, 0.4);
  CHECK(tr.a == -2.0);
  CHECK(tr.b == 5.0);

  const PotentialSpec gau{Gaussian{1.0, 0.0, 1.0}, 1.0};
  const double E = 0.5;
  const TurningPoints tg = find_turning_points(gau, E);
  const double b_exact = std::sqrt(2.0 * std::log(1.0 / E));
  CHECK(tg.b == Catch::Approx(b_exact).epsilon(1e-12));
  CHECK(tg.a == Catch::Approx(-b_exact).epsilon(1e-12));
  CHECK(evaluate(gau, tg.b) == Catch::Approx(E).epsilon(1e-12));

  const PotentialSpec eck{Eckart{1.0, 1.0}, 1.0};
  const TurningPoints te = find_turning_points(eck, 0.25);
  CHECK(te.b == Catch::Approx(std::acosh(2.0)).epsilon(1e-12));
}

TEST_CASE("energies at or above the top leave no turning points", "[potential]") {
  const PotentialSpec gau{Gaussian{1.0, 0.0, 1.0}, 1.0};
  CHECK_THROWS_AS(find_turning_points(gau, 1.0), NoBarrier);
  CHECK_THROWS_AS(find_turning_points(gau, 1.5), NoBarrier);
  CHECK_THROWS_AS(find_turning_points(gau, -0.5), ComputeError);
}

TEST_CASE("two separated bumps are refused", "[potential]") {
  Sampled s;
  for (int i = 0; i <= 400; ++i) {
    const double x = -10.0 + 20.0 * i / 400.0;
    s.x.push_back(x);
    s.u.push_back(std::exp(-(x - 4.0) * (x - 4.0)) + std::exp(-(x + 4.0) * (x + 4.0)));
  }
  const PotentialSpec spec{std::move(s), 1.0};
  CHECK_THROWS_AS(find_turning_points(spec, 0.5), MultiBump);
}
