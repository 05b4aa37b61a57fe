#include <doctest.h>

#include <cmath>

#include "fluctuon/error.hpp"
#include "fluctuon/limit_ou.hpp"
#include "test_util.hpp"

using namespace fluctuon;
using fluctuon::test::kPi;

TEST_CASE("build_ou: eigenvalues") {
  const OUModeSystem sys = build_ou(model_case(2), 1.0, NoiseBasis(1, 15), 32);
  CHECK(sys.mode_count() == 15);
  for (std::size_t p = 0; p < sys.mode_count(); ++p) {
    const int n = sys.wavevector(p)[0];
    CHECK(n != 0);
    CHECK(sys.lambda(p).imag() == 0.0);
    CHECK(sys.lambda(p).real() == doctest::Approx(-8.0 * kPi * kPi * n * n).epsilon(1e-12));
  }
  CHECK_THROWS_AS((void)sys.find(0), InvalidArgument);
  CHECK_THROWS_AS((void)build_ou(model_case(2), 1.0, NoiseBasis(1, 16), 32), InvalidArgument);
  CHECK_THROWS_AS((void)build_ou(model_case(2), 0.0, NoiseBasis(1, 4), 32), InvalidArgument);
}

TEST_CASE("build_ou: the constant noise mode does not couple") {
  const OUModeSystem sys = build_ou(linear_case(), 1.5, NoiseBasis(1, 5), 16);
  for (std::size_t p = 0; p < sys.mode_count(); ++p) {
    for (const auto& c : sys.couplings(p)) CHECK(c.mode != 0);
    CHECK(sys.noise_power(p) > 0.0);
  }
}

TEST_CASE("build_ou: drift gives an imaginary part") {
  const Coefficients c = from_functions(
      "drift", [](double z) { return z; }, [](double z) { return z; }, Exponents{},
      [](double z) { return Vec2{3.0 * z, 0.0}; });
  const OUModeSystem sys = build_ou(c, 1.0, NoiseBasis(1, 3), 16);
  const std::size_t p = sys.find(1);
  CHECK(sys.lambda(p).real() == doctest::Approx(-4.0 * kPi * kPi).epsilon(1e-9));
  CHECK(std::abs(sys.lambda(p).imag()) == doctest::Approx(2.0 * kPi * 3.0).epsilon(1e-6));
}

TEST_CASE("ou_step: pure decay without noise and a fixed zero mode") {
  const OUModeSystem sys = build_ou(model_case(2), 1.0, NoiseBasis(1, 7), 16);
  SpectralField v = ou_zero(sys);
  const std::size_t p = sys.find(1);
  v[sys.index(p)] = 1.0;
  v[sys.mirror_index(p)] = 1.0;
  ModeIncrements zero;
  zero.dt = 1e-3;
  zero.values.assign(sys.noise_mode_count(), 0.0);
  for (int k = 0; k < 50; ++k) v = ou_step(sys, v, zero, 1e-3);
  CHECK(std::abs(v[sys.index(p)]) == doctest::Approx(std::exp(sys.lambda(p).real() * 0.05)).epsilon(1e-12));
  CHECK(v.at(0) == Complex(0.0, 0.0));
}

TEST_CASE("ou_solve: zero horizon and determinism") {
  const OUModeSystem sys = build_ou(linear_case(), 1.0, NoiseBasis(1, 7), 16);
  const SpectralTrajectory z = ou_solve(sys, 0.0, 1e-3, 1, 0, std::vector<double>{0.0});
  REQUIRE(z.snapshots.size() == 1);
  for (const Complex& c : z.snapshots[0].coefficients()) CHECK(c == Complex(0.0, 0.0));

  const std::vector<double> times{0.0, 0.05, 0.1};
  const SpectralTrajectory a = ou_solve(sys, 0.1, 1e-3, 3, 2, times);
  const SpectralTrajectory b = ou_solve(sys, 0.1, 1e-3, 3, 2, times);
  CHECK(a.snapshots == b.snapshots);
  for (const auto& s : a.snapshots) CHECK(s.at(0) == Complex(0.0, 0.0));
  // v is real: conjugate symmetry.
  const std::size_t p = sys.find(2);
  CHECK(a.snapshots.back()[sys.mirror_index(p)] == std::conj(a.snapshots.back()[sys.index(p)]));
}

TEST_CASE("ou_solve: H^-beta energy grows to a plateau") {
  const OUModeSystem sys = build_ou(linear_case(), 1.0, NoiseBasis(1, 7), 16);
  const double dt = 1e-3;
  double previous = 0.0;
  double stationary = 0.0;
  for (std::size_t p = 0; p < sys.mode_count(); ++p) {
    const double n2 = std::pow(sys.wavevector(p)[0], 2);
    stationary += 2.0 * ou_stationary_variance(sys, p) / (1.0 + 4.0 * kPi * kPi * n2);
  }
  for (std::uint64_t steps : {10u, 50u, 200u, 1000u}) {
    double e = 0.0;
    for (std::size_t p = 0; p < sys.mode_count(); ++p) {
      const double n2 = std::pow(sys.wavevector(p)[0], 2);
      e += 2.0 * ou_discrete_variance(sys, p, dt, steps) / (1.0 + 4.0 * kPi * kPi * n2);
    }
    CHECK(e > previous);
    CHECK(e < stationary * 1.01);
    previous = e;
  }
  CHECK(previous == doctest::Approx(stationary).epsilon(0.05));
}

TEST_CASE("ou_step: Monte-Carlo variance matches the discrete closed form") {
  const OUModeSystem sys = build_ou(linear_case(), 1.0, NoiseBasis(1, 3), 16);
  const double dt = 2e-3;
  const std::uint64_t steps = 25;
  const int paths = 4000;
  const std::size_t p = sys.find(2);
  double s = 0.0, s2 = 0.0;
  for (int path = 0; path < paths; ++path) {
    const SpectralTrajectory t = ou_solve(sys, dt * steps, dt, 17, path, std::vector<double>{dt * steps});
    const double x = std::norm(t.snapshots.back()[sys.index(p)]);
    s += x;
    s2 += x * x;
  }
  const double mean = s / paths;
  const double se = std::sqrt((s2 / paths - mean * mean) / paths);
  CHECK(std::abs(mean - ou_discrete_variance(sys, p, dt, steps)) < 3.0 * se);
  // Stationary variance sigma^2 / (2 phi') per complex mode in d = 1.
  CHECK(ou_stationary_variance(sys, p) == doctest::Approx(0.5).epsilon(1e-12));
}
