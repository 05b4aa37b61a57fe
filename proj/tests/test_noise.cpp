#include <doctest.h>

#include <cmath>

#include "fluctuon/error.hpp"
#include "fluctuon/noise.hpp"
#include "test_util.hpp"

using namespace fluctuon;
using fluctuon::test::kPi;
using fluctuon::test::rel_err;

namespace {

void check_constant(const GridField& f, double expected, double tol) {
  for (double x : f.values()) CHECK(std::abs(x - expected) <= tol * std::max(1.0, std::abs(expected)));
}

}  // namespace

TEST_CASE("build_basis: constant mode only") {
  const NoiseModel m = build_basis(1, 0, 16);
  CHECK(m.mode_count() == 1);
  const StructureSums s = structure_sums(m);
  check_constant(s.f1, 1.0, 1e-14);
  check_constant(s.f3, 0.0, 1e-14);
  check_constant(s.f2[0], 0.0, 1e-14);
}

TEST_CASE("build_basis: M=2 on N=32 gives F1=5 and F3=40 pi^2") {
  const NoiseModel m = build_basis(1, 2, 32);
  CHECK(m.mode_count() == 5);
  const StructureSums s = structure_sums(m);
  check_constant(s.f1, 5.0, 1e-12);
  check_constant(s.f3, 40.0 * kPi * kPi, 1e-12);
  check_constant(s.f2[0], 0.0, 1e-12 * s.f3_sup);
  CHECK(s.f2_sup <= 1e-12 * s.f3_sup);
}

TEST_CASE("build_basis: unresolved cutoff") {
  CHECK_THROWS_AS(build_basis(1, 3, 8), ResolutionTooSmall);
  CHECK_THROWS_AS(build_basis(1, 3, 8), InvalidArgument);
}

TEST_CASE("structure_sums: M=5 gives F3 = 8 pi^2 55") {
  const StructureSums s = structure_sums(build_basis(1, 5, 64));
  CHECK(rel_err(s.f3_sup, 8.0 * kPi * kPi * 55.0) < 1e-12);
}

TEST_CASE("F1 constant, F2 zero and F3 closed form for M <= 16") {
  for (int m = 0; m <= 16; ++m) {
    const NoiseModel model = build_basis(1, m, 128);
    CHECK(model.mode_count() == static_cast<std::size_t>(2 * m + 1));
    const StructureSums s = structure_sums(model);
    CHECK(rel_err(s.f1.max(), s.f1.min()) < 1e-12);
    CHECK(s.f2_sup <= 1e-12 * std::max(1.0, s.f3_sup));
    const double closed = 8.0 * kPi * kPi / 6.0 * m * (m + 1.0) * (2.0 * m + 1.0);
    CHECK(f3_closed_form_1d(m) == doctest::Approx(closed).epsilon(1e-14));
    if (m > 0) CHECK(rel_err(s.f3_sup, closed) < 1e-10);
  }
}

TEST_CASE("two-dimensional basis") {
  const NoiseModel m = build_basis(2, 2, 16);
  CHECK(m.mode_count() == 25);
  const StructureSums s = structure_sums(m);
  CHECK(rel_err(s.f1.max(), 25.0) < 1e-12);
  CHECK(rel_err(s.f1.min(), 25.0) < 1e-12);
  CHECK(s.f2_sup <= 1e-12 * s.f3_sup);
  CHECK(rel_err(s.f3.max(), s.f3.min()) < 1e-12);
}

TEST_CASE("smaller cutoffs are prefixes of larger ones") {
  for (int dim : {1, 2}) {
    const NoiseBasis small(dim, 2), large(dim, 4);
    for (std::size_t j = 0; j < small.mode_count(); ++j) {
      CHECK(small.mode(j).wavevector == large.mode(j).wavevector);
      CHECK(small.mode(j).parity == large.mode(j).parity);
    }
  }
  CHECK(cutoff_mode_count(1, 3) == 7);
  CHECK(cutoff_mode_count(2, 3) == 49);
}

TEST_CASE("sample_increments: unit variance for dt=1, M=0") {
  const NoiseModel m = build_basis(1, 0, 16);
  NoiseStream stream(5, 0);
  const int n = 100000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const ModeIncrements inc = sample_increments(m, 1.0, stream);
    REQUIRE(inc.values.size() == 1);
    s += inc.values[0];
    s2 += inc.values[0] * inc.values[0];
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  CHECK(std::abs(mean) < 3.0 * std::sqrt(1.0 / n));
  CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / n));
  CHECK(stream.next_step() == static_cast<std::uint64_t>(n));
}

TEST_CASE("sample_increments: determinism and preconditions") {
  const NoiseModel m = build_basis(1, 3, 32);
  const NoiseStream a(9, 2), b(9, 2);
  const ModeIncrements x = a.at(17, m.mode_count(), 1, 0.01);
  const ModeIncrements y = b.at(17, m.mode_count(), 1, 0.01);
  CHECK(x.values == y.values);
  const ModeIncrements wide = a.at(17, 40, 1, 0.01);
  for (std::size_t j = 0; j < x.values.size(); ++j) CHECK(wide.values[j] == x.values[j]);
  NoiseStream s(1, 0);
  CHECK_THROWS_AS((void)sample_increments(m, 0.0, s), InvalidArgument);
  CHECK_THROWS_AS((void)sample_increments(m, -1.0, s), InvalidArgument);
}

TEST_CASE("noise_flux: trivial cases") {
  const NoiseModel m0 = build_basis(1, 0, 16);
  NoiseStream stream(3, 0);
  const ModeIncrements inc = sample_increments(m0, 0.1, stream);
  const VectorField zero = noise_flux(m0, GridField(1, 16, 0.0), inc);
  check_constant(zero[0], 0.0, 0.0);
  const VectorField one = noise_flux(m0, GridField(1, 16, 1.0), inc);
  check_constant(one[0], inc.values[0], 1e-15);
  CHECK_THROWS_AS((void)noise_flux(m0, GridField(1, 32, 1.0), inc), GridMismatch);
}

TEST_CASE("noise_flux: pointwise variance is F1 dt amp^2") {
  const int n_grid = 32;
  const NoiseModel m = build_basis(1, 3, n_grid);
  GridField amp(1, n_grid);
  for (std::size_t i = 0; i < amp.size(); ++i) amp[i] = 0.5 + 0.25 * std::sin(2.0 * kPi * amp.coordinate(i, 0));
  const double dt = 0.01;
  const int draws = 10000;
  std::vector<double> s(amp.size(), 0.0), s2(amp.size(), 0.0);
  NoiseStream stream(11, 0);
  for (int k = 0; k < draws; ++k) {
    const VectorField f = noise_flux(m, amp, sample_increments(m, dt, stream));
    for (std::size_t i = 0; i < amp.size(); ++i) {
      s[i] += f[0][i];
      s2[i] += f[0][i] * f[0][i];
    }
  }
  const StructureSums sums = structure_sums(m);
  for (std::size_t i = 0; i < amp.size(); i += 8) {
    const double expected = sums.f1[i] * dt * amp[i] * amp[i];
    const double var = s2[i] / draws - (s[i] / draws) * (s[i] / draws);
    // Var of the sample variance is 2 sigma^4 / n.
    CHECK(std::abs(var - expected) < 3.0 * std::sqrt(2.0 / draws) * expected);
  }
}
