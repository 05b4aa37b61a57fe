#include <doctest.h>

#include <cmath>
#include <vector>

#include "fluctuon/analysis.hpp"
#include "fluctuon/error.hpp"
#include "test_util.hpp"

using namespace fluctuon;
using fluctuon::test::kPi;

namespace {

GridField cosine(int n, int k = 1) {
  GridField f(1, n);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::cos(2.0 * kPi * k * f.coordinate(i, 0));
  return f;
}

}  // namespace

TEST_CASE("dft of a constant and a cosine") {
  const SpectralField c = dft(GridField(1, 16, 3.5));
  CHECK(std::abs(c.at(0) - Complex(3.5, 0.0)) < 1e-15);
  for (int n = 1; n < 16; ++n) CHECK(std::abs(c.at(n)) < 1e-15);

  const SpectralField s = dft(cosine(32));
  CHECK(std::abs(s.at(1) - Complex(0.5, 0.0)) < 1e-15);
  CHECK(std::abs(s.at(-1) - Complex(0.5, 0.0)) < 1e-15);
  CHECK(std::abs(s.at(2)) < 1e-15);
}

TEST_CASE("dft sign convention: sin(2 pi x) has g_1 = -i/2") {
  GridField f(1, 16);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::sin(2.0 * kPi * f.coordinate(i, 0));
  const SpectralField s = dft(f);
  CHECK(std::abs(s.at(1) - Complex(0.0, -0.5)) < 1e-15);
}

TEST_CASE("Parseval and inverse transform") {
  for (int dim : {1, 2}) {
    GridField g(dim, 16);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::sin(0.37 * static_cast<double>(i * i)) + 0.1 * i;
    const SpectralField s = dft(g);
    double spec = 0.0, grid = 0.0;
    for (const Complex& z : s.coefficients()) spec += std::norm(z);
    for (double x : g.values()) grid += x * x;
    grid /= static_cast<double>(g.size());
    CHECK(std::abs(spec - grid) < 1e-12 * grid);
    const GridField back = idft(s);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(back[i] - g[i]) < 1e-12);
  }
  CHECK_THROWS_AS((void)dft(GridField(1, 12)), InvalidArgument);
}

TEST_CASE("h_neg_norm") {
  CHECK(h_neg_norm(dft(GridField(1, 16, -2.0)), 1.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(h_neg_norm(dft(cosine(64)), 1.0) ==
        doctest::Approx(std::sqrt(2.0 * 0.25 / (1.0 + 4.0 * kPi * kPi))).epsilon(1e-13));
  GridField g = cosine(64, 3);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += 0.3;
  double l2 = 0.0;
  for (double x : g.values()) l2 += x * x * g.cell_volume();
  CHECK(std::abs(h_neg_norm(dft(g), 0.0) - std::sqrt(l2)) < 1e-12);
  CHECK_THROWS_AS((void)h_neg_norm(dft(g), -0.5), InvalidArgument);
}

TEST_CASE("fluctuation_field") {
  const GridField rho(1, 8, 2.0);
  const GridField zero = fluctuation_field(rho, 2.0, 1e-3);
  for (double x : zero.values()) CHECK(x == 0.0);
  const double eps = 1e-4;
  GridField w(1, 8), r(1, 8);
  for (std::size_t i = 0; i < 8; ++i) {
    w[i] = std::cos(static_cast<double>(i));
    r[i] = 2.0 + std::sqrt(eps) * w[i];
  }
  const GridField v = fluctuation_field(r, 2.0, eps);
  for (std::size_t i = 0; i < 8; ++i) CHECK(v[i] == doctest::Approx(w[i]).epsilon(1e-10));
  GridField r2 = r;
  for (std::size_t i = 0; i < 8; ++i) r2[i] = 2.0 + 2.0 * (r[i] - 2.0);
  const GridField v2 = fluctuation_field(r2, 2.0, eps);
  for (std::size_t i = 0; i < 8; ++i) CHECK(v2[i] == doctest::Approx(2.0 * v[i]).epsilon(1e-12));
  CHECK_THROWS_AS((void)fluctuation_field(rho, 2.0, 0.0), InvalidArgument);
}

TEST_CASE("validate_norm_spec") {
  CHECK_NOTHROW(validate_norm_spec(NormSpec{1.0, Tau::two}, 1));
  CHECK_THROWS_AS(validate_norm_spec(NormSpec{0.4, Tau::two}, 1), InvalidArgument);
  CHECK_THROWS_AS(validate_norm_spec(NormSpec{1.0, Tau::two}, 2), InvalidArgument);
  CHECK_THROWS_AS(validate_norm_spec(NormSpec{1.0, Tau::infinity}, 1), InvalidArgument);
  CHECK_NOTHROW(validate_norm_spec(NormSpec{1.6, Tau::infinity}, 1));
}

TEST_CASE("spacetime_norm") {
  const std::vector<double> t{0.0, 0.1, 0.2, 0.25};
  const std::vector<double> c(4, 3.0);
  CHECK(spacetime_norm(t, c, Tau::two) == doctest::Approx(3.0 * std::sqrt(0.25)).epsilon(1e-14));
  const std::vector<double> v{1.0, 5.0, 2.0, 0.5};
  CHECK(spacetime_norm(t, v, Tau::infinity) == 5.0);
  CHECK_THROWS_AS((void)spacetime_norm({}, {}, Tau::two), InvalidArgument);
  CHECK_THROWS_AS((void)spacetime_norm(std::vector<double>{0.2, 0.1}, std::vector<double>{1.0, 1.0}, Tau::two),
                  InvalidArgument);

  // int_0^1 sin^2(pi t) dt = 1/2; trapezoid error of g = sin^2 is at most T h^2 max|g''| / 12.
  auto sampled = [](int n) {
    std::vector<double> times, vals;
    for (int i = 0; i <= n; ++i) {
      times.push_back(static_cast<double>(i) / n);
      vals.push_back(std::sin(kPi * times.back()));
    }
    return spacetime_norm(times, vals, Tau::two);
  };
  for (int n : {8, 16, 32}) {
    const double h = 1.0 / n;
    const double bound = h * h * 2.0 * kPi * kPi / 12.0;
    CHECK(std::abs(sampled(n) * sampled(n) - 0.5) <= bound);
    CHECK(std::abs(sampled(2 * n) * sampled(2 * n) - sampled(n) * sampled(n)) <= bound);
  }
}

TEST_CASE("lp_spacetime_norm") {
  const std::vector<double> t{0.0, 0.05, 0.2};
  const std::vector<GridField> c(3, GridField(1, 8, 1.5));
  for (double h : {1.0, 2.0, 3.5}) {
    CHECK(lp_spacetime_norm(t, c, h) == doctest::Approx(1.5 * std::pow(0.2, 1.0 / h)).epsilon(1e-13));
  }
  const std::vector<GridField> z(3, GridField(1, 8, 0.0));
  CHECK(lp_spacetime_norm(t, z, 2.0) == 0.0);

  std::vector<GridField> f;
  std::vector<double> l2;
  for (std::size_t s = 0; s < t.size(); ++s) {
    GridField g(1, 16);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::cos(0.3 * i + static_cast<double>(s));
    double sq = 0.0;
    for (double x : g.values()) sq += x * x * g.cell_volume();
    l2.push_back(std::sqrt(sq));
    f.push_back(g);
  }
  CHECK(std::abs(lp_spacetime_norm(t, f, 2.0) - spacetime_norm(t, l2, Tau::two)) < 1e-12);
  CHECK_THROWS_AS((void)lp_spacetime_norm(t, c, 0.5), InvalidArgument);
}
