#include "fluctuon/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <span>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fluctuon/error.hpp"
#include "fluctuon/format.hpp"

namespace fluctuon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();


double int_power(double z, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= z;
  return r;
}

// z^e with the conventions z^0 = 1 and 0^e = 0 (e > 0), 0^e = inf (e < 0).
// Integer and half-integer exponents skip std::pow.
double power(double z, double e) {
  if (e == 0.0) return 1.0;
  if (z <= 0.0) return e > 0.0 ? 0.0 : kInf;
  const double twice = 2.0 * e;
  if (twice == std::floor(twice) && std::abs(e) <= 8.0) {
    const int half_steps = static_cast<int>(std::abs(twice));
    double r = int_power(z, half_steps / 2);
    if (half_steps % 2 == 1) r *= std::sqrt(z);
    return e > 0.0 ? r : 1.0 / r;
  }
  return std::pow(z, e);
}

VectorFn zero_vector() {
  return [](double) { return Vec2{0.0, 0.0}; };
}

ScalarFn fd_derivative(ScalarFn f) {
  return [f = std::move(f)](double z) {
    const double h = 1e-6 * std::max(1.0, std::abs(z));
    if (z - h < 0.0) return (-3.0 * f(z) + 4.0 * f(z + h) - f(z + 2.0 * h)) / (2.0 * h);
    return (f(z + h) - f(z - h)) / (2.0 * h);
  };
}

VectorFn fd_derivative(VectorFn f) {
  return [f = std::move(f)](double z) {
    const double h = 1e-6 * std::max(1.0, std::abs(z));
    Vec2 out{};
    if (z - h < 0.0) {
      const Vec2 a = f(z), b = f(z + h), c = f(z + 2.0 * h);
      for (std::size_t i = 0; i < 2; ++i) out[i] = (-3.0 * a[i] + 4.0 * b[i] - c[i]) / (2.0 * h);
      return out;
    }
    const Vec2 a = f(z + h), b = f(z - h);
    for (std::size_t i = 0; i < 2; ++i) out[i] = (a[i] - b[i]) / (2.0 * h);
    return out;
  };
}

double norm2(const Vec2& v) { return v[0] * v[0] + v[1] * v[1]; }

}  // namespace

Coefficients power_family(double a, double b, Exponents exponents) {
  Coefficients c;
  c.phi = [a](double z) { return power(z, a); };
  c.dphi = [a](double z) { return a * power(z, a - 1.0); };
  c.ddphi = [a](double z) { return a == 1.0 ? 0.0 : a * (a - 1.0) * power(z, a - 2.0); };
  c.sigma = [b](double z) { return power(z, b); };
  c.dsigma = [b](double z) { return b * power(z, b - 1.0); };
  c.nu = zero_vector();
  c.dnu = zero_vector();
  c.ddnu = zero_vector();
  c.has_drift = false;
  c.exponents = exponents;
  c.name = "power(phi=z^" + format_real(a) + ",sigma=z^" + format_real(b) + ")";
  return c;
}

Coefficients model_case(double m) {
  if (!(m >= 1.0)) throw InvalidArgument("model case requires m >= 1");
  Exponents e;
  e.m = m;
  e.p = std::max(4.0, m * m);
  e.k = std::max(0.0, (m - 2.0) / 2.0);
  e.g = std::max(0.0, m - 2.0);
  e.theta = 0.25;
  Coefficients c = power_family(m, m / 2.0, e);
  c.name = "power(m=" + format_real(m) + ")";
  return c;
}

Coefficients linear_case() {
  Exponents e;
  e.m = 1.0;
  e.p = 4.0;
  Coefficients c = power_family(1.0, 1.0, e);
  c.name = "linear";
  return c;
}

Coefficients from_functions(std::string name, ScalarFn phi, ScalarFn sigma, Exponents exponents, VectorFn nu) {
  Coefficients c;
  c.name = std::move(name);
  c.phi = std::move(phi);
  c.dphi = fd_derivative(c.phi);
  c.ddphi = fd_derivative(c.dphi);
  c.sigma = std::move(sigma);
  c.dsigma = fd_derivative(c.sigma);
  c.has_drift = static_cast<bool>(nu);
  c.nu = nu ? std::move(nu) : zero_vector();
  c.dnu = c.has_drift ? fd_derivative(c.nu) : zero_vector();
  c.ddnu = c.has_drift ? fd_derivative(c.dnu) : zero_vector();
  c.exponents = exponents;
  return c;
}

// ---------------------------------------------------------------------------
// Theta_{phi,q}

namespace {

double theta_integrand(const Coefficients& c, double q, double s) {
  const double dphi = c.dphi(s);
  if (dphi < 0.0) return std::numeric_limits<double>::quiet_NaN();
  return power(s, (q - 2.0) / 2.0) * std::sqrt(dphi);
}

// Integral over [a, b]; tanh-sinh near the origin, Gauss-Kronrod elsewhere.
double theta_segment(const Coefficients& c, double q, double a, double b) {
  if (b <= a) return 0.0;
  auto f = [&](double s) { return theta_integrand(c, q, s); };
  double error = 0.0;
  double l1 = 0.0;
  double value = 0.0;
  if (a == 0.0) {
    boost::math::quadrature::tanh_sinh<double> integrator;
    value = integrator.integrate(f, a, b, 1e-10, &error, &l1);
  } else {
    value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 3, 1e-9, &error, &l1);
  }
  if (!std::isfinite(value) || error > 1e-4 * std::max(l1, 1e-300)) {
    throw QuadratureError("Theta quadrature did not converge on [" + format_real(a) + ", " +
                          format_real(b) + "] (error estimate " + format_real(error) + ")");
  }
  return value;
}

}  // namespace

double theta_phi_q(const Coefficients& c, double q, double z) {
  if (!(q >= 2.0)) throw InvalidArgument("theta_phi_q requires q >= 2");
  if (!(z >= 0.0)) throw InvalidArgument("theta_phi_q requires z >= 0");
  if (z == 0.0) return 0.0;
  return theta_segment(c, q, 0.0, z);
}

// ---------------------------------------------------------------------------
// Sampled assumption checks

const char* to_string(CheckStatus s) noexcept {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::boundary: return "boundary";
    case CheckStatus::fail: return "fail";
  }
  return "?";
}

bool ValidationReport::all_pass() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& r) { return r.status == CheckStatus::pass; });
}

const CheckResult* ValidationReport::find(const std::string& id) const noexcept {
  for (const auto& r : checks) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

namespace {

constexpr double kSlopeTol = 0.02;

// Least-squares slope of log r against log z over indices [lo, hi).
double loglog_slope(std::span<const double> z, std::span<const double> r, std::size_t lo, std::size_t hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    if (!(r[i] > 0.0) || !std::isfinite(r[i])) continue;
    const double x = std::log(z[i]);
    const double y = std::log(r[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return 0.0;
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

struct Boundedness {
  bool bounded = true;
  double constant = 0.0;
  double witness = 0.0;
  double low_slope = 0.0;
  double high_slope = 0.0;
};

enum Ends : unsigned { kLow = 1u, kHigh = 2u, kBoth = 3u };

// Decides whether r(z) stays bounded toward the requested ends of the grid
// from the log-log trend over the outermost tenth of the samples.
Boundedness assess(std::span<const double> z, std::span<const double> r, unsigned ends, std::size_t first = 0) {
  Boundedness b;
  const std::size_t n = z.size();
  const std::size_t tail = std::max<std::size_t>(4, (n - first) / 10);
  for (std::size_t i = first; i < n; ++i) {
    if (std::isnan(r[i]) || r[i] == kInf) {
      b.bounded = false;
      b.constant = kInf;
      b.witness = z[i];
      return b;
    }
    b.constant = std::max(b.constant, r[i]);
  }
  b.low_slope = loglog_slope(z, r, first, first + tail);
  b.high_slope = loglog_slope(z, r, n - tail, n);
  if ((ends & kLow) && b.low_slope < -kSlopeTol) {
    b.bounded = false;
    b.witness = z[first];
  } else if ((ends & kHigh) && b.high_slope > kSlopeTol) {
    b.bounded = false;
    b.witness = z[n - 1];
  }
  return b;
}

CheckResult make_check(std::string id, std::string description, const Boundedness& b) {
  CheckResult r;
  r.id = std::move(id);
  r.description = std::move(description);
  r.status = b.bounded ? CheckStatus::pass : CheckStatus::fail;
  r.constant = b.constant;
  r.witness = b.bounded ? 0.0 : b.witness;
  return r;
}

// Merges a second sub-condition into an existing result.
void merge(CheckResult& into, const Boundedness& b) {
  into.constant = std::max(into.constant, b.constant);
  if (!b.bounded && into.status == CheckStatus::pass) {
    into.status = CheckStatus::fail;
    into.witness = b.witness;
  }
}

struct Samples {
  std::vector<double> z, phi, dphi, ddphi, sigma, dsigma, nu2, nu_abs, ddnu_abs, theta2, theta_p;
};

Samples tabulate(const Coefficients& c, double z_min, double z_max, int count) {
  Samples s;
  const double p = c.exponents.p;
  const double step = std::log(z_max / z_min) / (count - 1);
  for (int i = 0; i < count; ++i) {
    const double z = i == count - 1 ? z_max : z_min * std::exp(step * i);
    s.z.push_back(z);
    s.phi.push_back(c.phi(z));
    s.dphi.push_back(c.dphi(z));
    s.ddphi.push_back(c.ddphi(z));
    s.sigma.push_back(c.sigma(z));
    s.dsigma.push_back(c.dsigma(z));
    const Vec2 nu = c.nu(z);
    s.nu2.push_back(norm2(nu));
    s.nu_abs.push_back(std::sqrt(norm2(nu)));
    s.ddnu_abs.push_back(std::sqrt(norm2(c.ddnu(z))));
  }
  // Theta is only meaningful when phi' >= 0 everywhere on the grid.
  const bool monotone = std::all_of(s.dphi.begin(), s.dphi.end(), [](double v) { return v >= 0.0; });
  if (monotone) {
    double t2 = theta_segment(c, 2.0, 0.0, s.z[0]);
    double tp = theta_segment(c, p, 0.0, s.z[0]);
    s.theta2.push_back(t2);
    s.theta_p.push_back(tp);
    for (int i = 1; i < count; ++i) {
      t2 += theta_segment(c, 2.0, s.z[i - 1], s.z[i]);
      tp += theta_segment(c, p, s.z[i - 1], s.z[i]);
      s.theta2.push_back(t2);
      s.theta_p.push_back(tp);
    }
  } else {
    s.theta2.assign(s.z.size(), std::numeric_limits<double>::quiet_NaN());
    s.theta_p.assign(s.z.size(), std::numeric_limits<double>::quiet_NaN());
  }
  return s;
}

// Hoelder-inverse option: |z - z'|^q <= c |Theta_p(z) - Theta_p(z')|^2, sampled on pairs.
double holder_inverse_constant(const Samples& s, double q, std::size_t lo, std::size_t hi, std::size_t stride) {
  double worst = 0.0;
  for (std::size_t i = lo; i < hi; i += stride) {
    // Pair with z' = 0.
    worst = std::max(worst, power(s.z[i], q) / (s.theta_p[i] * s.theta_p[i]));
    for (std::size_t j = i + stride; j < hi; j += stride) {
      const double dz = s.z[j] - s.z[i];
      const double dt = s.theta_p[j] - s.theta_p[i];
      worst = std::max(worst, power(dz, q) / (dt * dt));
    }
  }
  return worst;
}

}  // namespace

ValidationReport validate_assumptions(const Coefficients& c, double z_max, int samples) {
  if (!(z_max > 0.0)) throw InvalidArgument("validate_assumptions requires z_max > 0");
  if (samples < 100) throw InvalidArgument("validate_assumptions requires at least 100 samples");

  const Exponents& e = c.exponents;
  ValidationReport report;
  report.coefficients = c.name;
  report.z_min = z_max * 1e-8;
  report.z_max = z_max;
  report.samples = samples;

  const Samples s = tabulate(c, report.z_min, z_max, samples);
  const std::size_t n = s.z.size();
  std::vector<double> r(n), r2(n);
  auto fill = [&](std::vector<double>& out, auto&& fn) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
  };

  // Exponent constraints.
  {
    CheckResult ex;
    ex.id = "exponents";
    ex.description = "m >= 1, p >= 2, k <= max(0,(p-4)/4), g <= max(0,p/(2(k+1))-2), theta in (0,1/2)";
    const double k_max = std::max(0.0, (e.p - 4.0) / 4.0);
    const double g_max = std::max(0.0, e.p / (2.0 * (e.k + 1.0)) - 2.0);
    const double tol = 1e-12;
    std::string bad;
    if (e.m < 1.0) bad += " m<1";
    if (e.p < 2.0) bad += " p<2";
    if (e.k < 0.0 || e.k > k_max + tol) bad += " k out of range";
    if (e.g < 0.0 || e.g > g_max + tol) bad += " g out of range";
    if (!(e.theta > 0.0 && e.theta < 0.5)) bad += " theta out of (0,1/2)";
    ex.status = bad.empty() ? CheckStatus::pass : CheckStatus::fail;
    ex.note = bad;
    report.checks.push_back(ex);
  }

  // C1 (i): normalization and strict monotonicity of phi.
  {
    CheckResult ci;
    ci.id = "C1.i";
    ci.description = "phi(0) = sigma(0) = 0 and phi' > 0 on (0, inf)";
    const double phi0 = c.phi(0.0);
    const double sigma0 = c.sigma(0.0);
    if (std::abs(phi0) > 1e-14 || std::abs(sigma0) > 1e-14) {
      ci.status = CheckStatus::fail;
      ci.witness = 0.0;
      ci.note = "nonzero value at the origin";
    }
    for (std::size_t i = 0; i < n && ci.status == CheckStatus::pass; ++i) {
      if (!(s.dphi[i] > 0.0)) {
        ci.status = CheckStatus::fail;
        ci.witness = s.z[i];
        ci.note = "phi' <= 0";
      }
    }
    if (ci.status == CheckStatus::pass) ci.constant = *std::min_element(s.dphi.begin(), s.dphi.end());
    report.checks.push_back(ci);
  }

  fill(r, [&](std::size_t i) { return s.phi[i] / (1.0 + power(s.z[i], e.m)); });
  report.checks.push_back(make_check("C1.ii", "phi(z) <= c (1 + z^m)", assess(s.z, r, kHigh)));

  fill(r, [&](std::size_t i) { return s.sigma[i] * s.sigma[i] / s.z[i]; });
  {
    // Only the behaviour as z -> 0 matters: restrict to the lowest decade.
    const std::size_t decade = std::max<std::size_t>(8, n / 12);
    std::span<const double> zs(s.z.data(), decade), rs(r.data(), decade);
    report.checks.push_back(make_check("C1.iii", "limsup_{z->0} sigma^2(z)/z <= c", assess(zs, rs, kLow)));
  }

  {
    double running = 0.0;
    fill(r, [&](std::size_t i) {
      running = std::max(running, s.sigma[i] * s.sigma[i]);
      return running / (1.0 + s.z[i] + s.sigma[i] * s.sigma[i]);
    });
    report.checks.push_back(make_check("C1.iv", "sup_{z'<=z} sigma^2 <= c (1 + z + sigma^2(z))", assess(s.z, r, kBoth)));
    running = 0.0;
    fill(r, [&](std::size_t i) {
      running = std::max(running, s.nu2[i]);
      return running / (1.0 + s.z[i] + s.nu2[i]);
    });
    report.checks.push_back(make_check("C1.v", "sup_{z'<=z} |nu|^2 <= c (1 + z + |nu(z)|^2)", assess(s.z, r, kBoth)));
  }

  // C1 (vi): either (Theta_p')^{-1} <= c z^gamma, or the Hoelder-inverse bound.
  {
    CheckResult cvi;
    cvi.id = "C1.vi";
    cvi.description = "(Theta_p')^{-1} <= c z^gamma (gamma in [0,1/2]) or |z-z'|^q <= c |Theta_p(z)-Theta_p(z')|^2";
    cvi.status = CheckStatus::fail;
    cvi.constant = kInf;
    for (double gamma : {0.0, 0.125, 0.25, 0.375, 0.5}) {
      fill(r, [&](std::size_t i) {
        const double theta_dot = power(s.z[i], (e.p - 2.0) / 2.0) * std::sqrt(std::max(s.dphi[i], 0.0));
        return 1.0 / (theta_dot * power(s.z[i], gamma));
      });
      const Boundedness b = assess(s.z, r, kBoth);
      if (b.bounded) {
        cvi.status = CheckStatus::pass;
        cvi.constant = b.constant;
        cvi.note = "option A, gamma=" + format_real(gamma);
        break;
      }
      cvi.witness = b.witness;
    }
    const bool theta_ok = std::all_of(s.theta_p.begin(), s.theta_p.end(), [](double v) { return v > 0.0; });
    if (cvi.status == CheckStatus::fail && theta_ok) {
      // q from the local exponent of Theta_p at the origin.
      const double a0 = loglog_slope(s.z, s.theta_p, 0, std::max<std::size_t>(4, n / 10));
      const double q = std::max(1.0, 2.0 * a0);
      const std::size_t stride = std::max<std::size_t>(1, n / 200);
      const std::size_t decade = n / 12;
      const double full = holder_inverse_constant(s, q, 0, n, stride);
      const double inner = holder_inverse_constant(s, q, decade, n - decade, stride);
      if (std::isfinite(full) && full <= 1.05 * inner) {
        cvi.status = CheckStatus::pass;
        cvi.constant = full;
        cvi.witness = 0.0;
        cvi.note = "option B, q=" + format_real(q);
      } else {
        cvi.note = "neither option bounded on the sample grid";
      }
    }
    report.checks.push_back(cvi);
  }

  fill(r, [&](std::size_t i) { return s.sigma[i] * s.sigma[i] / (1.0 + s.z[i] + s.theta2[i] * s.theta2[i]); });
  fill(r2, [&](std::size_t i) {
    return power(s.z[i], e.p - 2.0) * s.sigma[i] * s.sigma[i] / (1.0 + s.z[i] + s.theta_p[i] * s.theta_p[i]);
  });
  {
    CheckResult cvii = make_check("C1.vii", "sigma^2 <= c(1+z+Theta_2^2), z^(p-2) sigma^2 <= c(1+z+Theta_p^2)",
                                  assess(s.z, r, kBoth));
    merge(cvii, assess(s.z, r2, kBoth));
    report.checks.push_back(cvii);
  }

  // Conditions restricted to z > delta use the part of the grid above delta_check.
  constexpr double delta_check = 1e-2;
  const auto first_above =
      static_cast<std::size_t>(std::lower_bound(s.z.begin(), s.z.end(), delta_check) - s.z.begin());

  fill(r, [&](std::size_t i) {
    const double ds = s.dsigma[i];
    const double q = ds * ds * ds * ds / s.dphi[i] + (s.sigma[i] * ds) * (s.sigma[i] * ds) + s.nu_abs[i] + s.dphi[i];
    return q / (1.0 + s.z[i] + s.theta_p[i] * s.theta_p[i]);
  });
  report.checks.push_back(make_check("C1.viii", "sigma'^4/phi' + (sigma sigma')^2 + |nu| + phi' <= c_delta (1+z+Theta_p^2), z > delta",
                                     assess(s.z, r, kHigh, first_above)));

  // C2weak: growth at infinity, away from the origin.
  {
    fill(r, [&](std::size_t i) { return std::abs(s.sigma[i]) / (1.0 + power(s.z[i], e.k + 1.0)); });
    fill(r2, [&](std::size_t i) { return std::abs(s.dsigma[i]) / (1.0 + power(s.z[i], e.k)); });
    CheckResult w1 = make_check("C2w.i", "|sigma| <= c(1+z^(k+1)), |sigma'| <= c(1+z^k), z > delta",
                                assess(s.z, r, kHigh, first_above));
    merge(w1, assess(s.z, r2, kHigh, first_above));
    report.checks.push_back(w1);

    fill(r, [&](std::size_t i) { return (std::abs(s.ddphi[i]) + s.ddnu_abs[i]) / (1.0 + power(s.z[i], e.g)); });
    report.checks.push_back(make_check("C2w.ii", "|phi''| + |nu''| <= c(1+z^g), z > delta", assess(s.z, r, kHigh, first_above)));
  }

  // C2: the same bounds uniformly on (0, inf), with sigma' allowed a z^-theta singularity.
  {
    fill(r, [&](std::size_t i) { return std::abs(s.sigma[i]) / (1.0 + power(s.z[i], e.k + 1.0)); });
    CheckResult c2i = make_check("C2.i", "|sigma| <= c(1+z^(k+1)), |sigma'| <= c(1+z^-theta+z^k), |sigma sigma'| <= c(1+z^(2k+1))",
                                 assess(s.z, r, kBoth));
    fill(r, [&](std::size_t i) { return std::abs(s.sigma[i] * s.dsigma[i]) / (1.0 + power(s.z[i], 2.0 * e.k + 1.0)); });
    merge(c2i, assess(s.z, r, kBoth));

    // Singularity exponent of sigma' at the origin decides the admissible theta.
    std::vector<double> abs_ds(n);
    fill(abs_ds, [&](std::size_t i) { return std::abs(s.dsigma[i]); });
    const double theta_required = std::max(0.0, -loglog_slope(s.z, abs_ds, 0, std::max<std::size_t>(4, n / 10)));
    const double theta_used = std::max(e.theta, std::min(theta_required, 0.5 - 1e-9));
    fill(r, [&](std::size_t i) { return abs_ds[i] / (1.0 + power(s.z[i], -theta_used) + power(s.z[i], e.k)); });
    const Boundedness bd = assess(s.z, r, kHigh);
    merge(c2i, bd);
    if (theta_required >= 0.5 + kSlopeTol) {
      c2i.status = CheckStatus::fail;
      c2i.witness = s.z[0];
      c2i.note = "sigma' ~ z^-" + format_real(theta_required) + " needs theta >= 1/2";
    } else if (theta_required > 0.5 - kSlopeTol) {
      if (c2i.status == CheckStatus::pass) c2i.status = CheckStatus::boundary;
      c2i.witness = s.z[0];
      c2i.note = "sigma' ~ z^-1/2 at the origin: theta would have to equal 1/2 (open endpoint)";
    } else {
      c2i.note = "theta=" + format_real(theta_used);
    }
    report.checks.push_back(c2i);

    fill(r, [&](std::size_t i) { return (std::abs(s.ddphi[i]) + s.ddnu_abs[i]) / (1.0 + power(s.z[i], e.g)); });
    report.checks.push_back(make_check("C2.ii", "|phi''| + |nu''| <= c(1+z^g) on (0, inf)", assess(s.z, r, kBoth)));
  }

  return report;
}

// ---------------------------------------------------------------------------
// Smoothing near zero

SmoothedCoefficients smooth_near_zero(const Coefficients& c, double eta, double z_ref) {
  if (!(eta > 0.0 && eta < 1.0)) throw InvalidArgument("smoothing parameter eta must lie in (0, 1)");
  if (!(z_ref > 0.0)) throw InvalidArgument("smoothing reference scale must be positive");

  SmoothedCoefficients out;
  out.base = c;
  out.eta = eta;
  const double delta = eta * z_ref;
  out.delta_eta = delta;

  // phi: phi'(s) = L + (A - L) (s/delta)^a on [0, delta], with the integral
  // fixed so that phi is continuous at delta.
  const double A = c.dphi(delta);
  const double Phi = c.phi(delta) / delta;
  if (!(A > 0.0)) throw InvalidArgument("smooth_near_zero: phi'(delta_eta) must be positive");

  ScalarFn phi_in, dphi_in, ddphi_in;
  if (Phi >= A) {
    const double slope = 2.0 * (Phi - A);
    phi_in = [A, slope, delta](double z) { return A * z + slope * (z - z * z / (2.0 * delta)); };
    dphi_in = [A, slope, delta](double z) { return A + slope * (1.0 - z / delta); };
    ddphi_in = [slope, delta](double) { return -slope / delta; };
    out.dphi_floor = A;
  } else {
    // phi'^eta >= phi'(delta)/3 whenever the mass phi(delta) allows it.
    const double L = Phi > A / 3.0 ? A / 3.0 : Phi / 2.0;
    const double a = (A - Phi) / (Phi - L);
    const double amp = A - L;
    phi_in = [L, amp, a, delta](double z) { return L * z + amp * delta / (a + 1.0) * power(z / delta, a + 1.0); };
    dphi_in = [L, amp, a, delta](double z) { return L + amp * power(z / delta, a); };
    ddphi_in = [amp, a, delta](double z) { return a == 0.0 ? 0.0 : amp * a / delta * power(z / delta, a - 1.0); };
    out.dphi_floor = L;
  }

  // sigma: alpha z + beta z^2 matching value and slope at delta, or
  // beta z^2 + gamma z^3 when that would make alpha negative.
  const double sd = c.sigma(delta);
  const double dsd = c.dsigma(delta);
  double alpha = 2.0 * sd / delta - dsd;
  double beta = (dsd * delta - sd) / (delta * delta);
  double gamma = 0.0;
  if (alpha < 0.0) {
    alpha = 0.0;
    beta = (3.0 * sd - dsd * delta) / (delta * delta);
    gamma = (dsd * delta - 2.0 * sd) / (delta * delta * delta);
  }
  ScalarFn sigma_in = [alpha, beta, gamma](double z) { return z * (alpha + z * (beta + z * gamma)); };
  ScalarFn dsigma_in = [alpha, beta, gamma](double z) { return alpha + z * (2.0 * beta + 3.0 * gamma * z); };

  auto splice = [delta](ScalarFn inner, ScalarFn outer) -> ScalarFn {
    return [delta, inner = std::move(inner), outer = std::move(outer)](double z) {
      return z >= delta ? outer(z) : inner(std::max(z, 0.0));
    };
  };

  Coefficients s = c;
  s.name = c.name + "+smooth(eta=" + format_real(eta) + ")";
  s.phi = splice(phi_in, c.phi);
  s.dphi = splice(dphi_in, c.dphi);
  s.ddphi = splice(ddphi_in, c.ddphi);
  s.sigma = splice(sigma_in, c.sigma);
  s.dsigma = splice(dsigma_in, c.dsigma);
  if (c.has_drift) {
    const Vec2 nd = c.nu(delta);
    const Vec2 dnd = c.dnu(delta);
    auto nu_outer = c.nu;
    auto dnu_outer = c.dnu;
    auto ddnu_outer = c.ddnu;
    s.nu = [=](double z) { return z >= delta ? nu_outer(z) : Vec2{nd[0] + dnd[0] * (z - delta), nd[1] + dnd[1] * (z - delta)}; };
    s.dnu = [=](double z) { return z >= delta ? dnu_outer(z) : dnd; };
    s.ddnu = [=](double z) { return z >= delta ? ddnu_outer(z) : Vec2{0.0, 0.0}; };
  }
  out.smoothed = std::move(s);
  return out;
}

}  // namespace fluctuon
