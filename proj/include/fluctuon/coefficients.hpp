#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace fluctuon {

using ScalarFn = std::function<double(double)>;
using Vec2 = std::array<double, 2>;
using VectorFn = std::function<Vec2(double)>;

/// Growth exponents (m, p, k, g, theta) tying the coefficients to the
/// well-posedness and CLT assumptions.
struct Exponents {
  double m = 1.0;
  double p = 2.0;
  double k = 0.0;
  double g = 0.0;
  double theta = 0.25;
};

/// The nonlinearity triple (phi, nu, sigma) with derivatives. Components of
/// nu beyond the spatial dimension are ignored.
struct Coefficients {
  std::string name;
  ScalarFn phi, dphi, ddphi;
  ScalarFn sigma, dsigma;
  VectorFn nu, dnu, ddnu;
  /// False when nu is identically zero; lets the solver skip the drift term.
  bool has_drift = false;
  Exponents exponents;
};

/// phi(z) = z^m, sigma(z) = z^(m/2), nu = 0, with p = max(4, m^2),
/// k = max(0, (m-2)/2), g = max(0, m-2). Throws InvalidArgument for m < 1.
Coefficients model_case(double m);

/// phi(z) = z, sigma(z) = z, nu = 0 (p = 4, k = g = 0).
Coefficients linear_case();

/// phi(z) = z^a, sigma(z) = z^b, nu = 0 with explicit exponents.
Coefficients power_family(double phi_exponent, double sigma_exponent, Exponents exponents);

/// Arbitrary user coefficients. Missing derivatives fall back to central
/// finite differences (one-sided near z = 0).
Coefficients from_functions(std::string name, ScalarFn phi, ScalarFn sigma, Exponents exponents,
                            VectorFn nu = {});

/// Theta_{phi,q}(z) = int_0^z s^((q-2)/2) sqrt(phi'(s)) ds.
/// Throws InvalidArgument (q < 2, z < 0) or QuadratureError.
double theta_phi_q(const Coefficients& c, double q, double z);

enum class CheckStatus { pass, boundary, fail };

const char* to_string(CheckStatus s) noexcept;

/// One sampled assumption check. `constant` is the smallest admissible
/// constant on the sample grid; `witness` is a violating z when failed.
struct CheckResult {
  std::string id;
  std::string description;
  CheckStatus status = CheckStatus::pass;
  double constant = 0.0;
  double witness = 0.0;
  std::string note;
};

struct ValidationReport {
  std::string coefficients;
  double z_min = 0.0;
  double z_max = 0.0;
  int samples = 0;
  std::vector<CheckResult> checks;

  [[nodiscard]] bool all_pass() const noexcept;
  [[nodiscard]] const CheckResult* find(const std::string& id) const noexcept;
};

/// Samples every well-posedness and CLT coefficient condition on a log-spaced
/// z grid in [z_max * 1e-8, z_max]. Violations are report entries, never
/// exceptions. Throws InvalidArgument for z_max <= 0 or samples < 100.
ValidationReport validate_assumptions(const Coefficients& c, double z_max = 1e4, int samples = 400);

/// Coefficients replaced on [0, delta_eta] by C^1-matched extensions with
/// bounded sigma' and phi' bounded below; identical to `base` beyond delta_eta.
struct SmoothedCoefficients {
  Coefficients base;
  Coefficients smoothed;
  double eta = 0.0;
  double delta_eta = 0.0;
  /// Positive lower bound of phi' on [0, delta_eta].
  double dphi_floor = 0.0;
};

/// delta_eta = eta * z_ref. Throws InvalidArgument unless eta in (0, 1).
SmoothedCoefficients smooth_near_zero(const Coefficients& c, double eta, double z_ref = 1.0);

}  // namespace fluctuon
