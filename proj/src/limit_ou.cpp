#include "fluctuon/limit_ou.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fluctuon/dk_solver.hpp"

namespace fluctuon {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double OUModeSystem::noise_power(std::size_t p) const {
  double s = 0.0;
  for (const auto& c : rows_.at(p)) s += std::norm(c.value);
  return s;
}

std::size_t OUModeSystem::find(int n0, int n1) const {
  for (std::size_t p = 0; p < wavevectors_.size(); ++p) {
    const auto& q = wavevectors_[p];
    if ((q[0] == n0 && q[1] == n1) || (q[0] == -n0 && q[1] == -n1)) return p;
  }
  throw InvalidArgument("wavevector (" + std::to_string(n0) + ", " + std::to_string(n1) + ") is not evolved");
}

OUModeSystem build_ou(const Coefficients& c, double rho_bar, const NoiseBasis& basis, int resolution) {
  if (!(rho_bar > 0.0)) throw InvalidArgument("build_ou requires rho_bar > 0");
  if (basis.cutoff() > default_ou_cutoff(resolution)) {
    throw InvalidArgument("limit cutoff " + std::to_string(basis.cutoff()) + " exceeds N/2 - 1 = " +
                          std::to_string(default_ou_cutoff(resolution)));
  }
  OUModeSystem sys;
  sys.basis_ = basis;
  sys.resolution_ = resolution;
  sys.rho_bar_ = rho_bar;

  const int d = basis.dim();
  const double dphi = c.dphi(rho_bar);
  const double sigma = c.sigma(rho_bar);
  const Vec2 dnu = c.has_drift ? c.dnu(rho_bar) : Vec2{0.0, 0.0};
  const SpectralField layout(d, resolution);
  const Complex i_unit(0.0, 1.0);

  // Modes come in (cos, sin) pairs sharing one half-space wavevector.
  for (std::size_t j = 1; j + 1 < basis.mode_count(); j += 2) {
    const ModeDescriptor& mc = basis.mode(j);
    const ModeDescriptor& ms = basis.mode(j + 1);
    const auto q = mc.wavevector;
    double q_sq = 0.0;
    double q_dot_nu = 0.0;
    for (int a = 0; a < d; ++a) {
      q_sq += static_cast<double>(q[a]) * q[a];
      q_dot_nu += q[a] * dnu[static_cast<std::size_t>(a)];
    }
    sys.wavevectors_.push_back(q);
    sys.lambda_.emplace_back(-2.0 * kTwoPi * std::numbers::pi * q_sq * dphi, -kTwoPi * q_dot_nu);
    std::vector<OUModeSystem::Coupling> row;
    const Complex f_cos = 0.5 * mc.normalization;
    const Complex f_sin = -0.5 * i_unit * ms.normalization;
    for (int a = 0; a < d; ++a) {
      if (q[a] == 0) continue;
      const Complex grad = i_unit * kTwoPi * static_cast<double>(q[a]);
      row.push_back({j, a, -sigma * grad * f_cos});
      row.push_back({j + 1, a, -sigma * grad * f_sin});
    }
    sys.rows_.push_back(std::move(row));
    sys.index_.push_back(layout.index_of(q[0], q[1]));
    sys.mirror_.push_back(layout.index_of(-q[0], -q[1]));
  }
  return sys;
}

OUModeSystem build_ou(const Coefficients& c, double rho_bar, const NoiseModel& model, int n_v) {
  if (n_v < model.cutoff()) throw InvalidArgument("limit cutoff must not be below the model cutoff");
  const NoiseBasis& small = model.basis();
  std::vector<double> weights(cutoff_mode_count(model.dim(), n_v), 1.0);
  for (std::size_t j = 0; j < small.mode_count(); ++j) {
    const ModeDescriptor& m = small.mode(j);
    weights[j] = m.parity == Parity::constant ? m.normalization : m.normalization / std::numbers::sqrt2;
  }
  return build_ou(c, rho_bar, NoiseBasis(model.dim(), n_v, std::move(weights)), model.resolution());
}

SpectralField ou_zero(const OUModeSystem& sys) { return SpectralField(sys.dim(), sys.resolution()); }

OUStepper::OUStepper(const OUModeSystem& sys, double dt) : sys_(&sys), dt_(dt) {
  if (!(dt > 0.0)) throw InvalidArgument("OU time step must be positive");
  decay_.reserve(sys.mode_count());
  for (std::size_t p = 0; p < sys.mode_count(); ++p) decay_.push_back(std::exp(sys.lambda(p) * dt));
}

void OUStepper::advance(SpectralField& v, std::span<const double> increments) const {
  const OUModeSystem& sys = *sys_;
  const auto d = static_cast<std::size_t>(sys.dim());
  if (v.dim() != sys.dim() || v.resolution() != sys.resolution()) {
    throw GridMismatch("spectral field grid differs from the OU system grid");
  }
  if (increments.size() < sys.noise_mode_count() * d) throw InvalidArgument("increments do not cover the limit noise");
  for (std::size_t p = 0; p < sys.mode_count(); ++p) {
    Complex forcing = 0.0;
    for (const auto& c : sys.couplings(p)) forcing += c.value * increments[c.mode * d + static_cast<std::size_t>(c.axis)];
    const Complex next = decay_[p] * (v[sys.index(p)] + forcing);
    v[sys.index(p)] = next;
    v[sys.mirror_index(p)] = std::conj(next);
  }
}

SpectralField ou_step(const OUModeSystem& sys, SpectralField v, const ModeIncrements& inc, double dt) {
  if (inc.dim != sys.dim()) throw InvalidArgument("increment dimension differs from the OU system");
  OUStepper(sys, dt).advance(v, inc.values);
  return v;
}

SpectralTrajectory ou_solve(const OUModeSystem& sys, double horizon, double dt, std::uint64_t seed,
                            std::uint64_t path, std::span<const double> snapshot_times) {
  if (!(horizon >= 0.0)) throw InvalidArgument("horizon must be nonnegative");
  if (!(dt > 0.0)) throw InvalidArgument("OU time step must be positive");
  SpectralTrajectory out;
  const std::uint64_t steps = step_count(horizon, dt);
  out.dt = steps == 0 ? dt : horizon / static_cast<double>(steps);
  std::vector<double> requested(snapshot_times.begin(), snapshot_times.end());
  if (requested.empty()) requested = {0.0, horizon};
  const auto snaps = snapshot_steps(requested, out.dt, steps);

  SpectralField v = ou_zero(sys);
  const OUStepper stepper(sys, out.dt);
  const NoiseStream stream(seed, path);
  ModeIncrements inc;
  std::size_t next = 0;
  for (std::uint64_t s = 0;; ++s) {
    while (next < snaps.size() && snaps[next] == s) {
      out.times.push_back(static_cast<double>(s) * out.dt);
      out.snapshots.push_back(v);
      ++next;
    }
    if (s == steps) break;
    stream.fill(s, sys.noise_mode_count(), sys.dim(), out.dt, inc);
    stepper.advance(v, inc.values);
  }
  return out;
}

double ou_discrete_variance(const OUModeSystem& sys, std::size_t p, double dt, std::uint64_t steps) {
  const double r = std::exp(2.0 * sys.lambda(p).real() * dt);
  // Geometric sum r + r^2 + ... + r^steps.
  const double sum = r == 1.0 ? static_cast<double>(steps) : r * (1.0 - std::pow(r, static_cast<double>(steps))) / (1.0 - r);
  return sys.noise_power(p) * dt * sum;
}

double ou_stationary_variance(const OUModeSystem& sys, std::size_t p) {
  return sys.noise_power(p) / (-2.0 * sys.lambda(p).real());
}

}  // namespace fluctuon
