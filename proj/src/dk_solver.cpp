#include "fluctuon/dk_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fluctuon/error.hpp"
#include "fluctuon/format.hpp"

namespace fluctuon {

void validate(const SolverConfig& cfg) {
  cell_count(cfg.dim, cfg.resolution);
  if (cfg.resolution < 4) throw InvalidArgument("grid resolution must be at least 4");
  if (!(cfg.horizon >= 0.0)) throw InvalidArgument("time horizon must be nonnegative");
  if (cfg.dt < 0.0) throw InvalidArgument("time step must be nonnegative (0 selects the CFL step)");
  if (!(cfg.epsilon >= 0.0)) throw InvalidArgument("noise strength epsilon must be nonnegative");
  if (!(cfg.rho0 > 0.0)) throw InvalidArgument("initial density rho0 must be positive");
  if (!(cfg.rho0_spread >= 0.0 && cfg.rho0_spread < 1.0)) throw InvalidArgument("rho0_spread must lie in [0, 1)");
  if (cfg.rho_min_est < 0.0) throw InvalidArgument("rho_min_est must be nonnegative");
  for (double t : cfg.snapshot_times) {
    if (!(t >= 0.0 && t <= cfg.horizon)) throw InvalidArgument("snapshot time " + format_real(t) + " outside [0, T]");
  }
  if (!std::is_sorted(cfg.snapshot_times.begin(), cfg.snapshot_times.end())) {
    throw InvalidArgument("snapshot times must be sorted");
  }
}

double cfl_dt(const SolverConfig& cfg, const Coefficients& c, double f1_sup, double rho_max_est, double rho_min_est) {
  if (!(rho_max_est > 0.0)) throw InvalidArgument("cfl_dt requires rho_max_est > 0");
  const double dx = 1.0 / cfg.resolution;
  const double hi = 2.0 * rho_max_est;
  const double lo = std::clamp(rho_min_est, 0.0, hi);
  constexpr int samples = 1024;
  double diffusivity = 0.0;
  double advection = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double z = lo + (hi - lo) * i / samples;
    double d = c.dphi(z);
    if (cfg.epsilon > 0.0) {
      const double ds = c.dsigma(z);
      d += 0.5 * cfg.epsilon * f1_sup * ds * ds;
    }
    diffusivity = std::max(diffusivity, d);
    if (c.has_drift) {
      const Vec2 dn = c.dnu(z);
      advection = std::max(advection, std::hypot(dn[0], dn[1]));
    }
  }
  if (!std::isfinite(diffusivity)) {
    throw InvalidArgument("diffusivity unbounded on [" + format_real(lo) + ", " + format_real(hi) +
                          "]; raise rho_min_est or smooth the coefficients");
  }
  double dt = diffusivity > 0.0 ? 0.2 * dx * dx / diffusivity : std::numeric_limits<double>::infinity();
  if (advection > 0.0) dt = std::min(dt, 0.1 * dx / advection);
  return dt;
}

std::uint64_t step_count(double horizon, double dt) {
  if (horizon == 0.0) return 0;
  return static_cast<std::uint64_t>(std::ceil(horizon / dt - 1e-9));
}

double resolve_dt(const SolverConfig& cfg, const Coefficients& c, double f1_sup) {
  double dt = cfg.dt;
  if (dt == 0.0) {
    dt = cfl_dt(cfg, c, f1_sup, cfg.rho0 * (1.0 + cfg.rho0_spread), cfg.rho_min_est);
    if (!std::isfinite(dt)) dt = cfg.horizon > 0.0 ? cfg.horizon : 1.0;
  }
  if (cfg.horizon == 0.0) return dt;
  return cfg.horizon / static_cast<double>(step_count(cfg.horizon, dt));
}

std::vector<std::uint64_t> snapshot_steps(std::span<const double> times, double dt, std::uint64_t steps) {
  std::vector<std::uint64_t> out;
  out.reserve(times.size());
  for (double t : times) {
    const auto s = static_cast<std::uint64_t>(std::max(0.0, std::llround(t / dt) * 1.0));
    out.push_back(std::min(s, steps));
  }
  return out;
}

double initial_constant(const SolverConfig& cfg, std::uint64_t seed, std::uint64_t path) {
  if (cfg.rho0_spread == 0.0) return cfg.rho0;
  const CounterRng rng(seed, path);
  const double u = rng.uniform(StreamTag::initial_data, 0, 0);
  return cfg.rho0 * (1.0 + cfg.rho0_spread * (2.0 * u - 1.0));
}

PathState initial_state(GridField rho0) {
  PathState s;
  s.mass0 = rho0.integral();
  s.rho = std::move(rho0);
  return s;
}

DKStepper::DKStepper(const SolverConfig& cfg, const Coefficients& c, const NoiseModel& model, double dt)
    : cfg_(cfg), coeffs_(&c), model_(&model), dt_(dt), noisy_(cfg.epsilon > 0.0), use_f2_(false) {
  if (!(dt > 0.0)) throw InvalidArgument("solver time step must be positive");
  if (model.dim() != cfg.dim || model.resolution() != cfg.resolution) {
    throw GridMismatch("noise model grid differs from the solver grid");
  }
  const std::size_t cells = model.cell_count();
  const auto n = static_cast<std::size_t>(cfg.resolution);
  const StructureSums sums = structure_sums(model);
  use_f2_ = sums.f2_sup > 1e-12 * (1.0 + sums.f3_sup);
  phi_.resize(cells);
  sigma_.resize(cells);
  for (int a = 0; a < cfg.dim; ++a) {
    const auto ax = static_cast<std::size_t>(a);
    next_[ax].resize(cells);
    f1_face_[ax].resize(cells);
    f2_face_[ax].resize(cells);
    noise_[ax].resize(cells);
    flux_[ax].resize(cells);
    if (c.has_drift) nu_[ax].resize(cells);
    for (std::size_t i = 0; i < cells; ++i) {
      const std::size_t i0 = i % n;
      const std::size_t i1 = i / n;
      next_[ax][i] = a == 0 ? (i0 + 1) % n + n * i1 : i0 + n * ((i1 + 1) % n);
    }
    for (std::size_t i = 0; i < cells; ++i) {
      const std::size_t j = next_[ax][i];
      f1_face_[ax][i] = 0.5 * (sums.f1[i] + sums.f1[j]);
      f2_face_[ax][i] = 0.5 * (sums.f2[ax][i] + sums.f2[ax][j]);
    }
  }
}

void DKStepper::advance(PathState& state, std::span<const double> increments) {
  const Coefficients& c = *coeffs_;
  const NoiseModel& model = *model_;
  GridField& rho = state.rho;
  if (rho.dim() != cfg_.dim || rho.resolution() != cfg_.resolution) {
    throw GridMismatch("path state grid differs from the solver grid");
  }
  const std::size_t cells = rho.size();
  const int d = cfg_.dim;
  const double dx = rho.spacing();
  const double eps = cfg_.epsilon;
  const double dt = dt_;

  for (std::size_t i = 0; i < cells; ++i) {
    const double rp = std::max(rho[i], 0.0);
    phi_[i] = c.phi(rp);
    if (noisy_) sigma_[i] = c.sigma(rp);
    if (c.has_drift) {
      const Vec2 nu = c.nu(rp);
      for (int a = 0; a < d; ++a) nu_[a][i] = nu[static_cast<std::size_t>(a)];
    }
  }

  if (noisy_) {
    const std::size_t needed = model.mode_count() * static_cast<std::size_t>(d);
    if (increments.size() < needed) throw InvalidArgument("increments do not cover every noise mode");
    std::span<double> second = d == 2 ? std::span<double>(noise_[1]) : std::span<double>{};
    noise_flux_into(model, sigma_, increments, noise_[0], second);
  }

  const double sqrt_eps = std::sqrt(eps);
  const double ito = 0.5 * eps * dt;
  for (int a = 0; a < d; ++a) {
    const auto& next = next_[a];
    auto& flux = flux_[a];
    for (std::size_t i = 0; i < cells; ++i) {
      const std::size_t j = next[i];
      double J = -(phi_[j] - phi_[i]) / dx * dt;
      if (c.has_drift) J += 0.5 * (nu_[a][i] + nu_[a][j]) * dt;
      if (noisy_) {
        J += sqrt_eps * 0.5 * (noise_[a][i] + noise_[a][j]);
        const double grad = (rho[j] - rho[i]) / dx;
        const double rf = std::max(0.5 * (rho[i] + rho[j]), 0.0);
        if (grad != 0.0) {
          const double ds = c.dsigma(rf);
          J -= ito * f1_face_[a][i] * ds * ds * grad;
        }
        if (use_f2_) J -= ito * c.dsigma(rf) * c.sigma(rf) * f2_face_[a][i];
      }
      flux[i] = J;
    }
  }

  // Divergence of face fluxes: cell i loses flux[i] and gains flux[prev(i)].
  double total = 0.0;
  for (int a = 0; a < d; ++a) {
    const auto& next = next_[a];
    const auto& flux = flux_[a];
    for (std::size_t i = 0; i < cells; ++i) {
      rho[i] -= flux[i] / dx;
      rho[next[i]] += flux[i] / dx;
    }
  }
  for (std::size_t i = 0; i < cells; ++i) total += rho[i];

  state.t += dt;
  ++state.step;
  if (!std::isfinite(total)) {
    state.rejected = true;
    state.diagnostic = "non-finite density at step " + std::to_string(state.step) + " (t=" + format_real(state.t) + ")";
    return;
  }
  apply_policy(state);
}

void DKStepper::apply_policy(PathState& state) {
  GridField& rho = state.rho;
  double negative = 0.0;
  double positive = 0.0;
  std::uint64_t count = 0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (rho[i] < 0.0) {
      negative += rho[i];
      ++count;
    } else {
      positive += rho[i];
    }
  }
  if (count == 0) return;
  state.negativity_events += count;
  if (cfg_.nonneg_policy == NonnegPolicy::reject_path) {
    state.rejected = true;
    state.diagnostic = "negative density in " + std::to_string(count) + " cells at step " + std::to_string(state.step);
    return;
  }
  const double total = positive + negative;
  if (!(total > 0.0)) {
    state.rejected = true;
    state.diagnostic = "nonpositive total mass at step " + std::to_string(state.step);
    return;
  }
  // Zero the negative cells and rescale the rest so the cell sum is unchanged.
  const double scale = total / positive;
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = rho[i] < 0.0 ? 0.0 : rho[i] * scale;
}

PathState step(PathState state, const SolverConfig& cfg, const Coefficients& c, const NoiseModel& model,
               const ModeIncrements& inc) {
  if (inc.dim != cfg.dim) throw InvalidArgument("increment dimension differs from the grid dimension");
  DKStepper stepper(cfg, c, model, inc.dt);
  stepper.advance(state, inc.values);
  return state;
}

Trajectory simulate_path(const SolverConfig& cfg, const Coefficients& c, const NoiseModel& model,
                         std::uint64_t seed, std::uint64_t path) {
  return simulate_path(cfg, c, model, GridField(cfg.dim, cfg.resolution, initial_constant(cfg, seed, path)), seed,
                       path);
}

Trajectory simulate_path(const SolverConfig& cfg, const Coefficients& c, const NoiseModel& model,
                         const GridField& rho0, std::uint64_t seed, std::uint64_t path) {
  validate(cfg);
  require_same_grid(rho0, GridField(cfg.dim, cfg.resolution), "initial data");
  const double dt = resolve_dt(cfg, c, structure_sums(model).f1_sup);
  const std::uint64_t steps = step_count(cfg.horizon, dt);

  std::vector<double> requested = cfg.snapshot_times;
  if (requested.empty()) requested = {0.0, cfg.horizon};
  const auto snaps = snapshot_steps(requested, dt, steps);

  Trajectory traj;
  traj.seed = seed;
  traj.path = path;
  PathState state = initial_state(rho0);
  PathDiagnostics& diag = traj.diagnostics;
  diag.dt = dt;
  diag.mass0 = state.mass0;
  diag.min_rho = state.rho.min();

  DKStepper stepper(cfg, c, model, dt);
  const NoiseStream stream(seed, path);
  ModeIncrements inc;
  const bool noisy = cfg.epsilon > 0.0;
  std::size_t next_snap = 0;

  auto record_mass = [&] {
    const double drift = std::abs(state.rho.integral() - state.mass0) / std::abs(state.mass0);
    diag.max_rel_mass_drift = std::max(diag.max_rel_mass_drift, drift);
    diag.min_rho = std::min(diag.min_rho, state.rho.min());
  };

  for (std::uint64_t s = 0;; ++s) {
    while (next_snap < snaps.size() && snaps[next_snap] == s) {
      traj.times.push_back(static_cast<double>(s) * dt);
      traj.snapshots.push_back(state.rho);
      record_mass();
      ++next_snap;
    }
    if (s == steps) break;
    if (noisy) stream.fill(s, model.mode_count(), cfg.dim, dt, inc);
    stepper.advance(state, inc.values);
    diag.min_rho = std::min(diag.min_rho, state.rho.min());
    if (state.rejected) break;
  }
  record_mass();
  diag.steps = state.step;
  diag.negativity_events = state.negativity_events;
  diag.rejected = state.rejected;
  diag.diagnostic = state.diagnostic;
  return traj;
}

}  // namespace fluctuon
