#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fluctuon/coefficients.hpp"
#include "fluctuon/grid.hpp"
#include "fluctuon/noise.hpp"

namespace fluctuon {

enum class NonnegPolicy { clip_at_zero, reject_path };

struct SolverConfig {
  int dim = 1;
  int resolution = 128;
  double horizon = 0.25;
  /// Time step; 0 selects cfl_dt. The effective step is horizon / ceil(horizon / dt).
  double dt = 0.0;
  double epsilon = 0.0;
  /// Requested snapshot times in [0, horizon]; empty means {0, horizon}.
  std::vector<double> snapshot_times;
  NonnegPolicy nonneg_policy = NonnegPolicy::clip_at_zero;
  /// Initial constant; with rho0_spread > 0 each path draws
  /// rho0 * (1 + spread * (2U - 1)), U uniform.
  double rho0 = 1.0;
  double rho0_spread = 0.0;
  /// Lower end of the density range scanned by cfl_dt.
  double rho_min_est = 0.0;
};

/// Throws InvalidArgument on inconsistent settings.
void validate(const SolverConfig& cfg);

/// 0.2 dx^2 / sup_z [phi'(z) + (eps/2) |F1| sigma'(z)^2] over z in
/// [rho_min_est, 2 rho_max_est], capped by 0.1 dx / sup |nu'| with drift.
/// Throws InvalidArgument if rho_max_est <= 0 or the diffusivity is unbounded.
double cfl_dt(const SolverConfig& cfg, const Coefficients& c, double f1_sup, double rho_max_est,
              double rho_min_est = 0.0);

/// Effective step used by simulate_path: cfg.dt (or cfl_dt at the largest
/// initial value) rounded down so that it divides the horizon.
double resolve_dt(const SolverConfig& cfg, const Coefficients& c, double f1_sup);

/// Number of steps of size dt covering the horizon.
std::uint64_t step_count(double horizon, double dt);

/// Step indices nearest to the requested times, clamped to [0, steps].
std::vector<std::uint64_t> snapshot_steps(std::span<const double> times, double dt, std::uint64_t steps);

/// Initial constant of path `path` under the config's draw rule.
double initial_constant(const SolverConfig& cfg, std::uint64_t seed, std::uint64_t path);

struct PathState {
  GridField rho;
  double t = 0.0;
  std::uint64_t step = 0;
  double mass0 = 0.0;
  std::uint64_t negativity_events = 0;
  bool rejected = false;
  std::string diagnostic;
};

PathState initial_state(GridField rho0);

/// Explicit Euler-Maruyama step of the Ito form in conservative flux form.
/// Holds scratch storage; one instance per worker.
class DKStepper {
 public:
  DKStepper(const SolverConfig& cfg, const Coefficients& c, const NoiseModel& model, double dt);

  [[nodiscard]] double dt() const noexcept { return dt_; }
  [[nodiscard]] const SolverConfig& config() const noexcept { return cfg_; }

  /// Advances `state` by one step. `increments` are mode-major with dim
  /// components; only the first model.mode_count() modes are read and they
  /// may be empty when epsilon == 0. Throws GridMismatch.
  void advance(PathState& state, std::span<const double> increments);

 private:
  void apply_policy(PathState& state);

  SolverConfig cfg_;
  const Coefficients* coeffs_;
  const NoiseModel* model_;
  double dt_;
  bool noisy_;
  bool use_f2_;
  std::vector<double> f1_face_[2], f2_face_[2];
  std::vector<double> phi_, sigma_, nu_[2], noise_[2], flux_[2];
  std::vector<std::size_t> next_[2];
};

/// One step with dt = inc.dt. Throws GridMismatch or InvalidArgument.
PathState step(PathState state, const SolverConfig& cfg, const Coefficients& c, const NoiseModel& model,
               const ModeIncrements& inc);

struct PathDiagnostics {
  double dt = 0.0;
  std::uint64_t steps = 0;
  double mass0 = 0.0;
  double max_rel_mass_drift = 0.0;
  double min_rho = 0.0;
  std::uint64_t negativity_events = 0;
  bool rejected = false;
  std::string diagnostic;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<GridField> snapshots;
  PathDiagnostics diagnostics;
  std::uint64_t seed = 0;
  std::uint64_t path = 0;
};

/// Deterministic function of (cfg, c, model, seed, path) starting from the
/// path's initial constant. A rejected path stops at the failing step and
/// keeps the snapshots taken so far.
Trajectory simulate_path(const SolverConfig& cfg, const Coefficients& c, const NoiseModel& model,
                         std::uint64_t seed, std::uint64_t path = 0);

/// Same with explicit initial data.
Trajectory simulate_path(const SolverConfig& cfg, const Coefficients& c, const NoiseModel& model,
                         const GridField& rho0, std::uint64_t seed, std::uint64_t path = 0);

}  // namespace fluctuon
