#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fluctuon/analysis.hpp"
#include "fluctuon/coefficients.hpp"
#include "fluctuon/noise.hpp"

namespace fluctuon {

/// Linearized Langevin equation around the constant rho_bar, diagonal in
/// Fourier space. One evolved mode per half-space wavevector q with
/// 0 < |q|_inf <= N_v; the coefficient at -q is the conjugate.
///
/// d v_q = lambda_q v_q dt + sum_{k,a} c_{q,k,a} dB_k^a with
/// lambda_q = -4 pi^2 |q|^2 phi'(rho_bar) - 2 pi i q.nu'(rho_bar) and
/// c_{q,k,a} = -sigma(rho_bar) 2 pi i q_a hat f_k(q).
class OUModeSystem {
 public:
  struct Coupling {
    std::size_t mode = 0;  // noise mode index in the limit basis
    int axis = 0;
    Complex value;
  };

  [[nodiscard]] int dim() const noexcept { return basis_.dim(); }
  [[nodiscard]] int resolution() const noexcept { return resolution_; }
  [[nodiscard]] int cutoff() const noexcept { return basis_.cutoff(); }
  [[nodiscard]] double rho_bar() const noexcept { return rho_bar_; }
  [[nodiscard]] const NoiseBasis& basis() const noexcept { return basis_; }
  /// Noise modes consumed per step (the limit basis size).
  [[nodiscard]] std::size_t noise_mode_count() const noexcept { return basis_.mode_count(); }

  [[nodiscard]] std::size_t mode_count() const noexcept { return wavevectors_.size(); }
  [[nodiscard]] std::array<int, 2> wavevector(std::size_t p) const { return wavevectors_.at(p); }
  [[nodiscard]] Complex lambda(std::size_t p) const { return lambda_.at(p); }
  [[nodiscard]] std::span<const Coupling> couplings(std::size_t p) const { return rows_.at(p); }
  /// sum_{k,a} |c_{q,k,a}|^2 for evolved mode p.
  [[nodiscard]] double noise_power(std::size_t p) const;
  /// Storage indices of q and -q in a SpectralField on the solver grid.
  [[nodiscard]] std::size_t index(std::size_t p) const { return index_.at(p); }
  [[nodiscard]] std::size_t mirror_index(std::size_t p) const { return mirror_.at(p); }

  /// Evolved mode holding wavevector (n0, n1) or its negative; throws InvalidArgument if absent.
  [[nodiscard]] std::size_t find(int n0, int n1 = 0) const;

  friend OUModeSystem build_ou(const Coefficients& c, double rho_bar, const NoiseBasis& basis, int resolution);

 private:
  NoiseBasis basis_;
  int resolution_ = 0;
  double rho_bar_ = 0.0;
  std::vector<std::array<int, 2>> wavevectors_;
  std::vector<Complex> lambda_;
  std::vector<std::vector<Coupling>> rows_;
  std::vector<std::size_t> index_, mirror_;
};

/// Builds the system for the limit noise `basis` (cutoff N_v) on an N^d grid.
/// Throws InvalidArgument unless rho_bar > 0 and N_v <= N/2 - 1.
OUModeSystem build_ou(const Coefficients& c, double rho_bar, const NoiseBasis& basis, int resolution);

/// Limit noise with cutoff N_v whose first modes coincide with `model`
/// (same weights); later modes have unit weight.
OUModeSystem build_ou(const Coefficients& c, double rho_bar, const NoiseModel& model, int n_v);

/// Default limit cutoff, the largest mode below Nyquist.
[[nodiscard]] inline int default_ou_cutoff(int resolution) noexcept { return resolution / 2 - 1; }

/// v = 0 on the system grid.
SpectralField ou_zero(const OUModeSystem& sys);

/// Exponential integrator with end-point noise: v_q <- e^{lambda dt} (v_q + sum c dB).
class OUStepper {
 public:
  OUStepper(const OUModeSystem& sys, double dt);

  [[nodiscard]] double dt() const noexcept { return dt_; }

  /// `increments` are mode-major with dim components and cover every limit mode.
  void advance(SpectralField& v, std::span<const double> increments) const;

 private:
  const OUModeSystem* sys_;
  double dt_;
  std::vector<Complex> decay_;
};

/// One step with dt. Throws InvalidArgument on mismatched increments.
SpectralField ou_step(const OUModeSystem& sys, SpectralField v, const ModeIncrements& inc, double dt);

struct SpectralTrajectory {
  std::vector<double> times;
  std::vector<SpectralField> snapshots;
  double dt = 0.0;
};

/// Integrates from v = 0 over [0, T] with step T / ceil(T / dt), drawing
/// increments from the (seed, path) stream; snapshots at the nearest steps.
SpectralTrajectory ou_solve(const OUModeSystem& sys, double horizon, double dt, std::uint64_t seed,
                            std::uint64_t path, std::span<const double> snapshot_times);

/// E|v_q|^2 after `steps` steps of the discrete scheme from v = 0 (nu = 0):
/// S dt sum_{i=1..steps} e^{2 Re(lambda) i dt}, with S the mode's noise power.
double ou_discrete_variance(const OUModeSystem& sys, std::size_t p, double dt, std::uint64_t steps);

/// Continuous-time stationary variance S / (-2 Re lambda).
double ou_stationary_variance(const OUModeSystem& sys, std::size_t p);

}  // namespace fluctuon
