#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fluctuon/grid.hpp"
#include "fluctuon/rng.hpp"

namespace fluctuon {

enum class Parity { constant, cosine, sine };

/// One real basis function a * sqrt(2) cos(2 pi k.x) or a * sqrt(2) sin(2 pi k.x)
/// (or the constant a for k = 0).
struct ModeDescriptor {
  std::array<int, 2> wavevector{0, 0};
  Parity parity = Parity::constant;
  /// Amplitude of the basis function, sqrt(2) * weight for trig modes.
  double normalization = 1.0;
};

/// Spectral description of the cutoff noise family: the constant mode plus
/// cos/sin pairs for every wavevector 0 < |k|_inf <= cutoff in a half space.
///
/// Modes are ordered by shell |k|_inf, so the family with cutoff M is a prefix
/// of the family with any larger cutoff. Mode j therefore always refers to
/// the same Brownian motion B^j, whatever the cutoff.
class NoiseBasis {
 public:
  NoiseBasis() = default;
  /// `weights` (optional) scales each mode; empty means all ones.
  NoiseBasis(int dim, int cutoff, std::vector<double> weights = {});

  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] int cutoff() const noexcept { return cutoff_; }
  [[nodiscard]] std::size_t mode_count() const noexcept { return modes_.size(); }
  [[nodiscard]] std::span<const ModeDescriptor> modes() const noexcept { return modes_; }
  [[nodiscard]] const ModeDescriptor& mode(std::size_t j) const { return modes_.at(j); }

 private:
  int dim_ = 1;
  int cutoff_ = 0;
  std::vector<ModeDescriptor> modes_;
};

/// Number of modes of the cutoff family: 2M+1 in d=1, (2M+1)^2 in d=2.
std::size_t cutoff_mode_count(int dim, int cutoff);

/// The noise family tabulated on a grid: f_k and grad f_k at every cell.
/// Immutable after construction.
class NoiseModel {
 public:
  [[nodiscard]] const NoiseBasis& basis() const noexcept { return basis_; }
  [[nodiscard]] int dim() const noexcept { return basis_.dim(); }
  [[nodiscard]] int cutoff() const noexcept { return basis_.cutoff(); }
  [[nodiscard]] int resolution() const noexcept { return resolution_; }
  [[nodiscard]] std::size_t mode_count() const noexcept { return basis_.mode_count(); }
  [[nodiscard]] std::size_t cell_count() const noexcept { return cells_; }

  /// f_j at every cell.
  [[nodiscard]] std::span<const double> values(std::size_t mode) const;
  /// d f_j / d x_axis at every cell.
  [[nodiscard]] std::span<const double> gradient(std::size_t mode, int axis) const;

  friend NoiseModel build_basis(int dim, int cutoff, int resolution, std::vector<double> weights);

 private:
  NoiseBasis basis_;
  int resolution_ = 0;
  std::size_t cells_ = 0;
  std::vector<double> values_;     // mode-major
  std::vector<double> gradients_;  // (mode, axis)-major
};

/// Builds the cutoff basis on an N^d grid. Requires N >= 4M + 4.
/// Throws ResolutionTooSmall or InvalidArgument (unsupported dimension).
NoiseModel build_basis(int dim, int cutoff, int resolution, std::vector<double> weights = {});

/// Pointwise structure sums F1 = sum f^2, F2 = 1/2 sum grad(f^2), F3 = sum |grad f|^2.
struct StructureSums {
  GridField f1;
  VectorField f2;
  GridField f3;
  double f1_sup = 0.0;
  double f2_sup = 0.0;
  double f3_sup = 0.0;
};

StructureSums structure_sums(const NoiseModel& model);

/// Closed form of sup|F3| for the unweighted family in d=1: (8 pi^2 / 6) M (M+1) (2M+1).
double f3_closed_form_1d(int cutoff);

/// Brownian increments for every mode over one time step; values are
/// mode-major with `dim` components per mode.
struct ModeIncrements {
  double dt = 0.0;
  int dim = 1;
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::uint64_t path = 0;
  std::uint64_t step = 0;

  [[nodiscard]] std::size_t mode_count() const noexcept {
    return values.size() / static_cast<std::size_t>(dim);
  }
  [[nodiscard]] double operator()(std::size_t mode, int axis) const noexcept {
    return values[mode * static_cast<std::size_t>(dim) + static_cast<std::size_t>(axis)];
  }
};

/// Increment stream for one Monte-Carlo path. Entry (step, mode, axis) is a
/// fixed N(0, dt) draw, so two consumers with different cutoffs see the same
/// values on their common modes.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t path) noexcept : rng_(seed, path) {}

  /// Increments of step `step` for the first `modes` modes.
  [[nodiscard]] ModeIncrements at(std::uint64_t step, std::size_t modes, int dim, double dt) const;
  /// Same as `at` but writes into `out`, reusing its storage.
  void fill(std::uint64_t step, std::size_t modes, int dim, double dt, ModeIncrements& out) const;

  [[nodiscard]] std::uint64_t next_step() const noexcept { return next_step_; }
  void advance() noexcept { ++next_step_; }
  [[nodiscard]] const CounterRng& rng() const noexcept { return rng_; }

 private:
  CounterRng rng_;
  std::uint64_t next_step_ = 0;
};

/// Draws the next step's increments for `model` and advances the stream.
/// Throws InvalidArgument unless dt > 0.
ModeIncrements sample_increments(const NoiseModel& model, double dt, NoiseStream& stream);

/// sum_j amp(x) f_j(x) dB_j, one component per axis: the flux whose
/// divergence is the noise term. Throws GridMismatch.
VectorField noise_flux(const NoiseModel& model, const GridField& amp, const ModeIncrements& inc);

/// Allocation-free form of noise_flux used inside the solver loop.
/// `increments` are mode-major with dim components and cover at least every model mode.
void noise_flux_into(const NoiseModel& model, std::span<const double> amp, std::span<const double> increments,
                     std::span<double> out_axis0, std::span<double> out_axis1);

}  // namespace fluctuon
