#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "fluctuon/grid.hpp"

namespace fluctuon {

using Complex = std::complex<double>;

/// Fourier coefficients g_n = mean(g(x) e^{-2 pi i n.x}) of a field on the
/// N^d grid, stored in FFT order: index j along an axis holds wavenumber j
/// for j <= N/2 and j - N above.
class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(int dim, int resolution);

  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] int resolution() const noexcept { return resolution_; }
  [[nodiscard]] std::size_t size() const noexcept { return coeffs_.size(); }

  [[nodiscard]] std::span<Complex> coefficients() noexcept { return coeffs_; }
  [[nodiscard]] std::span<const Complex> coefficients() const noexcept { return coeffs_; }
  Complex& operator[](std::size_t i) noexcept { return coeffs_[i]; }
  const Complex& operator[](std::size_t i) const noexcept { return coeffs_[i]; }

  /// Coefficient of the signed wavenumber (n0, n1); wraps modulo N.
  [[nodiscard]] Complex& at(int n0, int n1 = 0);
  [[nodiscard]] const Complex& at(int n0, int n1 = 0) const;
  [[nodiscard]] std::size_t index_of(int n0, int n1 = 0) const noexcept;

  /// Signed wavenumber of storage index `i` along `axis`.
  [[nodiscard]] int wavenumber(std::size_t i, int axis) const noexcept;
  /// |n|^2 of storage index `i`.
  [[nodiscard]] double wavenumber_sq(std::size_t i) const noexcept;

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s) noexcept;
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }

  friend bool operator==(const SpectralField&, const SpectralField&) = default;

 private:
  int dim_ = 1;
  int resolution_ = 0;
  std::vector<Complex> coeffs_;
};

/// Forward transform; g_0 is the mean of the field. Throws InvalidArgument
/// unless N is a power of two.
SpectralField dft(const GridField& field);

/// Inverse of dft; returns the real part.
GridField idft(const SpectralField& spectrum);

/// sqrt(sum_n (1 + 4 pi^2 |n|^2)^(-beta) |g_n|^2). Throws InvalidArgument for beta < 0.
double h_neg_norm(const SpectralField& s, double beta);

/// (rho - rho_bar) / sqrt(epsilon). Throws InvalidArgument unless epsilon > 0.
GridField fluctuation_field(const GridField& rho, double rho_bar, double epsilon);

enum class Tau { two, infinity };

/// Time exponent and regularity of an L^tau(H^-beta) norm.
struct NormSpec {
  double beta = 1.0;
  Tau tau = Tau::two;
};

/// Throws InvalidArgument unless beta > d/2 (tau = 2) or beta > 1 + d/2 (tau = inf).
void validate_norm_spec(const NormSpec& spec, int dim);

/// tau = 2: sqrt of the trapezoid integral of value^2; tau = inf: max value.
/// Throws InvalidArgument on empty or unsorted input, or a single snapshot with tau = 2.
double spacetime_norm(std::span<const double> times, std::span<const double> values, Tau tau);

/// (int_0^T int |v|^h dx dt)^(1/h), trapezoid in time and cell sums in space.
/// Throws InvalidArgument for h < 1 or mismatched inputs.
double lp_spacetime_norm(std::span<const double> times, std::span<const GridField> fields, double h);

}  // namespace fluctuon
