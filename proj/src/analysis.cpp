#include "fluctuon/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include <fftw3.h>

#include "fluctuon/format.hpp"

namespace fluctuon {

SpectralField::SpectralField(int dim, int resolution)
    : dim_(dim), resolution_(resolution), coeffs_(cell_count(dim, resolution)) {}

std::size_t SpectralField::index_of(int n0, int n1) const noexcept {
  const int N = resolution_;
  const auto wrap = [N](int n) { return static_cast<std::size_t>(((n % N) + N) % N); };
  return dim_ == 1 ? wrap(n0) : wrap(n0) + static_cast<std::size_t>(N) * wrap(n1);
}

Complex& SpectralField::at(int n0, int n1) { return coeffs_.at(index_of(n0, n1)); }
const Complex& SpectralField::at(int n0, int n1) const { return coeffs_.at(index_of(n0, n1)); }

int SpectralField::wavenumber(std::size_t i, int axis) const noexcept {
  const auto N = static_cast<std::size_t>(resolution_);
  const std::size_t j = axis == 0 ? i % N : i / N;
  const int n = static_cast<int>(j);
  return 2 * n <= resolution_ ? n : n - resolution_;
}

double SpectralField::wavenumber_sq(std::size_t i) const noexcept {
  const double n0 = wavenumber(i, 0);
  if (dim_ == 1) return n0 * n0;
  const double n1 = wavenumber(i, 1);
  return n0 * n0 + n1 * n1;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  if (dim_ != o.dim_ || resolution_ != o.resolution_) throw GridMismatch("spectral fields on different grids");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  if (dim_ != o.dim_ || resolution_ != o.resolution_) throw GridMismatch("spectral fields on different grids");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) noexcept {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

namespace {

// FFTW planning is not thread-safe; execution on fresh arrays is.
fftw_plan cached_plan(int dim, int n, int sign) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, fftw_plan> plans;
  std::lock_guard lock(mutex);
  auto& plan = plans[{dim, n, sign}];
  if (plan == nullptr) {
    std::vector<fftw_complex> in(cell_count(dim, n)), out(cell_count(dim, n));
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plan = dim == 1 ? fftw_plan_dft_1d(n, in.data(), out.data(), sign, flags)
                    : fftw_plan_dft_2d(n, n, in.data(), out.data(), sign, flags);
  }
  return plan;
}

void transform(int dim, int n, int sign, std::vector<Complex>& in, std::vector<Complex>& out) {
  fftw_execute_dft(cached_plan(dim, n, sign), reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace

SpectralField dft(const GridField& field) {
  if (!is_power_of_two(field.resolution())) throw InvalidArgument("dft requires a power-of-two resolution");
  SpectralField s(field.dim(), field.resolution());
  std::vector<Complex> in(field.values().begin(), field.values().end());
  std::vector<Complex> out(in.size());
  // Row-major with axis 0 fastest equals FFTW's layout with axes swapped;
  // the 2-d transform is symmetric in its axes, so no transpose is needed.
  transform(field.dim(), field.resolution(), FFTW_FORWARD, in, out);
  const double scale = 1.0 / static_cast<double>(in.size());
  for (std::size_t i = 0; i < out.size(); ++i) s[i] = out[i] * scale;
  return s;
}

GridField idft(const SpectralField& spectrum) {
  if (!is_power_of_two(spectrum.resolution())) throw InvalidArgument("idft requires a power-of-two resolution");
  GridField g(spectrum.dim(), spectrum.resolution());
  std::vector<Complex> in(spectrum.coefficients().begin(), spectrum.coefficients().end());
  std::vector<Complex> out(in.size());
  transform(spectrum.dim(), spectrum.resolution(), FFTW_BACKWARD, in, out);
  for (std::size_t i = 0; i < out.size(); ++i) g[i] = out[i].real();
  return g;
}

double h_neg_norm(const SpectralField& s, double beta) {
  if (!(beta >= 0.0)) throw InvalidArgument("h_neg_norm requires beta >= 0");
  const double four_pi_sq = 4.0 * std::numbers::pi * std::numbers::pi;
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double w = beta == 0.0 ? 1.0 : std::pow(1.0 + four_pi_sq * s.wavenumber_sq(i), -beta);
    sum += w * std::norm(s[i]);
  }
  return std::sqrt(sum);
}

GridField fluctuation_field(const GridField& rho, double rho_bar, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("fluctuation_field requires epsilon > 0");
  GridField v(rho.dim(), rho.resolution());
  const double scale = 1.0 / std::sqrt(epsilon);
  for (std::size_t i = 0; i < rho.size(); ++i) v[i] = (rho[i] - rho_bar) * scale;
  return v;
}

void validate_norm_spec(const NormSpec& spec, int dim) {
  const double half_d = 0.5 * dim;
  if (spec.tau == Tau::two && !(spec.beta > half_d)) {
    throw InvalidArgument("beta must exceed d/2 for tau = 2 (got " + format_real(spec.beta) + ")");
  }
  if (spec.tau == Tau::infinity && !(spec.beta > 1.0 + half_d)) {
    throw InvalidArgument("beta must exceed 1 + d/2 for tau = inf (got " + format_real(spec.beta) + ")");
  }
}

namespace {

void check_times(std::span<const double> times, std::size_t count) {
  if (times.empty()) throw InvalidArgument("space-time norm of an empty trajectory");
  if (times.size() != count) throw InvalidArgument("times and values differ in length");
  if (!std::is_sorted(times.begin(), times.end())) throw InvalidArgument("snapshot times must be sorted");
}

double trapezoid(std::span<const double> t, std::span<const double> y) {
  double sum = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) sum += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
  return sum;
}

}  // namespace

double spacetime_norm(std::span<const double> times, std::span<const double> values, Tau tau) {
  check_times(times, values.size());
  if (tau == Tau::infinity) return *std::max_element(values.begin(), values.end());
  if (times.size() < 2) throw InvalidArgument("tau = 2 needs at least two snapshots");
  std::vector<double> sq(values.size());
  std::transform(values.begin(), values.end(), sq.begin(), [](double v) { return v * v; });
  return std::sqrt(trapezoid(times, sq));
}

double lp_spacetime_norm(std::span<const double> times, std::span<const GridField> fields, double h) {
  if (!(h >= 1.0)) throw InvalidArgument("lp_spacetime_norm requires h >= 1");
  check_times(times, fields.size());
  std::vector<double> per_time(fields.size());
  for (std::size_t i = 0; i < fields.size(); ++i) {
    double s = 0.0;
    for (double v : fields[i].values()) s += h == 2.0 ? v * v : std::pow(std::abs(v), h);
    per_time[i] = s * fields[i].cell_volume();
  }
  if (fields.size() == 1) return 0.0;
  return std::pow(trapezoid(times, per_time), 1.0 / h);
}

}  // namespace fluctuon
