#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fluctuon/error.hpp"

namespace fluctuon {

/// Real field sampled on the uniform grid x_i = i / N of the unit torus T^d.
///
/// Values are stored row-major with the first axis fastest: the cell with
/// integer coordinates (i0, i1) lives at i0 + N * i1.
class GridField {
 public:
  GridField() = default;
  GridField(int dim, int resolution, double fill = 0.0);

  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] int resolution() const noexcept { return resolution_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] double spacing() const noexcept { return 1.0 / resolution_; }
  /// Volume of one cell, dx^d.
  [[nodiscard]] double cell_volume() const noexcept;

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  [[nodiscard]] std::span<double> values() noexcept { return values_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

  /// Coordinate of cell `index` along `axis`.
  [[nodiscard]] double coordinate(std::size_t index, int axis) const noexcept;

  /// Integral over the torus, sum of values times dx^d.
  [[nodiscard]] double integral() const noexcept;
  [[nodiscard]] double sup_norm() const noexcept;
  [[nodiscard]] double min() const noexcept;
  [[nodiscard]] double max() const noexcept;

  [[nodiscard]] bool same_grid(const GridField& other) const noexcept {
    return dim_ == other.dim_ && resolution_ == other.resolution_;
  }

  friend bool operator==(const GridField&, const GridField&) = default;

 private:
  int dim_ = 1;
  int resolution_ = 0;
  std::vector<double> values_;
};

/// One GridField per spatial direction.
using VectorField = std::vector<GridField>;

/// Number of cells N^d; throws on unsupported dimensions.
std::size_t cell_count(int dim, int resolution);

/// Throws GridMismatch unless `a` and `b` share dimension and resolution.
void require_same_grid(const GridField& a, const GridField& b, const char* what);

[[nodiscard]] inline bool is_power_of_two(int n) noexcept {
  return n > 0 && (n & (n - 1)) == 0;
}

}  // namespace fluctuon
