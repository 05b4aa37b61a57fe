#include "fluctuon/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fluctuon {

std::size_t cell_count(int dim, int resolution) {
  if (dim != 1 && dim != 2) {
    throw InvalidArgument("unsupported dimension " + std::to_string(dim) + " (expected 1 or 2)");
  }
  if (resolution <= 0) {
    throw InvalidArgument("grid resolution must be positive");
  }
  const auto n = static_cast<std::size_t>(resolution);
  return dim == 1 ? n : n * n;
}

GridField::GridField(int dim, int resolution, double fill)
    : dim_(dim), resolution_(resolution), values_(cell_count(dim, resolution), fill) {}

double GridField::cell_volume() const noexcept {
  const double dx = spacing();
  return dim_ == 1 ? dx : dx * dx;
}

double GridField::coordinate(std::size_t index, int axis) const noexcept {
  const auto n = static_cast<std::size_t>(resolution_);
  const std::size_t i = axis == 0 ? index % n : index / n;
  return static_cast<double>(i) / resolution_;
}

double GridField::integral() const noexcept {
  double sum = 0.0;
  for (double v : values_) sum += v;
  return sum * cell_volume();
}

double GridField::sup_norm() const noexcept {
  double s = 0.0;
  for (double v : values_) s = std::max(s, std::abs(v));
  return s;
}

double GridField::min() const noexcept { return *std::min_element(values_.begin(), values_.end()); }

double GridField::max() const noexcept { return *std::max_element(values_.begin(), values_.end()); }

void require_same_grid(const GridField& a, const GridField& b, const char* what) {
  if (!a.same_grid(b)) {
    throw GridMismatch(std::string(what) + ": grid mismatch (d=" + std::to_string(a.dim()) +
                       ", N=" + std::to_string(a.resolution()) + " vs d=" + std::to_string(b.dim()) +
                       ", N=" + std::to_string(b.resolution()) + ")");
  }
}

}  // namespace fluctuon
