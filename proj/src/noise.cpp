#include "fluctuon/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace fluctuon {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Half-space representatives of the shell |k|_inf == s, ordered by (k1, k0).
std::vector<std::array<int, 2>> shell_wavevectors(int dim, int s) {
  std::vector<std::array<int, 2>> out;
  if (dim == 1) {
    out.push_back({s, 0});
    return out;
  }
  for (int k1 = 0; k1 <= s; ++k1) {
    for (int k0 = -s; k0 <= s; ++k0) {
      if (std::max(std::abs(k0), std::abs(k1)) != s) continue;
      if (k1 == 0 && k0 <= 0) continue;
      out.push_back({k0, k1});
    }
  }
  return out;
}

}  // namespace

std::size_t cutoff_mode_count(int dim, int cutoff) {
  const auto side = static_cast<std::size_t>(2 * cutoff + 1);
  return dim == 1 ? side : side * side;
}

NoiseBasis::NoiseBasis(int dim, int cutoff, std::vector<double> weights) : dim_(dim), cutoff_(cutoff) {
  if (dim != 1 && dim != 2) {
    throw InvalidArgument("unsupported dimension " + std::to_string(dim) + " (expected 1 or 2)");
  }
  if (cutoff < 0) throw InvalidArgument("noise cutoff must be nonnegative");
  const std::size_t count = cutoff_mode_count(dim, cutoff);
  if (!weights.empty() && weights.size() != count) {
    throw InvalidArgument("expected " + std::to_string(count) + " mode weights, got " +
                          std::to_string(weights.size()));
  }
  auto weight = [&](std::size_t j) { return weights.empty() ? 1.0 : weights[j]; };

  modes_.reserve(count);
  modes_.push_back({{0, 0}, Parity::constant, weight(0)});
  for (int s = 1; s <= cutoff; ++s) {
    for (const auto& k : shell_wavevectors(dim, s)) {
      modes_.push_back({k, Parity::cosine, std::numbers::sqrt2 * weight(modes_.size())});
      modes_.push_back({k, Parity::sine, std::numbers::sqrt2 * weight(modes_.size())});
    }
  }
}

NoiseModel build_basis(int dim, int cutoff, int resolution, std::vector<double> weights) {
  if (dim != 1 && dim != 2) {
    throw InvalidArgument("unsupported dimension " + std::to_string(dim) + " (expected 1 or 2)");
  }
  if (cutoff < 0) throw InvalidArgument("noise cutoff must be nonnegative");
  if (resolution < 4 * cutoff + 4) {
    throw ResolutionTooSmall("resolution N=" + std::to_string(resolution) + " too small for cutoff M=" +
                             std::to_string(cutoff) + "; need N >= " + std::to_string(4 * cutoff + 4));
  }

  NoiseModel model;
  model.basis_ = NoiseBasis(dim, cutoff, std::move(weights));
  model.resolution_ = resolution;
  model.cells_ = fluctuon::cell_count(dim, resolution);

  const std::size_t modes = model.basis_.mode_count();
  const std::size_t cells = model.cells_;
  model.values_.assign(modes * cells, 0.0);
  model.gradients_.assign(modes * static_cast<std::size_t>(dim) * cells, 0.0);

  const auto n = static_cast<std::size_t>(resolution);
  for (std::size_t j = 0; j < modes; ++j) {
    const ModeDescriptor& md = model.basis_.mode(j);
    double* f = model.values_.data() + j * cells;
    double* grad = model.gradients_.data() + j * static_cast<std::size_t>(dim) * cells;
    for (std::size_t c = 0; c < cells; ++c) {
      if (md.parity == Parity::constant) {
        f[c] = md.normalization;
        continue;
      }
      // Integer phase reduction keeps cos^2 + sin^2 == 1 to rounding at every cell.
      const long i0 = static_cast<long>(c % n);
      const long i1 = static_cast<long>(c / n);
      const long phase_num = (md.wavevector[0] * i0 + md.wavevector[1] * i1) % static_cast<long>(n);
      const double phase = kTwoPi * static_cast<double>(phase_num) / static_cast<double>(n);
      const double cs = std::cos(phase);
      const double sn = std::sin(phase);
      const double a = md.normalization;
      const bool is_cos = md.parity == Parity::cosine;
      f[c] = a * (is_cos ? cs : sn);
      for (int axis = 0; axis < dim; ++axis) {
        const double kk = kTwoPi * md.wavevector[static_cast<std::size_t>(axis)];
        grad[static_cast<std::size_t>(axis) * cells + c] = a * kk * (is_cos ? -sn : cs);
      }
    }
  }
  return model;
}

std::span<const double> NoiseModel::values(std::size_t mode) const {
  return {values_.data() + mode * cells_, cells_};
}

std::span<const double> NoiseModel::gradient(std::size_t mode, int axis) const {
  return {gradients_.data() + (mode * static_cast<std::size_t>(dim()) + static_cast<std::size_t>(axis)) * cells_,
          cells_};
}

StructureSums structure_sums(const NoiseModel& model) {
  const int d = model.dim();
  const int n = model.resolution();
  StructureSums s{GridField(d, n), VectorField(static_cast<std::size_t>(d), GridField(d, n)), GridField(d, n)};
  for (std::size_t j = 0; j < model.mode_count(); ++j) {
    const auto f = model.values(j);
    for (std::size_t c = 0; c < model.cell_count(); ++c) s.f1[c] += f[c] * f[c];
    for (int axis = 0; axis < d; ++axis) {
      const auto g = model.gradient(j, axis);
      auto& f2 = s.f2[static_cast<std::size_t>(axis)];
      for (std::size_t c = 0; c < model.cell_count(); ++c) {
        f2[c] += f[c] * g[c];
        s.f3[c] += g[c] * g[c];
      }
    }
  }
  s.f1_sup = s.f1.sup_norm();
  s.f3_sup = s.f3.sup_norm();
  for (std::size_t c = 0; c < model.cell_count(); ++c) {
    double norm2 = 0.0;
    for (const auto& comp : s.f2) norm2 += comp[c] * comp[c];
    s.f2_sup = std::max(s.f2_sup, std::sqrt(norm2));
  }
  return s;
}

double f3_closed_form_1d(int cutoff) {
  const double m = cutoff;
  return 8.0 * std::numbers::pi * std::numbers::pi / 6.0 * m * (m + 1.0) * (2.0 * m + 1.0);
}

void NoiseStream::fill(std::uint64_t step, std::size_t modes, int dim, double dt, ModeIncrements& out) const {
  if (!(dt > 0.0)) throw InvalidArgument("increment time step must be positive");
  const std::size_t count = modes * static_cast<std::size_t>(dim);
  out.dt = dt;
  out.dim = dim;
  out.seed = rng_.seed();
  out.path = rng_.path();
  out.step = step;
  out.values.resize(count);
  const double scale = std::sqrt(dt);
  for (std::size_t slot = 0; slot < count; slot += 2) {
    const auto [a, b] = rng_.normal_pair(StreamTag::noise_increments, step, static_cast<std::uint32_t>(slot / 2));
    out.values[slot] = scale * a;
    if (slot + 1 < count) out.values[slot + 1] = scale * b;
  }
}

ModeIncrements NoiseStream::at(std::uint64_t step, std::size_t modes, int dim, double dt) const {
  ModeIncrements inc;
  fill(step, modes, dim, dt, inc);
  return inc;
}

ModeIncrements sample_increments(const NoiseModel& model, double dt, NoiseStream& stream) {
  auto inc = stream.at(stream.next_step(), model.mode_count(), model.dim(), dt);
  stream.advance();
  return inc;
}

void noise_flux_into(const NoiseModel& model, std::span<const double> amp, std::span<const double> increments,
                     std::span<double> out_axis0, std::span<double> out_axis1) {
  const std::size_t cells = model.cell_count();
  const int d = model.dim();
  std::span<double> out[2] = {out_axis0, out_axis1};
  for (int axis = 0; axis < d; ++axis) {
    auto dst = out[axis];
    std::fill(dst.begin(), dst.begin() + static_cast<std::ptrdiff_t>(cells), 0.0);
    for (std::size_t j = 0; j < model.mode_count(); ++j) {
      const double db = increments[j * static_cast<std::size_t>(d) + static_cast<std::size_t>(axis)];
      const auto f = model.values(j);
      for (std::size_t c = 0; c < cells; ++c) dst[c] += f[c] * db;
    }
    for (std::size_t c = 0; c < cells; ++c) dst[c] *= amp[c];
  }
}

VectorField noise_flux(const NoiseModel& model, const GridField& amp, const ModeIncrements& inc) {
  if (amp.dim() != model.dim() || amp.resolution() != model.resolution()) {
    throw GridMismatch("noise_flux: amplitude field does not live on the noise model grid");
  }
  if (inc.dim != model.dim() || inc.mode_count() < model.mode_count()) {
    throw InvalidArgument("noise_flux: increments do not cover every noise mode");
  }
  const int d = model.dim();
  VectorField out(static_cast<std::size_t>(d), GridField(d, model.resolution()));
  std::span<double> second = d == 2 ? out[1].values() : std::span<double>{};
  noise_flux_into(model, amp.values(), inc.values, out[0].values(), second);
  return out;
}

}  // namespace fluctuon
