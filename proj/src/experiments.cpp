#include "fluctuon/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "fluctuon/limit_ou.hpp"
#include "fluctuon/noise.hpp"

namespace fluctuon {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kZ95 = 1.959963984540054;
}  // namespace

// ---------------------------------------------------------------------------
// Scaling regime

ScheduleRow cutoff_sums(int dim, int cutoff) {
  const NoiseBasis basis(dim, cutoff);
  ScheduleRow row;
  row.cutoff = cutoff;
  row.f1 = static_cast<double>(basis.mode_count());
  double q_sq_sum = 0.0;
  for (const auto& m : basis.modes()) {
    if (m.parity != Parity::cosine) continue;
    q_sq_sum += static_cast<double>(m.wavevector[0]) * m.wavevector[0] +
                static_cast<double>(m.wavevector[1]) * m.wavevector[1];
  }
  row.f3 = 8.0 * std::numbers::pi * std::numbers::pi * q_sq_sum;
  row.f2 = 0.0;
  return row;
}

namespace {

// Closed-form |F1| + |F3| of the cutoff family, extended to real M.
double regime_sums(int dim, double m) {
  const double side = 2.0 * m + 1.0;
  const double f1 = std::pow(side, dim);
  const double f3 = 4.0 * std::numbers::pi * std::numbers::pi * dim * std::pow(side, dim - 1) * m * (m + 1.0) * side / 3.0;
  return f1 + f3;
}

}  // namespace

ScalingSchedule make_schedule(std::vector<double> epsilons, double gamma, int dim) {
  if (dim != 1 && dim != 2) throw InvalidArgument("unsupported dimension " + std::to_string(dim));
  if (!(gamma > 0.0)) throw InvalidArgument("schedule exponent gamma must be positive");
  if (epsilons.empty()) throw InvalidArgument("schedule needs at least one epsilon");
  for (double e : epsilons) {
    if (!(e > 0.0 && e <= 1.0)) throw InvalidArgument("schedule epsilon " + std::to_string(e) + " outside (0, 1]");
  }
  std::sort(epsilons.begin(), epsilons.end(), std::greater<>());
  if (std::adjacent_find(epsilons.begin(), epsilons.end()) != epsilons.end()) {
    throw InvalidArgument("schedule epsilons must be distinct");
  }
  // |F3| grows like M^(d+2), so sqrt(eps) |F3| -> 0 needs gamma (d+2) < 1/2.
  const double gamma_max = 1.0 / (2.0 * (dim + 2));
  if (gamma >= gamma_max) {
    throw RegimeViolation("gamma=" + std::to_string(gamma) + " violates the scaling regime in d=" +
                          std::to_string(dim) + " (need gamma < " + std::to_string(gamma_max) + ")");
  }
  ScalingSchedule s;
  s.dim = dim;
  s.gamma = gamma;
  for (double e : epsilons) {
    const int m = static_cast<int>(std::floor(std::pow(e, -gamma) + 1e-9));
    ScheduleRow row = cutoff_sums(dim, m);
    row.epsilon = e;
    row.regime = std::sqrt(e) * (row.f1 + row.f2 + row.f3);
    row.envelope = std::sqrt(e) * regime_sums(dim, std::pow(e, -gamma));
    if (!s.rows.empty() && !(row.envelope < s.rows.back().envelope)) {
      throw RegimeViolation("sqrt(eps)(|F1|+|F2|+|F3|) does not decrease from eps=" +
                            std::to_string(s.rows.back().epsilon) + " to eps=" + std::to_string(e));
    }
    s.rows.push_back(row);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Statistics and parallel plumbing

double pairwise_sum(std::span<const double> v) {
  if (v.empty()) return 0.0;
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

MeanEstimate estimate_mean(std::span<const double> values) {
  MeanEstimate e;
  const auto n = static_cast<double>(values.size());
  if (values.empty()) {
    e.mean = e.ci.lo = e.ci.hi = kNaN;
    return e;
  }
  e.mean = pairwise_sum(values) / n;
  if (values.size() > 1) {
    std::vector<double> dev(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) dev[i] = (values[i] - e.mean) * (values[i] - e.mean);
    e.std_error = std::sqrt(pairwise_sum(dev) / (n - 1.0) / n);
  }
  e.ci = {e.mean - kZ95 * e.std_error, e.mean + kZ95 * e.std_error};
  return e;
}

Interval wilson_interval(std::size_t k, std::size_t n) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = kZ95 * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {k == 0 ? 0.0 : std::max(0.0, centre - half), k == n ? 1.0 : std::min(1.0, centre + half)};
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max(1u, workers);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto body = [&] {
    for (std::size_t i = next++; i < n && !failed; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        failed = true;
      }
    }
  };
  if (workers == 1 || n <= 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < std::min<std::size_t>(workers, n); ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// ---------------------------------------------------------------------------
// Rate bound

double initial_moment(const Exponents& e, double a, double b) {
  const double q1 = e.m + e.p - 1.0;
  const double q2 = e.p;
  if (b == a) return std::pow(a, q1) + std::pow(a, q2);
  auto mean_power = [a, b](double q) { return (std::pow(b, q + 1.0) - std::pow(a, q + 1.0)) / ((q + 1.0) * (b - a)); };
  return mean_power(q1) + mean_power(q2);
}

double lattice_tail_sum(int dim, int cutoff, int limit_cutoff, double exponent) {
  double sum = 0.0;
  if (dim == 1) {
    for (int n = cutoff + 1; n <= limit_cutoff; ++n) sum += 2.0 * std::pow(n, exponent);
    return sum;
  }
  for (int n1 = -limit_cutoff; n1 <= limit_cutoff; ++n1) {
    for (int n0 = -limit_cutoff; n0 <= limit_cutoff; ++n0) {
      if (std::max(std::abs(n0), std::abs(n1)) <= cutoff) continue;
      sum += std::pow(std::hypot(n0, n1), exponent);
    }
  }
  return sum;
}

RateBound rate_bound(const ScheduleRow& row, const Coefficients& c, double rho0_moment, const NormSpec& norm,
                     double horizon, int dim, int limit_cutoff) {
  const Exponents& e = c.exponents;
  const double eps = row.epsilon;
  RateBound b;
  const double lead = eps * (row.f1 + row.f3) * (row.f1 + row.f3) + std::sqrt(eps) * std::sqrt(row.f3);
  const double growth = std::pow(1.0 + eps * row.f3, e.g + 0.5 * dim * (e.p + e.m));
  b.main = lead * growth * (1.0 + rho0_moment);
  const double exponent = (norm.tau == Tau::two ? 0.0 : 2.0) - 2.0 * norm.beta;
  b.tail = horizon * lattice_tail_sum(dim, row.cutoff, std::max(limit_cutoff, row.cutoff), exponent);
  return b;
}

// ---------------------------------------------------------------------------
// Shared setup

namespace {

struct Setup {
  SolverConfig solver;
  std::vector<NoiseModel> models;
  double dt = 0.0;
  std::uint64_t steps = 0;
  std::vector<std::uint64_t> snap_steps;
  std::vector<double> snap_times;
  double rho_lo = 0.0;
  double rho_hi = 0.0;
};

Setup prepare(const ExperimentConfig& cfg, const Coefficients& c, const ScalingSchedule& schedule) {
  if (cfg.paths == 0) throw InvalidArgument("experiment needs at least one path");
  if (schedule.dim != cfg.solver.dim) throw InvalidArgument("schedule dimension differs from the grid dimension");
  Setup s;
  s.solver = cfg.solver;
  if (s.solver.snapshot_times.empty()) {
    for (int i = 0; i <= 50; ++i) s.solver.snapshot_times.push_back(s.solver.horizon * i / 50.0);
  }
  validate(s.solver);
  if (!is_power_of_two(s.solver.resolution)) throw InvalidArgument("experiments require a power-of-two resolution");
  s.rho_lo = s.solver.rho0 * (1.0 - s.solver.rho0_spread);
  s.rho_hi = s.solver.rho0 * (1.0 + s.solver.rho0_spread);

  double dt = s.solver.dt;
  for (const auto& row : schedule.rows) {
    s.models.push_back(build_basis(s.solver.dim, row.cutoff, s.solver.resolution));
    if (s.solver.dt == 0.0) {
      SolverConfig probe = s.solver;
      probe.epsilon = row.epsilon;
      const double cfl = cfl_dt(probe, c, row.f1, s.rho_hi, s.solver.rho_min_est);
      dt = dt == 0.0 ? cfl : std::min(dt, cfl);
    }
  }
  if (!std::isfinite(dt) || dt <= 0.0) dt = s.solver.horizon;
  s.steps = step_count(s.solver.horizon, dt);
  s.dt = s.steps == 0 ? dt : s.solver.horizon / static_cast<double>(s.steps);
  s.snap_steps = snapshot_steps(s.solver.snapshot_times, s.dt, s.steps);
  for (auto st : s.snap_steps) s.snap_times.push_back(static_cast<double>(st) * s.dt);
  return s;
}

SolverConfig row_config(const Setup& s, double epsilon) {
  SolverConfig c = s.solver;
  c.epsilon = epsilon;
  return c;
}

// Applies the abort rule and returns the accepted values in path order.
std::vector<double> accepted(RowStatus& st, std::span<const double> values, std::span<const char> rejected,
                             double max_fraction) {
  std::vector<double> out;
  st.paths = values.size();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (rejected[i]) {
      ++st.rejected;
    } else {
      out.push_back(values[i]);
    }
  }
  if (static_cast<double>(st.rejected) > max_fraction * static_cast<double>(st.paths)) {
    st.aborted = true;
    st.diagnostic = std::to_string(st.rejected) + " of " + std::to_string(st.paths) +
                    " paths rejected (limit " + std::to_string(max_fraction * 100.0) + "%)";
  }
  return out;
}

struct PathRows {
  std::vector<double> value;
  std::vector<char> rejected;
  std::vector<std::uint64_t> negativity;
  std::vector<std::string> diagnostic;
  explicit PathRows(std::size_t rows) : value(rows, 0.0), rejected(rows, 0), negativity(rows, 0), diagnostic(rows) {}
};

void collect_status(RowStatus& st, const std::vector<PathRows>& per_path, std::size_t r) {
  for (const auto& p : per_path) {
    st.negativity_events += p.negativity[r];
    if (p.rejected[r] && st.diagnostic.empty()) st.diagnostic = p.diagnostic[r];
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// CLT

CltReport clt_experiment(const ExperimentConfig& cfg, const Coefficients& c, const ScalingSchedule& schedule,
                         const NormSpec& norm, std::vector<double> thresholds) {
  validate_norm_spec(norm, cfg.solver.dim);
  for (double a : thresholds) {
    if (!(a > 0.0)) throw InvalidArgument("probability thresholds must be positive");
  }
  std::sort(thresholds.begin(), thresholds.end());
  const Setup setup = prepare(cfg, c, schedule);
  if (norm.tau == Tau::two && setup.snap_times.size() < 2) throw InvalidArgument("tau = 2 needs at least two snapshots");
  const int n_v = cfg.ou_cutoff < 0 ? default_ou_cutoff(setup.solver.resolution) : cfg.ou_cutoff;
  for (const auto& row : schedule.rows) {
    if (row.cutoff > n_v) throw InvalidArgument("limit cutoff below the noise cutoff of a schedule row");
  }
  const NoiseBasis limit_basis(setup.solver.dim, n_v);
  const std::size_t rows = schedule.rows.size();
  const int d = setup.solver.dim;

  std::vector<PathRows> results(cfg.paths, PathRows(rows));
  std::vector<std::vector<double>> norms_by_path(cfg.paths, std::vector<double>(rows, 0.0));

  parallel_for(cfg.paths, cfg.workers, [&](std::size_t path) {
    const double rho_bar = initial_constant(setup.solver, cfg.seed, path);
    const OUModeSystem sys = build_ou(c, rho_bar, limit_basis, setup.solver.resolution);
    const OUStepper ou(sys, setup.dt);
    SpectralField v = ou_zero(sys);

    std::vector<DKStepper> steppers;
    std::vector<PathState> states;
    std::size_t modes = sys.noise_mode_count();
    for (std::size_t r = 0; r < rows; ++r) {
      steppers.emplace_back(row_config(setup, schedule.rows[r].epsilon), c, setup.models[r], setup.dt);
      states.push_back(initial_state(GridField(d, setup.solver.resolution, rho_bar)));
      modes = std::max(modes, setup.models[r].mode_count());
    }
    std::vector<std::vector<double>> snap_norms(rows);
    const NoiseStream stream(cfg.seed, path);
    ModeIncrements inc;
    std::size_t next = 0;
    for (std::uint64_t s = 0;; ++s) {
      while (next < setup.snap_steps.size() && setup.snap_steps[next] == s) {
        for (std::size_t r = 0; r < rows; ++r) {
          if (states[r].rejected) continue;
          SpectralField diff = dft(fluctuation_field(states[r].rho, rho_bar, schedule.rows[r].epsilon));
          diff -= v;
          snap_norms[r].push_back(h_neg_norm(diff, norm.beta));
        }
        ++next;
      }
      if (s == setup.steps) break;
      stream.fill(s, modes, d, setup.dt, inc);
      ou.advance(v, inc.values);
      for (std::size_t r = 0; r < rows; ++r) {
        if (!states[r].rejected) steppers[r].advance(states[r], inc.values);
      }
    }
    auto& out = results[path];
    for (std::size_t r = 0; r < rows; ++r) {
      out.negativity[r] = states[r].negativity_events;
      if (states[r].rejected) {
        out.rejected[r] = 1;
        out.diagnostic[r] = states[r].diagnostic;
        continue;
      }
      const double nrm = spacetime_norm(setup.snap_times, snap_norms[r], norm.tau);
      norms_by_path[path][r] = nrm;
      out.value[r] = nrm * nrm;
    }
  });

  CltReport rep;
  rep.coefficients = c.name;
  rep.seed = cfg.seed;
  rep.dim = d;
  rep.resolution = setup.solver.resolution;
  rep.horizon = setup.solver.horizon;
  rep.dt = setup.dt;
  rep.ou_cutoff = n_v;
  rep.norm = norm;
  rep.gamma = schedule.gamma;
  rep.thresholds = thresholds;
  rep.snapshot_times = setup.snap_times;
  const double moment = initial_moment(c.exponents, setup.rho_lo, setup.rho_hi);

  for (std::size_t r = 0; r < rows; ++r) {
    CltRow row;
    row.schedule = schedule.rows[r];
    std::vector<double> values(cfg.paths), norms(cfg.paths);
    std::vector<char> rejected(cfg.paths);
    for (std::size_t p = 0; p < cfg.paths; ++p) {
      values[p] = results[p].value[r];
      norms[p] = norms_by_path[p][r];
      rejected[p] = results[p].rejected[r];
    }
    const auto kept = accepted(row.status, values, rejected, cfg.max_reject_fraction);
    collect_status(row.status, results, r);
    row.bound_terms = rate_bound(row.schedule, c, moment, norm, setup.solver.horizon, d, n_v);
    if (row.status.aborted) {
      row.mean_sq_err = {kNaN, {kNaN, kNaN}, kNaN};
      row.p_gt.assign(thresholds.size(), kNaN);
    } else {
      row.mean_sq_err = estimate_mean(kept);
      for (double a : thresholds) {
        std::size_t above = 0;
        for (std::size_t p = 0; p < cfg.paths; ++p) {
          if (!rejected[p] && norms[p] > a) ++above;
        }
        row.p_gt.push_back(kept.empty() ? kNaN : static_cast<double>(above) / static_cast<double>(kept.size()));
      }
    }
    rep.rows.push_back(std::move(row));
  }

  const CltRow& first = rep.rows.front();
  const double first_bound = first.bound_terms.value();
  rep.fitted_constant = (!first.status.aborted && first_bound > 0.0) ? first.mean_sq_err.mean / first_bound : kNaN;
  for (auto& row : rep.rows) {
    row.bound = row.bound_terms.value(rep.fitted_constant);
    row.ratio = row.bound > 0.0 ? row.mean_sq_err.mean / row.bound : kNaN;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Moments

double MomentReport::ratio_spread() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& r : rows) {
    if (r.degenerate || r.status.aborted || !std::isfinite(r.ratio)) continue;
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
  }
  return hi > 0.0 ? hi / lo : kNaN;
}

MomentReport moment_experiment(const ExperimentConfig& cfg, const Coefficients& c, const ScalingSchedule& schedule,
                               double h) {
  const Exponents& e = c.exponents;
  const double h_max = e.p / (e.k + 1.0);
  if (!(h >= 1.0 && h <= h_max)) {
    throw InvalidArgument("moment order h=" + std::to_string(h) + " outside [1, p/(k+1)] = [1, " +
                          std::to_string(h_max) + "]");
  }
  const Setup setup = prepare(cfg, c, schedule);
  const std::size_t rows = schedule.rows.size();
  const int d = setup.solver.dim;
  std::vector<PathRows> results(cfg.paths, PathRows(rows));

  parallel_for(cfg.paths, cfg.workers, [&](std::size_t path) {
    const double rho_bar = initial_constant(setup.solver, cfg.seed, path);
    auto& out = results[path];
    for (std::size_t r = 0; r < rows; ++r) {
      const double eps = schedule.rows[r].epsilon;
      DKStepper stepper(row_config(setup, eps), c, setup.models[r], setup.dt);
      PathState state = initial_state(GridField(d, setup.solver.resolution, rho_bar));
      const NoiseStream stream(cfg.seed, path);
      ModeIncrements inc;
      std::vector<GridField> fields;
      std::size_t next = 0;
      for (std::uint64_t s = 0;; ++s) {
        while (next < setup.snap_steps.size() && setup.snap_steps[next] == s) {
          fields.push_back(fluctuation_field(state.rho, rho_bar, eps));
          ++next;
        }
        if (s == setup.steps || state.rejected) break;
        stream.fill(s, setup.models[r].mode_count(), d, setup.dt, inc);
        stepper.advance(state, inc.values);
      }
      out.negativity[r] = state.negativity_events;
      if (state.rejected) {
        out.rejected[r] = 1;
        out.diagnostic[r] = state.diagnostic;
        continue;
      }
      out.value[r] = std::pow(lp_spacetime_norm(setup.snap_times, fields, h), h);
    }
  });

  MomentReport rep;
  rep.coefficients = c.name;
  rep.seed = cfg.seed;
  rep.dim = d;
  rep.resolution = setup.solver.resolution;
  rep.horizon = setup.solver.horizon;
  rep.dt = setup.dt;
  rep.h = h;
  rep.gamma = schedule.gamma;
  const double moment = initial_moment(e, setup.rho_lo, setup.rho_hi);
  for (std::size_t r = 0; r < rows; ++r) {
    MomentRow row;
    row.schedule = schedule.rows[r];
    std::vector<double> values(cfg.paths);
    std::vector<char> rejected(cfg.paths);
    for (std::size_t p = 0; p < cfg.paths; ++p) {
      values[p] = results[p].value[r];
      rejected[p] = results[p].rejected[r];
    }
    const auto kept = accepted(row.status, values, rejected, cfg.max_reject_fraction);
    collect_status(row.status, results, r);
    row.moment = row.status.aborted ? MeanEstimate{kNaN, {kNaN, kNaN}, kNaN} : estimate_mean(kept);
    const double f3 = row.schedule.f3;
    row.scale = std::pow(f3, 0.5 * h) * std::pow(1.0 + row.schedule.epsilon * f3, 0.5 * d * (e.p + e.m)) * (1.0 + moment);
    row.degenerate = f3 == 0.0;
    row.ratio = row.degenerate ? kNaN : row.moment.mean / row.scale;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Moser

double moser_zeta(double r, int dim) {
  const double dd = dim;
  if (r >= 1.0) return 0.5 * dd * (1.0 + 2.0 / dd) * (1.0 + 2.0 / dd);
  return std::exp(-dd * (dd + 1.0)) * (0.5 + 1.0 / dd);
}

double moser_remainder(double c0, double inf_dphi, double epsilon, double f1, double f3) {
  return c0 / (inf_dphi * inf_dphi) * (epsilon * epsilon * f1 * f3 + epsilon * f3);
}

MoserSeries moser_series_log(double log_r, int dim) {
  MoserSeries s;
  s.zeta = moser_zeta(log_r >= 0.0 ? 1.0 : 0.0, dim);
  if (log_r == -std::numeric_limits<double>::infinity()) return s;
  const double shrink = 1.0 / (1.0 + 2.0 / dim);
  double exponent = s.zeta * log_r;  // zeta (1+2/d)^-j log R, j = 0
  double inv_sq_sum = 0.0;
  std::size_t j = 0;
  while (true) {
    ++j;
    exponent *= shrink;
    const double jj = static_cast<double>(j);
    const double term = std::exp(exponent) / (jj * jj);
    s.value += term;
    inv_sq_sum += 1.0 / (jj * jj);
    if (s.partial_sums.size() < 16) s.partial_sums.push_back(s.value);
    // Once R^(...) is 1 to double precision the rest is the tail of sum j^-2.
    if (std::abs(exponent) < 1e-17 || j >= 100000) break;
  }
  s.terms = j;
  s.value += std::numbers::pi * std::numbers::pi / 6.0 - inv_sq_sum;
  return s;
}

MoserReport moser_experiment(const ExperimentConfig& cfg, const Coefficients& c, const ScalingSchedule& schedule,
                             double delta) {
  const double low = cfg.solver.rho0;
  if (cfg.solver.rho0_spread != 0.0) throw InvalidArgument("the Moser experiment uses a constant initial value");
  if (!(delta > 0.0 && delta < low)) throw InvalidArgument("Moser threshold delta must lie in (0, low)");
  double inf_dphi = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 4096; ++i) inf_dphi = std::min(inf_dphi, c.dphi(4.0 * low * i / 4096.0));
  if (!(inf_dphi > 0.0)) throw InvalidArgument("Moser experiment requires inf phi' > 0 (smooth the coefficients)");

  const Setup setup = prepare(cfg, c, schedule);
  const std::size_t rows = schedule.rows.size();
  const int d = setup.solver.dim;
  const double level = low - delta;
  std::vector<PathRows> results(cfg.paths, PathRows(rows));

  parallel_for(cfg.paths, cfg.workers, [&](std::size_t path) {
    auto& out = results[path];
    for (std::size_t r = 0; r < rows; ++r) {
      DKStepper stepper(row_config(setup, schedule.rows[r].epsilon), c, setup.models[r], setup.dt);
      PathState state = initial_state(GridField(d, setup.solver.resolution, low));
      const NoiseStream stream(cfg.seed, path);
      ModeIncrements inc;
      bool hit = false;
      for (std::uint64_t s = 0; s < setup.steps && !hit; ++s) {
        stream.fill(s, setup.models[r].mode_count(), d, setup.dt, inc);
        stepper.advance(state, inc.values);
        if (state.rejected) break;
        hit = state.rho.min() < level;
      }
      out.negativity[r] = state.negativity_events;
      if (state.rejected && !hit) {
        out.rejected[r] = 1;
        out.diagnostic[r] = state.diagnostic;
      }
      out.value[r] = hit ? 1.0 : 0.0;
    }
  });

  MoserReport rep;
  rep.coefficients = c.name;
  rep.seed = cfg.seed;
  rep.dim = d;
  rep.resolution = setup.solver.resolution;
  rep.horizon = setup.solver.horizon;
  rep.dt = setup.dt;
  rep.low = low;
  rep.delta = delta;
  rep.inf_dphi = inf_dphi;
  for (std::size_t r = 0; r < rows; ++r) {
    MoserRow row;
    row.schedule = schedule.rows[r];
    std::vector<double> values(cfg.paths);
    std::vector<char> rejected(cfg.paths);
    for (std::size_t p = 0; p < cfg.paths; ++p) {
      values[p] = results[p].value[r];
      rejected[p] = results[p].rejected[r];
    }
    const auto kept = accepted(row.status, values, rejected, cfg.max_reject_fraction);
    collect_status(row.status, results, r);
    row.hits = static_cast<std::size_t>(pairwise_sum(kept));
    row.probability = kept.empty() ? kNaN : static_cast<double>(row.hits) / static_cast<double>(kept.size());
    row.ci = wilson_interval(row.hits, kept.size());
    rep.rows.push_back(std::move(row));
  }

  // log R = log C0 + log base; the bound c*/(low - delta) S(log R) increases with log R.
  auto log_base = [&](const ScheduleRow& s) { return std::log(moser_remainder(1.0, inf_dphi, s.epsilon, s.f1, s.f3)); };
  const double prefactor = rep.c_star / (low - delta);
  const double target = rep.rows.front().probability;
  if (!(target > 0.0) || rep.rows.front().status.aborted) {
    rep.degenerate = true;
    rep.log_c0 = -std::numeric_limits<double>::infinity();
  } else {
    double lo = -1e300;
    double hi = 700.0;
    if (prefactor * moser_series_log(lo, d).value >= target) {
      hi = lo;
    } else {
      for (int it = 0; it < 4000 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++it) {
        // Geometric midpoint once both ends are below -1.
        const double mid = (lo < -1.0 && hi < -1.0) ? -std::sqrt(lo * hi) : 0.5 * (lo + hi);
        if (prefactor * moser_series_log(mid, d).value < target) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
    }
    rep.log_c0 = hi - log_base(rep.rows.front().schedule);
  }
  for (auto& row : rep.rows) {
    row.log_r = rep.log_c0 + log_base(row.schedule);
    row.series = moser_series_log(row.log_r, d);
    row.bound = prefactor * row.series.value;
  }
  return rep;
}

}  // namespace fluctuon
