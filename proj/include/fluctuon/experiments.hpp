#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fluctuon/analysis.hpp"
#include "fluctuon/coefficients.hpp"
#include "fluctuon/dk_solver.hpp"

namespace fluctuon {

// ---------------------------------------------------------------------------
// Scaling regime

struct ScheduleRow {
  double epsilon = 0.0;
  int cutoff = 0;
  double f1 = 0.0;
  double f2 = 0.0;
  double f3 = 0.0;
  /// sqrt(eps) (|F1| + |F2| + |F3|) at the integer cutoff.
  double regime = 0.0;
  /// The same quantity with the continuous cutoff eps^-gamma.
  double envelope = 0.0;
};

struct ScalingSchedule {
  int dim = 1;
  double gamma = 0.0;
  std::vector<ScheduleRow> rows;  // epsilon descending
};

/// Sup norms of the structure sums of the unweighted cutoff family, from the
/// spectral description (no grid).
ScheduleRow cutoff_sums(int dim, int cutoff);

/// M = floor(eps^-gamma) per epsilon, sorted by epsilon descending.
/// Throws InvalidArgument (gamma <= 0, eps outside (0,1], duplicates) or
/// RegimeViolation (gamma >= 1/(2(d+2)) or the envelope not strictly decreasing).
/// The integer-cutoff quantity can jump up when M increments, so monotonicity
/// is checked on the envelope.
ScalingSchedule make_schedule(std::vector<double> epsilons, double gamma, int dim = 1);

// ---------------------------------------------------------------------------
// Statistics and parallel plumbing

/// Sum in a fixed binary-tree order, independent of how values were produced.
double pairwise_sum(std::span<const double> values);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Mean with a 95% normal interval from the sample variance.
struct MeanEstimate {
  double mean = 0.0;
  Interval ci;
  double std_error = 0.0;
};
MeanEstimate estimate_mean(std::span<const double> values);

/// 95% Wilson score interval for k successes out of n.
Interval wilson_interval(std::size_t k, std::size_t n);

/// Calls fn(i) for i in [0, n) on `workers` threads. The first exception (by
/// index) is rethrown after all workers stop.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

// ---------------------------------------------------------------------------
// Rate bound

struct RateBound {
  double main = 0.0;
  double tail = 0.0;
  [[nodiscard]] double value(double constant = 1.0) const noexcept { return constant * (main + tail); }
};

/// E[rho0^(m+p-1) + rho0^p] for rho0 uniform on [a, b] (a == b: constant).
double initial_moment(const Exponents& e, double a, double b);

/// sum over n in Z^d with cutoff < |n|_inf <= limit_cutoff of |n|^exponent.
/// Zero when the two cutoffs agree.
double lattice_tail_sum(int dim, int cutoff, int limit_cutoff, double exponent);

/// The two summands of the CLT rate with C = 1: the eps/F-sum term and the
/// noise-truncation tail T sum_{M < |n|_inf <= N_v} |n|^((2 - 4/tau) - 2 beta).
RateBound rate_bound(const ScheduleRow& row, const Coefficients& c, double rho0_moment, const NormSpec& norm,
                     double horizon, int dim, int limit_cutoff);

// ---------------------------------------------------------------------------
// Experiments

struct ExperimentConfig {
  /// Grid, horizon, dt, snapshots, initial data and policy; epsilon is
  /// taken from the schedule. Empty snapshot list means 51 uniform times.
  SolverConfig solver;
  std::uint64_t seed = 1;
  std::size_t paths = 100;
  unsigned workers = 1;
  /// Limit noise cutoff N_v; negative selects N/2 - 1.
  int ou_cutoff = -1;
  /// Rows whose rejected-path fraction exceeds this are aborted.
  double max_reject_fraction = 0.01;
};

struct RowStatus {
  std::size_t paths = 0;
  std::size_t rejected = 0;
  std::uint64_t negativity_events = 0;
  bool aborted = false;
  std::string diagnostic;
};

struct CltRow {
  ScheduleRow schedule;
  RowStatus status;
  MeanEstimate mean_sq_err;
  RateBound bound_terms;
  double bound = 0.0;
  double ratio = 0.0;
  /// Empirical P(||v^eps - v|| > a) per threshold.
  std::vector<double> p_gt;
};

struct CltReport {
  std::string coefficients;
  std::uint64_t seed = 0;
  int dim = 1;
  int resolution = 0;
  double horizon = 0.0;
  double dt = 0.0;
  int ou_cutoff = 0;
  NormSpec norm;
  double gamma = 0.0;
  std::vector<double> thresholds;
  double fitted_constant = 0.0;
  std::vector<double> snapshot_times;
  std::vector<CltRow> rows;
};

/// Coupled (rho^eps, v) paths sharing the first 2M+1 (d=1) mode increments;
/// v is driven by the limit noise with cutoff N_v and is common to all rows.
/// C is fitted so that the first row's bound equals its mean.
/// Throws InvalidArgument (norm spec, thresholds, config).
CltReport clt_experiment(const ExperimentConfig& cfg, const Coefficients& c, const ScalingSchedule& schedule,
                         const NormSpec& norm, std::vector<double> thresholds = {});

struct MomentRow {
  ScheduleRow schedule;
  RowStatus status;
  /// E ||v^eps||^h_{L^h([0,T] x T^d)}.
  MeanEstimate moment;
  /// |F3|^(h/2) (1 + eps |F3|)^((d/2)(p+m)) (1 + E[rho0^(m+p-1) + rho0^p]).
  double scale = 0.0;
  double ratio = 0.0;
  bool degenerate = false;
};

struct MomentReport {
  std::string coefficients;
  std::uint64_t seed = 0;
  int dim = 1;
  int resolution = 0;
  double horizon = 0.0;
  double dt = 0.0;
  double h = 2.0;
  double gamma = 0.0;
  std::vector<MomentRow> rows;
  /// max/min ratio over nondegenerate rows.
  [[nodiscard]] double ratio_spread() const;
};

/// Throws InvalidArgument unless h in [1, p/(k+1)].
MomentReport moment_experiment(const ExperimentConfig& cfg, const Coefficients& c, const ScalingSchedule& schedule,
                               double h);

/// sum_{j>=1} j^-2 R^(zeta (1+2/d)^-j), evaluated in log space; terms are
/// added until the next increment is below 1e-12, the rest of sum j^-2 is
/// added in closed form once R^(...) rounds to one.
struct MoserSeries {
  double value = 0.0;
  std::size_t terms = 0;
  double zeta = 0.0;
  /// First partial sums (up to 16) for reporting.
  std::vector<double> partial_sums;
};

/// zeta branch: (d/2)(1+2/d)^2 if R >= 1, else e^{-d(d+1)}(1/2 + 1/d).
double moser_zeta(double r, int dim);
MoserSeries moser_series_log(double log_r, int dim);

/// R = C0 (inf phi')^-2 (eps^2 |F1| |F3| + eps |F3|).
double moser_remainder(double c0, double inf_dphi, double epsilon, double f1, double f3);

struct MoserRow {
  ScheduleRow schedule;
  RowStatus status;
  std::size_t hits = 0;
  double probability = 0.0;
  Interval ci;
  double log_r = 0.0;
  MoserSeries series;
  double bound = 0.0;
};

struct MoserReport {
  std::string coefficients;
  std::uint64_t seed = 0;
  int dim = 1;
  int resolution = 0;
  double horizon = 0.0;
  double dt = 0.0;
  double low = 0.0;
  double delta = 0.0;
  double inf_dphi = 0.0;
  double c_star = 1.0;
  /// log C0 fitted so the bound equals the empirical probability at the largest epsilon.
  double log_c0 = 0.0;
  /// True when the largest-epsilon probability is 0 (nothing to fit).
  bool degenerate = false;
  std::vector<MoserRow> rows;
};

/// rho0 = low = cfg.solver.rho0 (constant). Counts paths whose minimum over
/// all cells and steps drops below low - delta. Throws InvalidArgument
/// unless 0 < delta < low and inf phi' > 0 on [0, 4 low].
MoserReport moser_experiment(const ExperimentConfig& cfg, const Coefficients& c, const ScalingSchedule& schedule,
                             double delta);

}  // namespace fluctuon
