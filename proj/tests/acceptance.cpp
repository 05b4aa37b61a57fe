// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fluctuon/analysis.hpp"
#include "fluctuon/config.hpp"
#include "fluctuon/dk_solver.hpp"
#include "fluctuon/experiments.hpp"
#include "fluctuon/limit_ou.hpp"
#include "fluctuon/noise.hpp"
#include "fluctuon/run.hpp"
#include "test_util.hpp"

using namespace fluctuon;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string str(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

ExperimentConfig desk_config(std::size_t paths) {
  ExperimentConfig cfg;
  cfg.solver.dim = 1;
  cfg.solver.resolution = 128;
  cfg.solver.horizon = 0.25;
  cfg.paths = paths;
  cfg.seed = 1;
  return cfg;
}

const std::vector<double> kSweep{1e-2, 1e-3, 1e-4};

Outcome mass_conservation() {
  std::mt19937_64 gen(20240601);
  std::uniform_int_distribution<int> pick_m(1, 3), pick_cutoff(1, 6);
  std::uniform_real_distribution<double> pick_eps(0.0, 1e-2), pick_rho(0.5, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    SolverConfig cfg;
    cfg.resolution = 128;
    cfg.horizon = 0.25;
    const int m = pick_m(gen);
    cfg.epsilon = pick_eps(gen);
    cfg.rho0 = pick_rho(gen);
    cfg.rho_min_est = 0.25 * cfg.rho0;
    Coefficients c = model_case(m);
    if (m == 1) c = smooth_near_zero(c, 0.1, cfg.rho0).smoothed;
    const int cutoff = pick_cutoff(gen);
    GridField rho0(1, cfg.resolution);
    const double amp = 0.3 * pick_rho(gen) / 2.0;
    for (std::size_t k = 0; k < rho0.size(); ++k) {
      rho0[k] = cfg.rho0 * (1.0 + amp * std::cos(2.0 * kPi * rho0.coordinate(k, 0)));
    }
    const Trajectory t = simulate_path(cfg, c, build_basis(1, cutoff, cfg.resolution), rho0, 11, i);
    if (t.diagnostics.rejected) return {false, "config " + std::to_string(i) + " rejected"};
    worst = std::max(worst, t.diagnostics.max_rel_mass_drift);
  }
  return {worst <= 1e-10, "max relative drift " + str(worst) + " over 50 configs"};
}

Outcome zero_noise_fixed_point() {
  double worst = 0.0;
  for (int m : {1, 2, 3}) {
    SolverConfig cfg;
    cfg.resolution = 128;
    cfg.horizon = 0.25;
    cfg.rho0 = 1.7;
    for (int i = 0; i <= 10; ++i) cfg.snapshot_times.push_back(0.025 * i);
    const Trajectory t = simulate_path(cfg, model_case(m), build_basis(1, 3, 128), 1);
    for (const auto& s : t.snapshots) {
      for (double x : s.values()) worst = std::max(worst, std::abs(x - 1.7));
    }
  }
  return {worst <= 1e-15 * 1.7, "max |rho - rho0| = " + str(worst)};
}

Outcome heat_decay() {
  SolverConfig cfg;
  cfg.resolution = 128;
  cfg.horizon = 0.01;
  cfg.snapshot_times = {0.0, 0.01};
  GridField rho0(1, 128);
  for (std::size_t i = 0; i < rho0.size(); ++i) rho0[i] = 1.0 + 0.1 * std::cos(2.0 * kPi * rho0.coordinate(i, 0));
  const Trajectory t = simulate_path(cfg, model_case(1), build_basis(1, 0, 128), rho0, 1);
  const double amp = 2.0 * std::abs(dft(t.snapshots.back()).at(1));
  const double exact = 0.1 * std::exp(-4.0 * kPi * kPi * t.times.back());
  const double rel = std::abs(amp / exact - 1.0);
  return {rel < 1e-3, "relative error " + str(rel)};
}

Outcome noise_structure() {
  double f1_dev = 0.0, f2_max = 0.0, f3_err = 0.0;
  for (int m = 0; m <= 16; ++m) {
    const StructureSums s = structure_sums(build_basis(1, m, 128));
    f1_dev = std::max(f1_dev, (s.f1.max() - s.f1.min()) / s.f1.max());
    f2_max = std::max(f2_max, s.f2_sup / std::max(1.0, s.f3_sup));
    const double closed = 8.0 * kPi * kPi / 6.0 * m * (m + 1.0) * (2.0 * m + 1.0);
    if (m > 0) f3_err = std::max(f3_err, std::abs(s.f3_sup - closed) / closed);
  }
  return {f1_dev <= 1e-12 && f2_max <= 1e-12 && f3_err <= 1e-10,
          "F1 spread " + str(f1_dev) + ", |F2|/|F3| " + str(f2_max) + ", F3 rel err " + str(f3_err)};
}

Outcome ou_exactness() {
  const int n_grid = 32;
  const OUModeSystem sys = build_ou(linear_case(), 1.0, NoiseBasis(1, n_grid / 2 - 1), n_grid);
  const double dt = 1e-3;
  const std::uint64_t steps = 50;
  const std::size_t paths = 10000;
  const std::size_t modes = sys.mode_count();
  std::vector<std::vector<double>> sq(modes, std::vector<double>(paths));
  parallel_for(paths, 1, [&](std::size_t p) {
    const SpectralTrajectory t = ou_solve(sys, dt * steps, dt, 5, p, std::vector<double>{dt * steps});
    for (std::size_t q = 0; q < modes; ++q) sq[q][p] = std::norm(t.snapshots.back()[sys.index(q)]);
  });
  double worst = 0.0;
  for (std::size_t q = 0; q < modes; ++q) {
    const MeanEstimate e = estimate_mean(sq[q]);
    worst = std::max(worst, std::abs(e.mean - ou_discrete_variance(sys, q, dt, steps)) / e.std_error);
  }
  return {worst < 3.0, std::to_string(modes) + " modes, 10^4 paths, worst |z| = " + str(worst)};
}

Outcome clt_decrease() {
  const CltReport rep = clt_experiment(desk_config(200), model_case(2), make_schedule(kSweep, 0.125, 1),
                                       NormSpec{1.0, Tau::two}, {});
  bool ok = true;
  std::string detail = "mean sq err";
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    detail += " " + str(r.mean_sq_err.mean);
    if (r.status.aborted) ok = false;
    if (i > 0 && !(r.mean_sq_err.mean < rep.rows[i - 1].mean_sq_err.mean)) ok = false;
    if (!(r.mean_sq_err.mean <= r.bound * (1.0 + 1e-12))) ok = false;
  }
  const bool separated = rep.rows.back().mean_sq_err.ci.hi < rep.rows.front().mean_sq_err.ci.lo;
  detail += "; ratio to bound";
  for (const auto& r : rep.rows) detail += " " + str(r.ratio);
  detail += separated ? "; CIs separated" : "; CIs overlap";
  return {ok && separated, detail};
}

Outcome clt_probability() {
  ExperimentConfig cfg = desk_config(200);
  cfg.solver.rho_min_est = 0.5;
  const CltReport rep = clt_experiment(cfg, model_case(1), make_schedule(kSweep, 0.125, 1), NormSpec{1.0, Tau::two},
                                       {0.5, 1.0});
  bool ok = true;
  std::string detail;
  for (std::size_t k = 0; k < rep.thresholds.size(); ++k) {
    detail += "P(>" + str(rep.thresholds[k]) + "):";
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
      const double p = rep.rows[i].p_gt[k];
      detail += " " + str(p);
      if (rep.rows[i].status.aborted || std::isnan(p)) ok = false;
      if (i > 0 && p > rep.rows[i - 1].p_gt[k]) ok = false;
    }
    if (!(rep.rows.back().p_gt[k] <= 0.1)) ok = false;
    detail += "; ";
  }
  double max_err = 0.0;
  for (const auto& r : rep.rows) max_err = std::max(max_err, r.mean_sq_err.mean);
  detail += "max mean sq err " + str(max_err);
  return {ok, detail};
}

Outcome moment_scaling() {
  const MomentReport rep = moment_experiment(desk_config(100), model_case(2), make_schedule(kSweep, 0.125, 1), 2.0);
  std::string detail = "ratios";
  bool ok = true;
  for (const auto& r : rep.rows) {
    detail += " " + str(r.ratio);
    if (r.status.aborted || r.degenerate) ok = false;
  }
  const double spread = rep.ratio_spread();
  detail += "; max/min " + str(spread);
  return {ok && spread <= 10.0, detail};
}

Outcome moser_tail() {
  ExperimentConfig cfg = desk_config(100);
  const double low = 0.1;
  cfg.solver.rho0 = low;
  const Coefficients c = smooth_near_zero(model_case(1), 0.1, low).smoothed;
  const MoserReport rep = moser_experiment(cfg, c, make_schedule(kSweep, 0.125, 1), low / 2.0);
  bool ok = !rep.degenerate;
  std::string detail = "P:";
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    detail += " " + str(r.probability);
    if (r.status.aborted) ok = false;
    if (i > 0 && !(r.probability < rep.rows[i - 1].probability)) ok = false;
    if (!(r.probability <= r.bound * (1.0 + 1e-9))) ok = false;
  }
  detail += "; bound:";
  for (const auto& r : rep.rows) detail += " " + str(r.bound);

  // R_eps arithmetic against the closed form.
  const double f3 = 40.0 * kPi * kPi;
  const double expected = 1e-6 * 5.0 * f3 + 1e-3 * f3;
  const bool arithmetic = moser_remainder(1.0, 1.0, 1e-3, 5.0, f3) == expected;
  detail += arithmetic ? "; R_eps exact" : "; R_eps mismatch";
  return {ok && arithmetic, detail};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  std::vector<std::string> csvs;
  for (const char* workers : {"1", "4", "1"}) {
    const auto dir = test::tmp_dir(std::string("determinism_") + workers + std::to_string(csvs.size()));
    const RunConfig cfg = parse_config_text(
        "", {"run.command=clt", "run.paths=8", "grid.resolution=64", "time.horizon=0.05",
             std::string("run.workers=") + workers, "run.output=" + dir.string()});
    std::ostringstream sink;
    const RunResult r = run(cfg, sink);
    for (const auto& f : r.files) {
      if (f.extension() == ".csv") csvs.push_back(slurp(f));
    }
  }
  const bool ok = csvs.size() == 3 && !csvs[0].empty() && csvs[0] == csvs[1] && csvs[0] == csvs[2];
  return {ok, ok ? "workers 1/4/1 CSVs byte-identical" : "CSV outputs differ"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"mass conservation", mass_conservation},
      {"zero-noise fixed point", zero_noise_fixed_point},
      {"heat-decay oracle", heat_decay},
      {"noise structure", noise_structure},
      {"OU exactness", ou_exactness},
      {"CLT decrease", clt_decrease},
      {"CLT in probability", clt_probability},
      {"moment scaling", moment_scaling},
      {"Moser tail", moser_tail},
      {"determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %-24s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
