#include "fluctuon/run.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "fluctuon/format.hpp"
#include "fluctuon/report.hpp"
#include "fluctuon/trajectory_io.hpp"

namespace fluctuon {

namespace {

std::string fmt(const char* spec, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

std::string row_flag(const RowStatus& st) { return st.aborted ? "  ABORTED: " + st.diagnostic : ""; }

struct Outputs {
  std::filesystem::path dir;
  std::string stem;
  RunResult result;
  void write(const std::string& ext, const std::string& text) {
    const auto path = dir / (stem + ext);
    write_text_file(path, text);
    result.files.push_back(path);
  }
};

void run_validate(const RunConfig& cfg, Outputs& out, std::ostream& os) {
  const Coefficients c = make_coefficients(cfg);
  const ValidationReport rep = validate_assumptions(c, cfg.z_max, cfg.samples);
  os << "coefficients: " << rep.coefficients << "  (z in [" << rep.z_min << ", " << rep.z_max << "])\n";
  os << "check      status    constant      witness\n";
  for (const auto& ch : rep.checks) {
    char line[160];
    std::snprintf(line, sizeof line, "%-10s %-9s %-13.6g %-13.6g %s\n", ch.id.c_str(), to_string(ch.status),
                  ch.constant, ch.witness, ch.note.c_str());
    os << line;
  }
  os << (rep.all_pass() ? "all pass\n" : "some checks did not pass\n");
  out.write(".json", validation_json(rep, config_hash_hex(cfg), serialize_config(cfg)));
}

void run_simulate(const RunConfig& cfg, Outputs& out, std::ostream& os) {
  const Coefficients c = make_coefficients(cfg);
  const SolverConfig solver = make_solver_config(cfg);
  const NoiseModel model = build_basis(cfg.dim, cfg.cutoff, cfg.resolution);
  const std::string hash = config_hash_hex(cfg);
  std::vector<Trajectory> paths(cfg.paths);
  parallel_for(cfg.paths, cfg.workers, [&](std::size_t p) {
    paths[p] = simulate_path(solver, c, model, cfg.seed, p);
  });

  std::string csv = std::string("# ") + kCsvSchema + "\n# kind simulate\n# config_hash " + hash + "\n";
  csv += "path,rho0,dt,steps,max_rel_mass_drift,min_rho,negativity_events,rejected\n";
  std::size_t rejected = 0;
  double worst_drift = 0.0;
  double min_rho = INFINITY;
  std::uint64_t negativity = 0;
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const auto& d = paths[p].diagnostics;
    const double rho0 = initial_constant(solver, cfg.seed, p);
    csv += std::to_string(p) + "," + format_real(rho0) + "," + format_real(d.dt) + "," + std::to_string(d.steps) +
           "," + format_real(d.max_rel_mass_drift) + "," + format_real(d.min_rho) + "," +
           std::to_string(d.negativity_events) + "," + (d.rejected ? "1" : "0") + "\n";
    rejected += d.rejected ? 1 : 0;
    worst_drift = std::max(worst_drift, d.max_rel_mass_drift);
    min_rho = std::min(min_rho, d.min_rho);
    negativity += d.negativity_events;
    if (cfg.write_trajectories) {
      const auto path = out.dir / (out.stem + "_path" + std::to_string(p) + ".bin");
      write_trajectory(path, paths[p], hash);
      out.result.files.push_back(path);
    }
  }
  out.write(".csv", csv);
  os << "simulate: " << c.name << ", d=" << cfg.dim << ", N=" << cfg.resolution << ", T=" << cfg.horizon
     << ", eps=" << cfg.epsilon << ", M=" << cfg.cutoff << "\n";
  os << "paths " << paths.size() << "  dt " << (paths.empty() ? 0.0 : paths.front().diagnostics.dt) << "  steps "
     << (paths.empty() ? 0 : paths.front().diagnostics.steps) << "\n";
  os << "max relative mass drift " << worst_drift << "  min rho " << min_rho << "  negativity events " << negativity
     << "  rejected " << rejected << "\n";
  if (static_cast<double>(rejected) > cfg.max_reject_fraction * static_cast<double>(paths.size())) {
    out.result.exit_code = 1;
  }
}

void run_clt(const RunConfig& cfg, Outputs& out, std::ostream& os) {
  const Coefficients c = make_coefficients(cfg);
  const CltReport rep =
      clt_experiment(make_experiment_config(cfg), c, make_schedule(cfg), make_norm_spec(cfg), cfg.thresholds);
  const std::string hash = config_hash_hex(cfg);
  out.write(".csv", clt_csv(rep, hash));
  out.write(".json", clt_json(rep, hash, serialize_config(cfg)));
  os << "clt: " << c.name << ", beta=" << rep.norm.beta << ", tau=" << cfg.tau << ", dt=" << rep.dt
     << ", N_v=" << rep.ou_cutoff << ", fitted C=" << rep.fitted_constant << "\n";
  os << "epsilon    M   mean_sq_err   95% CI                       bound         ratio\n";
  for (const auto& r : rep.rows) {
    os << fmt("%-10.3g", r.schedule.epsilon) << fmt("%-4.0f", r.schedule.cutoff)
       << fmt("%-14.6g", r.mean_sq_err.mean) << "[" << fmt("%.6g", r.mean_sq_err.ci.lo) << ", "
       << fmt("%.6g", r.mean_sq_err.ci.hi) << "]   " << fmt("%-14.6g", r.bound)
       << fmt("%.4g", r.ratio);
    for (std::size_t i = 0; i < r.p_gt.size(); ++i) {
      os << "  P(>" << rep.thresholds[i] << ")=" << fmt("%.3g", r.p_gt[i]);
    }
    os << row_flag(r.status) << "\n";
    if (r.status.aborted) out.result.exit_code = 1;
  }
}

void run_moments(const RunConfig& cfg, Outputs& out, std::ostream& os) {
  const Coefficients c = make_coefficients(cfg);
  const MomentReport rep = moment_experiment(make_experiment_config(cfg), c, make_schedule(cfg), cfg.h);
  const std::string hash = config_hash_hex(cfg);
  out.write(".csv", moments_csv(rep, hash));
  out.write(".json", moments_json(rep, hash, serialize_config(cfg)));
  os << "moments: " << c.name << ", h=" << rep.h << ", dt=" << rep.dt << "\n";
  os << "epsilon    M   moment        scale         ratio\n";
  for (const auto& r : rep.rows) {
    os << fmt("%-10.3g", r.schedule.epsilon) << fmt("%-4.0f", r.schedule.cutoff) << fmt("%-14.6g", r.moment.mean)
       << fmt("%-14.6g", r.scale) << fmt("%.4g", r.ratio) << (r.degenerate ? "  (degenerate)" : "")
       << row_flag(r.status) << "\n";
    if (r.status.aborted) out.result.exit_code = 1;
  }
  os << "ratio max/min " << rep.ratio_spread() << "\n";
}

void run_moser(const RunConfig& cfg, Outputs& out, std::ostream& os) {
  const Coefficients c = make_coefficients(cfg);
  const MoserReport rep = moser_experiment(make_experiment_config(cfg), c, make_schedule(cfg), moser_delta(cfg));
  const std::string hash = config_hash_hex(cfg);
  out.write(".csv", moser_csv(rep, hash));
  out.write(".json", moser_json(rep, hash, serialize_config(cfg)));
  os << "moser: " << c.name << ", low=" << rep.low << ", delta=" << rep.delta << ", inf phi'=" << rep.inf_dphi
     << ", log C0=" << rep.log_c0 << (rep.degenerate ? " (degenerate: no hits at the largest epsilon)" : "") << "\n";
  os << "epsilon    M   P(min<low-delta)  95% CI              log R         bound\n";
  for (const auto& r : rep.rows) {
    os << fmt("%-10.3g", r.schedule.epsilon) << fmt("%-4.0f", r.schedule.cutoff) << fmt("%-18.4g", r.probability)
       << "[" << fmt("%.3g", r.ci.lo) << ", " << fmt("%.3g", r.ci.hi) << "]    " << fmt("%-14.6g", r.log_r)
       << fmt("%.4g", r.bound) << row_flag(r.status) << "\n";
    if (r.status.aborted) out.result.exit_code = 1;
  }
}

}  // namespace

RunResult run(const RunConfig& cfg, std::ostream& summary) {
  validate_config(cfg);
  Outputs out;
  out.dir = output_directory(cfg);
  out.stem = report_stem(cfg.command, cfg.seed, config_hash_hex(cfg));
  if (cfg.command == "validate") {
    run_validate(cfg, out, summary);
  } else if (cfg.command == "simulate") {
    run_simulate(cfg, out, summary);
  } else if (cfg.command == "clt") {
    run_clt(cfg, out, summary);
  } else if (cfg.command == "moments") {
    run_moments(cfg, out, summary);
  } else {
    run_moser(cfg, out, summary);
  }
  for (const auto& f : out.result.files) summary << "wrote " << f.string() << "\n";
  return out.result;
}

}  // namespace fluctuon
