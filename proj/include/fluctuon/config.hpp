#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fluctuon/analysis.hpp"
#include "fluctuon/coefficients.hpp"
#include "fluctuon/dk_solver.hpp"
#include "fluctuon/experiments.hpp"

namespace fluctuon {

/// Flat sectioned key=value run description. Keys are written as
/// `section.key` in overrides and error messages.
struct RunConfig {
  // [run]
  std::string command = "validate";  // simulate | clt | moments | moser | validate
  std::uint64_t seed = 1;
  std::size_t paths = 100;
  unsigned workers = 1;
  std::string output;  // empty: $FLUCTUON_OUT, else the current directory
  double max_reject_fraction = 0.01;
  bool write_trajectories = false;
  // [grid]
  int dim = 1;
  int resolution = 128;
  // [time]
  double horizon = 0.25;
  double dt = 0.0;  // 0: CFL step
  int snapshots = 51;
  // [coefficients]
  std::string family = "model";  // model | linear | power
  double m = 2.0;
  double phi_exponent = 1.0;
  double sigma_exponent = 0.5;
  double smooth_eta = 0.0;  // 0: no smoothing near zero
  double smooth_ref = 1.0;
  // [initial]
  double rho0 = 1.0;
  double rho0_spread = 0.0;
  double rho_min_est = 0.0;
  // [noise]
  double epsilon = 0.0;  // simulate only
  int cutoff = 2;        // simulate only
  int ou_cutoff = -1;    // -1: N/2 - 1
  // [schedule]
  std::vector<double> epsilons{1e-2, 1e-3, 1e-4};
  double gamma = 0.125;
  // [norm]
  double beta = 1.0;
  std::string tau = "2";  // 2 | inf
  std::vector<double> thresholds{0.5, 1.0};
  // [moments]
  double h = 2.0;
  // [moser]
  double delta = 0.0;  // 0: rho0 / 2
  // [solver]
  std::string policy = "clip";  // clip | reject
  // [validate]
  double z_max = 1e4;
  int samples = 400;

  bool operator==(const RunConfig&) const = default;
};

/// Parses INI text, then applies `section.key=value` overrides in order.
/// The result is validated. Throws ConfigError naming the key (unknown key,
/// bad type, constraint) or RegimeViolation for an invalid schedule.
RunConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides = {});
RunConfig parse_config_file(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Applies one `section.key=value` assignment without validating.
void set_config_value(RunConfig& cfg, const std::string& assignment);

/// Throws ConfigError / RegimeViolation as parse_config_text.
void validate_config(const RunConfig& cfg);

/// Canonical INI text: every key, fixed order, shortest round-trip numbers.
std::string serialize_config(const RunConfig& cfg);

/// FNV-1a 64 of the canonical text without the keys that cannot change
/// results (run.output, run.workers, run.write_trajectories).
std::uint64_t config_hash(const RunConfig& cfg);
std::string config_hash_hex(const RunConfig& cfg);

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputEnv = "FLUCTUON_OUT";
std::filesystem::path output_directory(const RunConfig& cfg);

Coefficients make_coefficients(const RunConfig& cfg);
SolverConfig make_solver_config(const RunConfig& cfg);
ExperimentConfig make_experiment_config(const RunConfig& cfg);
ScalingSchedule make_schedule(const RunConfig& cfg);
NormSpec make_norm_spec(const RunConfig& cfg);
double moser_delta(const RunConfig& cfg);

}  // namespace fluctuon
