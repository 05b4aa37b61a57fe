#include "fluctuon/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "fluctuon/error.hpp"
#include "fluctuon/format.hpp"

namespace fluctuon {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const char* expected, const std::string& value) {
  throw ConfigError(key + ": expected " + expected + ", got '" + value + "'");
}

template <class T>
T parse_number(const std::string& key, const std::string& raw, const char* expected) {
  const std::string s = trim(raw);
  T out{};
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (s.empty() || ec != std::errc() || ptr != last) bad_value(key, expected, raw);
  return out;
}


std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_real(v[i]);
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  bad_value(key, "boolean", raw);
}

std::string parse_choice(const std::string& key, const std::string& raw, std::initializer_list<const char*> choices) {
  const std::string s = trim(raw);
  std::string listed;
  for (const char* c : choices) {
    if (s == c) return s;
    listed += listed.empty() ? c : std::string("|") + c;
  }
  bad_value(key, listed.c_str(), raw);
}

struct Field {
  const char* section;
  const char* key;
  bool hashed;
  std::function<void(RunConfig&, const std::string& full_key, const std::string& value)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define FL_REAL(sec, name, member, hashed)                                                                     \
  Field{sec, name, hashed, [](RunConfig& c, const std::string& k, const std::string& v) {                    \
          c.member = parse_number<double>(k, v, "real");                                                     \
        },                                                                                                   \
        [](const RunConfig& c) { return format_real(c.member); }}
#define FL_INT(sec, name, member, type, hashed)                                                                \
  Field{sec, name, hashed, [](RunConfig& c, const std::string& k, const std::string& v) {                    \
          c.member = parse_number<type>(k, v, "integer");                                                    \
        },                                                                                                   \
        [](const RunConfig& c) { return std::to_string(c.member); }}
#define FL_CHOICE(sec, name, member, hashed, ...)                                                              \
  Field{sec, name, hashed, [](RunConfig& c, const std::string& k, const std::string& v) {                    \
          c.member = parse_choice(k, v, {__VA_ARGS__});                                                      \
        },                                                                                                   \
        [](const RunConfig& c) { return c.member; }}
#define FL_LIST(sec, name, member)                                                                             \
  Field{sec, name, true, [](RunConfig& c, const std::string& k, const std::string& v) {                      \
          c.member.clear();                                                                                  \
          std::stringstream ss(v);                                                                           \
          for (std::string item; std::getline(ss, item, ',');) {                                             \
            c.member.push_back(parse_number<double>(k, item, "comma-separated reals"));                      \
          }                                                                                                  \
        },                                                                                                   \
        [](const RunConfig& c) { return format_list(c.member); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      FL_CHOICE("run", "command", command, true, "simulate", "clt", "moments", "moser", "validate"),
      FL_INT("run", "seed", seed, std::uint64_t, true),
      FL_INT("run", "paths", paths, std::size_t, true),
      FL_INT("run", "workers", workers, unsigned, false),
      Field{"run", "output", false, [](RunConfig& c, const std::string&, const std::string& v) { c.output = trim(v); },
            [](const RunConfig& c) { return c.output; }},
      FL_REAL("run", "max_reject_fraction", max_reject_fraction, true),
      Field{"run", "write_trajectories", false,
            [](RunConfig& c, const std::string& k, const std::string& v) { c.write_trajectories = parse_bool(k, v); },
            [](const RunConfig& c) { return std::string(c.write_trajectories ? "true" : "false"); }},
      FL_INT("grid", "dim", dim, int, true),
      FL_INT("grid", "resolution", resolution, int, true),
      FL_REAL("time", "horizon", horizon, true),
      FL_REAL("time", "dt", dt, true),
      FL_INT("time", "snapshots", snapshots, int, true),
      FL_CHOICE("coefficients", "family", family, true, "model", "linear", "power"),
      FL_REAL("coefficients", "m", m, true),
      FL_REAL("coefficients", "phi_exponent", phi_exponent, true),
      FL_REAL("coefficients", "sigma_exponent", sigma_exponent, true),
      FL_REAL("coefficients", "smooth_eta", smooth_eta, true),
      FL_REAL("coefficients", "smooth_ref", smooth_ref, true),
      FL_REAL("initial", "rho0", rho0, true),
      FL_REAL("initial", "spread", rho0_spread, true),
      FL_REAL("initial", "rho_min_est", rho_min_est, true),
      FL_REAL("noise", "epsilon", epsilon, true),
      FL_INT("noise", "cutoff", cutoff, int, true),
      FL_INT("noise", "ou_cutoff", ou_cutoff, int, true),
      FL_LIST("schedule", "epsilons", epsilons),
      FL_REAL("schedule", "gamma", gamma, true),
      FL_REAL("norm", "beta", beta, true),
      FL_CHOICE("norm", "tau", tau, true, "2", "inf"),
      FL_LIST("norm", "thresholds", thresholds),
      FL_REAL("moments", "h", h, true),
      FL_REAL("moser", "delta", delta, true),
      FL_CHOICE("solver", "policy", policy, true, "clip", "reject"),
      FL_REAL("validate", "z_max", z_max, true),
      FL_INT("validate", "samples", samples, int, true),
  };
  return table;
}

#undef FL_REAL
#undef FL_INT
#undef FL_CHOICE
#undef FL_LIST

const Field& find_field(const std::string& section, const std::string& key) {
  for (const auto& f : fields()) {
    if (section == f.section && key == f.key) return f;
  }
  throw ConfigError(section + "." + key + ": unknown key");
}

void assign(RunConfig& cfg, const std::string& section, const std::string& key, const std::string& value) {
  find_field(section, key).set(cfg, section + "." + key, value);
}

[[noreturn]] void constraint(const std::string& key, const std::string& what) {
  throw ConfigError(key + ": " + what);
}

std::string canonical(const RunConfig& cfg, bool hashed_only) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (hashed_only && !f.hashed) continue;
    if (section != f.section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  }
  return out;
}

}  // namespace

void set_config_value(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "': expected section.key=value");
  const std::string name = trim(assignment.substr(0, eq));
  const auto dot = name.find('.');
  if (dot == std::string::npos) throw ConfigError("override '" + assignment + "': expected section.key=value");
  assign(cfg, name.substr(0, dot), name.substr(dot + 1), assignment.substr(eq + 1));
}

void validate_config(const RunConfig& cfg) {
  if (cfg.paths == 0) constraint("run.paths", "must be at least 1");
  if (cfg.workers == 0) constraint("run.workers", "must be at least 1");
  if (!(cfg.max_reject_fraction >= 0.0 && cfg.max_reject_fraction <= 1.0)) {
    constraint("run.max_reject_fraction", "must lie in [0, 1]");
  }
  if (cfg.dim != 1 && cfg.dim != 2) constraint("grid.dim", "must be 1 or 2");
  if (cfg.resolution < 4 || !is_power_of_two(cfg.resolution)) {
    constraint("grid.resolution", "must be a power of two >= 4");
  }
  if (!(cfg.horizon > 0.0)) constraint("time.horizon", "must be positive");
  if (!(cfg.dt >= 0.0)) constraint("time.dt", "must be >= 0 (0 selects the CFL step)");
  if (cfg.snapshots < 2) constraint("time.snapshots", "must be at least 2");
  if (cfg.family == "model" && !(cfg.m >= 1.0)) constraint("coefficients.m", "must be >= 1");
  if (cfg.family == "power" && !(cfg.phi_exponent >= 1.0)) constraint("coefficients.phi_exponent", "must be >= 1");
  if (cfg.family == "power" && !(cfg.sigma_exponent >= 0.0)) {
    constraint("coefficients.sigma_exponent", "must be >= 0");
  }
  if (!(cfg.smooth_eta >= 0.0 && cfg.smooth_eta < 1.0)) constraint("coefficients.smooth_eta", "must lie in [0, 1)");
  if (!(cfg.smooth_ref > 0.0)) constraint("coefficients.smooth_ref", "must be positive");
  if (!(cfg.rho0 > 0.0)) constraint("initial.rho0", "must be positive");
  if (!(cfg.rho0_spread >= 0.0 && cfg.rho0_spread < 1.0)) constraint("initial.spread", "must lie in [0, 1)");
  if (!(cfg.rho_min_est >= 0.0)) constraint("initial.rho_min_est", "must be >= 0");
  if (!(cfg.epsilon >= 0.0)) constraint("noise.epsilon", "must be >= 0");
  if (cfg.cutoff < 0) constraint("noise.cutoff", "must be >= 0");
  if (cfg.resolution < 4 * cfg.cutoff + 4) constraint("noise.cutoff", "needs grid.resolution >= 4 cutoff + 4");
  if (cfg.ou_cutoff > cfg.resolution / 2 - 1) constraint("noise.ou_cutoff", "must be <= resolution/2 - 1");
  if (cfg.epsilons.empty()) constraint("schedule.epsilons", "must not be empty");
  for (double t : cfg.thresholds) {
    if (!(t > 0.0)) constraint("norm.thresholds", "must be positive");
  }
  if (!(cfg.h >= 1.0)) constraint("moments.h", "must be >= 1");
  if (cfg.delta != 0.0 && !(cfg.delta > 0.0 && cfg.delta < cfg.rho0)) {
    constraint("moser.delta", "must lie in (0, initial.rho0), or 0 for rho0/2");
  }
  if (!(cfg.z_max > 0.0)) constraint("validate.z_max", "must be positive");
  if (cfg.samples < 100) constraint("validate.samples", "must be at least 100");
  try {
    validate_norm_spec(make_norm_spec(cfg), cfg.dim);
  } catch (const InvalidArgument& e) {
    constraint("norm.beta", e.what());
  }
  try {
    const ScalingSchedule s = make_schedule(cfg);
    const int n_v = cfg.ou_cutoff < 0 ? cfg.resolution / 2 - 1 : cfg.ou_cutoff;
    for (const auto& row : s.rows) {
      if (cfg.resolution < 4 * row.cutoff + 4) {
        constraint("schedule.epsilons", "cutoff " + std::to_string(row.cutoff) + " not resolved by the grid");
      }
      if (row.cutoff > n_v) constraint("noise.ou_cutoff", "below the schedule cutoff " + std::to_string(row.cutoff));
    }
  } catch (const RegimeViolation& e) {
    throw RegimeViolation(std::string("schedule.gamma: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    constraint("schedule.epsilons", e.what());
  }
  if (cfg.family == "power" || cfg.family == "model") {
    try {
      (void)make_coefficients(cfg);
    } catch (const InvalidArgument& e) {
      constraint("coefficients", e.what());
    }
  }
}

RunConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides) {
  RunConfig cfg;
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError(section + ": key outside a section");
    for (const auto& [key, value] : body) {
      if (!value.empty()) throw ConfigError(section + "." + key + ": nested keys are not supported");
      assign(cfg, section, key, value.data());
    }
  }
  for (const auto& o : overrides) set_config_value(cfg, o);
  validate_config(cfg);
  return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), overrides);
}

std::string serialize_config(const RunConfig& cfg) { return canonical(cfg, false); }

std::uint64_t config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canonical(cfg, true)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string config_hash_hex(const RunConfig& cfg) {
  char buf[17];
  const auto res = std::to_chars(buf, buf + 16, config_hash(cfg), 16);
  std::string s(buf, res.ptr);
  return std::string(16 - s.size(), '0') + s;
}

std::filesystem::path output_directory(const RunConfig& cfg) {
  if (!cfg.output.empty()) return cfg.output;
  if (const char* env = std::getenv(kOutputEnv); env != nullptr && *env != '\0') return env;
  return ".";
}

Coefficients make_coefficients(const RunConfig& cfg) {
  Coefficients c;
  if (cfg.family == "linear") {
    c = linear_case();
  } else if (cfg.family == "power") {
    Exponents e;
    const double a = cfg.phi_exponent;
    e.m = a;
    e.p = std::max(4.0, a * a);
    e.k = std::max(0.0, (a - 2.0) / 2.0);
    e.g = std::max(0.0, a - 2.0);
    c = power_family(a, cfg.sigma_exponent, e);
  } else {
    c = model_case(cfg.m);
  }
  if (cfg.smooth_eta > 0.0) c = smooth_near_zero(c, cfg.smooth_eta, cfg.smooth_ref).smoothed;
  return c;
}

SolverConfig make_solver_config(const RunConfig& cfg) {
  SolverConfig s;
  s.dim = cfg.dim;
  s.resolution = cfg.resolution;
  s.horizon = cfg.horizon;
  s.dt = cfg.dt;
  s.epsilon = cfg.epsilon;
  for (int i = 0; i < cfg.snapshots; ++i) s.snapshot_times.push_back(cfg.horizon * i / (cfg.snapshots - 1));
  s.nonneg_policy = cfg.policy == "reject" ? NonnegPolicy::reject_path : NonnegPolicy::clip_at_zero;
  s.rho0 = cfg.rho0;
  s.rho0_spread = cfg.rho0_spread;
  s.rho_min_est = cfg.rho_min_est;
  return s;
}

ExperimentConfig make_experiment_config(const RunConfig& cfg) {
  ExperimentConfig e;
  e.solver = make_solver_config(cfg);
  e.seed = cfg.seed;
  e.paths = cfg.paths;
  e.workers = cfg.workers;
  e.ou_cutoff = cfg.ou_cutoff;
  e.max_reject_fraction = cfg.max_reject_fraction;
  return e;
}

ScalingSchedule make_schedule(const RunConfig& cfg) { return make_schedule(cfg.epsilons, cfg.gamma, cfg.dim); }

NormSpec make_norm_spec(const RunConfig& cfg) {
  return NormSpec{cfg.beta, cfg.tau == "inf" ? Tau::infinity : Tau::two};
}

double moser_delta(const RunConfig& cfg) { return cfg.delta == 0.0 ? 0.5 * cfg.rho0 : cfg.delta; }

}  // namespace fluctuon
