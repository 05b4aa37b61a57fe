#include <iostream>
#include <sstream>
#include <type_traits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fluctuon/config.hpp"
#include "fluctuon/error.hpp"
#include "fluctuon/run.hpp"

namespace {

struct Flags {
  std::string config_file;
  std::vector<std::string> sets;
  bool print_config = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<unsigned> workers;
  std::optional<std::string> out;
  std::optional<int> dim, resolution, cutoff, snapshots;
  std::optional<double> horizon, dt, epsilon, gamma, beta, h, delta, rho0, m;
  std::optional<std::string> family, tau, epsilons, thresholds, policy;
  bool trajectories = false;
};

template <class T>
void push(std::vector<std::string>& o, const char* key, const std::optional<T>& v) {
  if (!v) return;
  if constexpr (std::is_same_v<T, std::string>) {
    o.push_back(std::string(key) + "=" + *v);
  } else {
    std::ostringstream s;
    s.precision(17);
    s << *v;
    o.push_back(std::string(key) + "=" + s.str());
  }
}

std::vector<std::string> overrides(const std::string& command, const Flags& f) {
  std::vector<std::string> o{"run.command=" + command};
  push(o, "run.seed", f.seed);
  push(o, "run.paths", f.paths);
  push(o, "run.workers", f.workers);
  push(o, "run.output", f.out);
  push(o, "grid.dim", f.dim);
  push(o, "grid.resolution", f.resolution);
  push(o, "time.horizon", f.horizon);
  push(o, "time.dt", f.dt);
  push(o, "time.snapshots", f.snapshots);
  push(o, "coefficients.family", f.family);
  push(o, "coefficients.m", f.m);
  push(o, "initial.rho0", f.rho0);
  push(o, "noise.epsilon", f.epsilon);
  push(o, "noise.cutoff", f.cutoff);
  push(o, "schedule.epsilons", f.epsilons);
  push(o, "schedule.gamma", f.gamma);
  push(o, "norm.beta", f.beta);
  push(o, "norm.tau", f.tau);
  push(o, "norm.thresholds", f.thresholds);
  push(o, "moments.h", f.h);
  push(o, "moser.delta", f.delta);
  push(o, "solver.policy", f.policy);
  if (f.trajectories) o.emplace_back("run.write_trajectories=true");
  o.insert(o.end(), f.sets.begin(), f.sets.end());
  return o;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("-c,--config", f.config_file, "INI config file")->check(CLI::ExistingFile);
  sub->add_option("--set", f.sets, "Override a key: section.key=value (repeatable)");
  sub->add_flag("--print-config", f.print_config, "Print the resolved canonical config and exit");
  sub->add_option("--seed", f.seed, "Master seed");
  sub->add_option("--paths", f.paths, "Monte-Carlo paths");
  sub->add_option("-j,--workers", f.workers, "Worker threads (results do not depend on it)");
  sub->add_option("-o,--out", f.out, "Output directory (default $FLUCTUON_OUT or .)");
  sub->add_option("--dim", f.dim, "Spatial dimension (1 or 2)");
  sub->add_option("-N,--resolution", f.resolution, "Grid points per axis (power of two)");
  sub->add_option("-T,--horizon", f.horizon, "Time horizon");
  sub->add_option("--dt", f.dt, "Time step (0: CFL)");
  sub->add_option("--snapshots", f.snapshots, "Uniform snapshot count");
  sub->add_option("--family", f.family, "Coefficient family: model | linear | power");
  sub->add_option("--m", f.m, "Exponent of the model family");
  sub->add_option("--rho0", f.rho0, "Initial constant");
  sub->add_option("--policy", f.policy, "Negativity policy: clip | reject");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fluctuon: Dean-Kawasaki fluctuation experiments"};
  app.require_subcommand(1);
  Flags f;

  auto* simulate = app.add_subcommand("simulate", "Simulate paths and report mass/negativity diagnostics");
  add_common(simulate, f);
  simulate->add_option("--epsilon", f.epsilon, "Noise strength");
  simulate->add_option("--cutoff", f.cutoff, "Noise cutoff M");
  simulate->add_flag("--trajectories", f.trajectories, "Write binary trajectories");

  auto* clt = app.add_subcommand("clt", "Coupling error between v^eps and the Langevin limit");
  add_common(clt, f);
  auto* moments = app.add_subcommand("moments", "L^h moments of the fluctuation field");
  add_common(moments, f);
  auto* moser = app.add_subcommand("moser", "Lower-tail probability of the density");
  add_common(moser, f);
  for (auto* sub : {clt, moments, moser}) {
    sub->add_option("--eps", f.epsilons, "Schedule epsilons, comma separated");
    sub->add_option("--gamma", f.gamma, "Cutoff exponent: M = floor(eps^-gamma)");
  }
  clt->add_option("--beta", f.beta, "Sobolev index of H^-beta");
  clt->add_option("--tau", f.tau, "Time exponent: 2 | inf");
  clt->add_option("--thresholds", f.thresholds, "Probability thresholds, comma separated");
  moments->add_option("--order", f.h, "Moment order h");
  moser->add_option("--delta", f.delta, "Depth below rho0 (0: rho0/2)");

  auto* validate = app.add_subcommand("validate", "Check the coefficient assumptions");
  add_common(validate, f);

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const auto o = overrides(command, f);
    const fluctuon::RunConfig cfg =
        f.config_file.empty() ? fluctuon::parse_config_text("", o) : fluctuon::parse_config_file(f.config_file, o);
    if (f.print_config) {
      std::cout << fluctuon::serialize_config(cfg);
      return 0;
    }
    return fluctuon::run(cfg, std::cout).exit_code;
  } catch (const fluctuon::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const fluctuon::InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
