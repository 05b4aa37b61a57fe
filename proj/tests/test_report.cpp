#include <doctest.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fluctuon/config.hpp"
#include "fluctuon/error.hpp"
#include "fluctuon/report.hpp"
#include "fluctuon/run.hpp"
#include "fluctuon/trajectory_io.hpp"
#include "test_util.hpp"

using namespace fluctuon;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> small_run(const std::filesystem::path& dir, const std::string& command) {
  return {"run.command=" + command, "run.output=" + dir.string(), "run.paths=3", "grid.resolution=32",
          "time.horizon=0.01",      "time.snapshots=6"};
}

}  // namespace

TEST_CASE("CSV schema: parse, refuse other versions, refuse mixing hashes") {
  const std::string text =
      "# fluctuon-csv v1\n# kind clt\n# config_hash 00000000000000ab\nepsilon,M,mean_sq_err\n0.01,1,nan\n0.001,2,0.5\n";
  const CsvTable t = parse_csv(text);
  CHECK(t.kind == "clt");
  CHECK(t.config_hash == "00000000000000ab");
  CHECK(t.rows.size() == 2);
  CHECK(std::isnan(t.rows[0][t.column("mean_sq_err")]));
  CHECK(t.rows[1][t.column("M")] == 2.0);
  CHECK_THROWS_AS((void)t.column("nope"), InvalidArgument);
  CHECK_THROWS_AS(parse_csv("# fluctuon-csv v2\n# config_hash 1\na\n1\n"), ReportMismatch);
  CHECK_THROWS_AS(parse_csv("epsilon\n1\n"), ReportMismatch);

  CsvTable other = t;
  other.config_hash = "00000000000000ac";
  CHECK_NOTHROW(require_compatible({t, t}));
  CHECK_THROWS_AS(require_compatible({t, other}), ReportMismatch);
  CHECK(report_stem("clt", 7, "abc") == "clt_seed7_abc");
}

TEST_CASE("run: validate on model_case(2) is all-pass") {
  const auto dir = test::tmp_dir("validate");
  const RunConfig cfg = parse_config_text("", {"run.command=validate", "run.output=" + dir.string()});
  std::ostringstream out;
  const RunResult r = run(cfg, out);
  CHECK(r.exit_code == 0);
  CHECK(out.str().find("all pass") != std::string::npos);
  REQUIRE(r.files.size() == 1);
  const auto j = nlohmann::json::parse(slurp(r.files[0]));
  CHECK(j["all_pass"] == true);
  CHECK(j["config_hash"] == config_hash_hex(cfg));
}

TEST_CASE("run: simulate with zero noise gives constant trajectories") {
  const auto dir = test::tmp_dir("simulate");
  auto o = small_run(dir, "simulate");
  o.push_back("noise.epsilon=0");
  o.push_back("run.write_trajectories=true");
  const RunConfig cfg = parse_config_text("", o);
  std::ostringstream out;
  const RunResult r = run(cfg, out);
  CHECK(r.exit_code == 0);
  int bins = 0;
  for (const auto& f : r.files) {
    if (f.extension() != ".bin") continue;
    ++bins;
    const Trajectory t = read_trajectory(f);
    CHECK(t.snapshots.size() == 6);
    for (const auto& s : t.snapshots) CHECK(s.min() == s.max());
    const auto side = nlohmann::json::parse(slurp(f.string() + ".json"));
    CHECK(side["config_hash"] == config_hash_hex(cfg));
  }
  CHECK(bins == 3);
}

TEST_CASE("run: clt with a 3-epsilon schedule writes a 3-row CSV") {
  const auto dir = test::tmp_dir("clt");
  const RunConfig cfg = parse_config_text("", small_run(dir, "clt"));
  std::ostringstream out;
  const RunResult r = run(cfg, out);
  CHECK(r.exit_code == 0);
  std::filesystem::path csv;
  for (const auto& f : r.files) {
    if (f.extension() == ".csv") csv = f;
  }
  REQUIRE_FALSE(csv.empty());
  CHECK(csv.filename().string() == report_stem("clt", cfg.seed, config_hash_hex(cfg)) + ".csv");
  const CsvTable t = read_csv(csv);
  CHECK(t.kind == "clt");
  CHECK(t.rows.size() == 3);
  CHECK(t.config_hash == config_hash_hex(cfg));
  for (const char* col : {"epsilon", "M", "F1", "F3", "mean_sq_err", "ci_lo", "ci_hi", "bound", "ratio",
                          "p_gt_0.5", "p_gt_1"}) {
    CHECK_NOTHROW((void)t.column(col));
  }
  CHECK(slurp(csv).rfind("# fluctuon-csv v1\n", 0) == 0);

  // Same config, other worker count: identical bytes.
  auto o = small_run(test::tmp_dir("clt_workers"), "clt");
  o.push_back("run.workers=2");
  const RunResult again = run(parse_config_text("", o), out);
  for (const auto& f : again.files) {
    if (f.extension() == ".csv") CHECK(slurp(f) == slurp(csv));
  }
}

TEST_CASE("run: moments and moser reports") {
  const auto dir = test::tmp_dir("moments");
  std::ostringstream sink;
  const RunResult m = run(parse_config_text("", small_run(dir, "moments")), sink);
  CHECK(m.exit_code == 0);
  auto o = small_run(dir, "moser");
  o.push_back("coefficients.m=1");
  o.push_back("coefficients.smooth_eta=0.1");
  o.push_back("initial.rho0=0.5");
  const RunResult s = run(parse_config_text("", o), sink);
  CHECK(s.exit_code == 0);
  for (const auto& f : s.files) {
    if (f.extension() == ".csv") CHECK(read_csv(f).kind == "moser");
  }
}

TEST_CASE("trajectory container round-trip") {
  const auto dir = test::tmp_dir("traj");
  Trajectory t;
  t.times = {0.0, 0.5};
  GridField a(2, 4), b(2, 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = 0.1 * i;
    b[i] = -1.0 / (1.0 + i);
  }
  t.snapshots = {a, b};
  write_trajectory(dir / "t.bin", t, "h");
  const Trajectory back = read_trajectory(dir / "t.bin");
  CHECK(back.times == t.times);
  CHECK(back.snapshots == t.snapshots);
  CHECK(std::filesystem::file_size(dir / "t.bin") == 4 + 4 * 4 + 8 + 2 * 8 + 2 * 16 * 8);

  SpectralTrajectory s;
  s.times = {0.25};
  SpectralField f(1, 8);
  f[1] = Complex(1.0, -2.0);
  s.snapshots = {f};
  write_spectral_trajectory(dir / "s.bin", s, "h");
  CHECK(read_spectral_trajectory(dir / "s.bin").snapshots == s.snapshots);
  CHECK_THROWS_AS(read_trajectory(dir / "s.bin"), Error);
  CHECK_THROWS_AS(read_trajectory(dir / "missing.bin"), Error);
}
