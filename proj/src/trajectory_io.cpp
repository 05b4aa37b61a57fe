#include "fluctuon/trajectory_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "fluctuon/error.hpp"
#include "fluctuon/report.hpp"

namespace fluctuon {

namespace {

constexpr char kMagic[4] = {'F', 'L', 'T', 'R'};
constexpr std::uint32_t kVersion = 1;

template <class T>
T to_le(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error("cannot write " + path.string());
  }
  template <class T>
  void put(T v) {
    v = to_le(v);
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void raw(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }
  void finish(const std::filesystem::path& path) {
    out_.close();
    if (!out_) throw Error("write failed for " + path.string());
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw Error("cannot read " + path.string());
  }
  template <class T>
  T get() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in_) throw Error("truncated trajectory file " + path_.string());
    return to_le(v);
  }
  void raw(char* p, std::size_t n) {
    in_.read(p, static_cast<std::streamsize>(n));
    if (!in_) throw Error("bad trajectory header in " + path_.string());
  }

 private:
  std::ifstream in_;
  std::filesystem::path path_;
};

void write_header(Writer& w, std::uint32_t kind, int dim, int resolution, const std::vector<double>& times) {
  w.raw(kMagic, 4);
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint32_t>(kind);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(dim));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(resolution));
  w.put<std::uint64_t>(times.size());
  for (double t : times) w.put(t);
}

struct Header {
  int dim = 1;
  int resolution = 0;
  std::vector<double> times;
};

Header read_header(Reader& r, std::uint32_t expected_kind) {
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw Error("not a fluctuon trajectory file");
  if (r.get<std::uint32_t>() != kVersion) throw Error("unsupported trajectory version");
  if (r.get<std::uint32_t>() != expected_kind) throw Error("trajectory kind mismatch (real vs spectral)");
  Header h;
  h.dim = static_cast<int>(r.get<std::uint32_t>());
  h.resolution = static_cast<int>(r.get<std::uint32_t>());
  if ((h.dim != 1 && h.dim != 2) || h.resolution < 1) throw Error("bad trajectory grid");
  const auto count = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) h.times.push_back(r.get<double>());
  return h;
}

}  // namespace

void write_trajectory(const std::filesystem::path& path, const Trajectory& traj, const std::string& config_hash) {
  const int dim = traj.snapshots.empty() ? 1 : traj.snapshots.front().dim();
  const int n = traj.snapshots.empty() ? 0 : traj.snapshots.front().resolution();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  Writer w(path);
  write_header(w, 0, dim, n, traj.times);
  for (const auto& f : traj.snapshots) {
    for (double x : f.values()) w.put(x);
  }
  w.finish(path);

  const auto& d = traj.diagnostics;
  nlohmann::json j = {{"config_hash", config_hash},
                      {"seed", traj.seed},
                      {"path", traj.path},
                      {"dt", d.dt},
                      {"steps", d.steps},
                      {"mass0", d.mass0},
                      {"max_rel_mass_drift", d.max_rel_mass_drift},
                      {"min_rho", d.min_rho},
                      {"negativity_events", d.negativity_events},
                      {"rejected", d.rejected},
                      {"diagnostic", d.diagnostic}};
  write_text_file(path.string() + ".json", j.dump(2) + "\n");
}

void write_spectral_trajectory(const std::filesystem::path& path, const SpectralTrajectory& traj,
                               const std::string& config_hash) {
  const int dim = traj.snapshots.empty() ? 1 : traj.snapshots.front().dim();
  const int n = traj.snapshots.empty() ? 0 : traj.snapshots.front().resolution();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  Writer w(path);
  write_header(w, 1, dim, n, traj.times);
  for (const auto& f : traj.snapshots) {
    for (const Complex& z : f.coefficients()) {
      w.put(z.real());
      w.put(z.imag());
    }
  }
  w.finish(path);
  nlohmann::json j = {{"config_hash", config_hash}, {"dt", traj.dt}};
  write_text_file(path.string() + ".json", j.dump(2) + "\n");
}

Trajectory read_trajectory(const std::filesystem::path& path) {
  Reader r(path);
  Header h = read_header(r, 0);
  Trajectory t;
  t.times = h.times;
  for (std::size_t s = 0; s < h.times.size(); ++s) {
    GridField f(h.dim, h.resolution);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = r.get<double>();
    t.snapshots.push_back(std::move(f));
  }
  return t;
}

SpectralTrajectory read_spectral_trajectory(const std::filesystem::path& path) {
  Reader r(path);
  Header h = read_header(r, 1);
  SpectralTrajectory t;
  t.times = h.times;
  for (std::size_t s = 0; s < h.times.size(); ++s) {
    SpectralField f(h.dim, h.resolution);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double re = r.get<double>();
      const double im = r.get<double>();
      f[i] = Complex(re, im);
    }
    t.snapshots.push_back(std::move(f));
  }
  return t;
}

}  // namespace fluctuon
