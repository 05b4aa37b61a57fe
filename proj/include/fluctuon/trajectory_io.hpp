#pragma once

#include <filesystem>
#include <string>

#include "fluctuon/dk_solver.hpp"
#include "fluctuon/limit_ou.hpp"

namespace fluctuon {

/// Little-endian container:
///   magic "FLTR", u32 version = 1, u32 kind (0 real, 1 complex), u32 d,
///   u32 N, u64 count, f64 times[count], then count fields of N^d values
///   (f64, or (re, im) f64 pairs for kind 1) in grid storage order.
/// A JSON sidecar `<path>.json` holds the diagnostics and config hash.
void write_trajectory(const std::filesystem::path& path, const Trajectory& traj, const std::string& config_hash);
void write_spectral_trajectory(const std::filesystem::path& path, const SpectralTrajectory& traj,
                               const std::string& config_hash);

/// Reads times and snapshots (diagnostics are left default). Throws Error on
/// a malformed file or a kind mismatch.
Trajectory read_trajectory(const std::filesystem::path& path);
SpectralTrajectory read_spectral_trajectory(const std::filesystem::path& path);

}  // namespace fluctuon
