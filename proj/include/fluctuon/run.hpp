#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "fluctuon/config.hpp"

namespace fluctuon {

struct RunResult {
  /// 0 when no row or path batch exceeded the rejection threshold, else 1.
  int exit_code = 0;
  std::vector<std::filesystem::path> files;
};

/// Executes cfg.command, writes its reports into output_directory(cfg) and
/// prints a summary table to `summary`.
RunResult run(const RunConfig& cfg, std::ostream& summary);

}  // namespace fluctuon
