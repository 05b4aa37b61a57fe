#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fluctuon/coefficients.hpp"
#include "fluctuon/experiments.hpp"

namespace fluctuon {

inline constexpr const char* kCsvSchema = "fluctuon-csv v1";

/// CSV text: `# fluctuon-csv v1`, `# kind <kind>`, `# config_hash <hex>`, a
/// column header, one row per epsilon (descending). Numbers use the shortest
/// round-trip representation, so equal reports give equal bytes.
std::string clt_csv(const CltReport& rep, const std::string& hash);
std::string moments_csv(const MomentReport& rep, const std::string& hash);
std::string moser_csv(const MoserReport& rep, const std::string& hash);

/// JSON documents with the full metadata, the canonical config text and the rows.
std::string clt_json(const CltReport& rep, const std::string& hash, const std::string& config_text);
std::string moments_json(const MomentReport& rep, const std::string& hash, const std::string& config_text);
std::string moser_json(const MoserReport& rep, const std::string& hash, const std::string& config_text);
std::string validation_json(const ValidationReport& rep, const std::string& hash, const std::string& config_text);

/// `<kind>_seed<seed>_<hash>`.
std::string report_stem(const std::string& kind, std::uint64_t seed, const std::string& hash);

void write_text_file(const std::filesystem::path& path, const std::string& text);

struct CsvTable {
  std::string kind;
  std::string config_hash;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  /// Throws InvalidArgument for an unknown column.
  [[nodiscard]] std::size_t column(const std::string& name) const;
};

/// Throws ReportMismatch on a missing or different schema line, Error on
/// malformed content.
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

/// Throws ReportMismatch unless all tables share kind and config hash.
void require_compatible(const std::vector<CsvTable>& tables);

}  // namespace fluctuon
