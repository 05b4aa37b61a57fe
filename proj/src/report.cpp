#include "fluctuon/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fluctuon/error.hpp"
#include "fluctuon/format.hpp"

namespace fluctuon {

namespace {

using nlohmann::json;


// JSON has no NaN / inf; they become null.
json jnum(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string header(const std::string& kind, const std::string& hash, const std::vector<std::string>& columns) {
  std::string out = std::string("# ") + kCsvSchema + "\n# kind " + kind + "\n# config_hash " + hash + "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  return out + "\n";
}

void append_row(std::string& out, const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + format_real(values[i]);
  out += "\n";
}

std::vector<std::string> base_columns() {
  return {"epsilon", "M", "F1", "F3", "mean_sq_err", "ci_lo", "ci_hi", "bound", "ratio"};
}

std::vector<double> base_values(const ScheduleRow& s, const MeanEstimate& m, double bound, double ratio) {
  return {s.epsilon, static_cast<double>(s.cutoff), s.f1, s.f3, m.mean, m.ci.lo, m.ci.hi, bound, ratio};
}

void append_status(std::vector<double>& v, const RowStatus& st) {
  v.push_back(static_cast<double>(st.paths));
  v.push_back(static_cast<double>(st.rejected));
  v.push_back(static_cast<double>(st.negativity_events));
  v.push_back(st.aborted ? 1.0 : 0.0);
}

const std::vector<std::string> kStatusColumns = {"paths", "rejected", "negativity_events", "aborted"};

json schedule_json(const ScheduleRow& s) {
  return {{"epsilon", s.epsilon}, {"M", s.cutoff},          {"F1", s.f1},
          {"F2", s.f2},           {"F3", s.f3},             {"regime", s.regime},
          {"envelope", s.envelope}};
}

json status_json(const RowStatus& st) {
  return {{"paths", st.paths},
          {"rejected", st.rejected},
          {"negativity_events", st.negativity_events},
          {"aborted", st.aborted},
          {"diagnostic", st.diagnostic}};
}

json estimate_json(const MeanEstimate& m) {
  return {{"mean", jnum(m.mean)}, {"ci_lo", jnum(m.ci.lo)}, {"ci_hi", jnum(m.ci.hi)}, {"std_error", jnum(m.std_error)}};
}

json envelope(const std::string& kind, const std::string& hash, const std::string& config_text) {
  return {{"schema", kCsvSchema}, {"kind", kind}, {"config_hash", hash}, {"config", config_text}};
}

}  // namespace

std::string clt_csv(const CltReport& rep, const std::string& hash) {
  auto cols = base_columns();
  for (double a : rep.thresholds) cols.push_back("p_gt_" + format_real(a));
  cols.insert(cols.end(), kStatusColumns.begin(), kStatusColumns.end());
  std::string out = header("clt", hash, cols);
  for (const auto& r : rep.rows) {
    auto v = base_values(r.schedule, r.mean_sq_err, r.bound, r.ratio);
    v.insert(v.end(), r.p_gt.begin(), r.p_gt.end());
    append_status(v, r.status);
    append_row(out, v);
  }
  return out;
}

std::string moments_csv(const MomentReport& rep, const std::string& hash) {
  auto cols = base_columns();
  cols.push_back("degenerate");
  cols.insert(cols.end(), kStatusColumns.begin(), kStatusColumns.end());
  std::string out = header("moments", hash, cols);
  for (const auto& r : rep.rows) {
    auto v = base_values(r.schedule, r.moment, r.scale, r.ratio);
    v.push_back(r.degenerate ? 1.0 : 0.0);
    append_status(v, r.status);
    append_row(out, v);
  }
  return out;
}

std::string moser_csv(const MoserReport& rep, const std::string& hash) {
  auto cols = base_columns();
  cols.push_back("hits");
  cols.push_back("log_R");
  cols.insert(cols.end(), kStatusColumns.begin(), kStatusColumns.end());
  std::string out = header("moser", hash, cols);
  for (const auto& r : rep.rows) {
    const MeanEstimate p{r.probability, r.ci, std::numeric_limits<double>::quiet_NaN()};
    auto v = base_values(r.schedule, p, r.bound, r.bound > 0.0 ? r.probability / r.bound : std::nan(""));
    v.push_back(static_cast<double>(r.hits));
    v.push_back(r.log_r);
    append_status(v, r.status);
    append_row(out, v);
  }
  return out;
}

std::string clt_json(const CltReport& rep, const std::string& hash, const std::string& config_text) {
  json j = envelope("clt", hash, config_text);
  j["coefficients"] = rep.coefficients;
  j["seed"] = rep.seed;
  j["dim"] = rep.dim;
  j["resolution"] = rep.resolution;
  j["horizon"] = rep.horizon;
  j["dt"] = rep.dt;
  j["ou_cutoff"] = rep.ou_cutoff;
  j["norm"] = {{"beta", rep.norm.beta}, {"tau", rep.norm.tau == Tau::two ? "2" : "inf"}};
  j["gamma"] = rep.gamma;
  j["thresholds"] = rep.thresholds;
  j["fitted_constant"] = jnum(rep.fitted_constant);
  j["snapshot_times"] = rep.snapshot_times;
  j["rows"] = json::array();
  for (const auto& r : rep.rows) {
    json p = json::array();
    for (double x : r.p_gt) p.push_back(jnum(x));
    j["rows"].push_back({{"schedule", schedule_json(r.schedule)},
                         {"status", status_json(r.status)},
                         {"mean_sq_err", estimate_json(r.mean_sq_err)},
                         {"bound_main", jnum(r.bound_terms.main)},
                         {"bound_tail", jnum(r.bound_terms.tail)},
                         {"bound", jnum(r.bound)},
                         {"ratio", jnum(r.ratio)},
                         {"p_gt", p}});
  }
  return j.dump(2) + "\n";
}

std::string moments_json(const MomentReport& rep, const std::string& hash, const std::string& config_text) {
  json j = envelope("moments", hash, config_text);
  j["coefficients"] = rep.coefficients;
  j["seed"] = rep.seed;
  j["dim"] = rep.dim;
  j["resolution"] = rep.resolution;
  j["horizon"] = rep.horizon;
  j["dt"] = rep.dt;
  j["h"] = rep.h;
  j["gamma"] = rep.gamma;
  j["ratio_spread"] = jnum(rep.ratio_spread());
  j["rows"] = json::array();
  for (const auto& r : rep.rows) {
    j["rows"].push_back({{"schedule", schedule_json(r.schedule)},
                         {"status", status_json(r.status)},
                         {"moment", estimate_json(r.moment)},
                         {"scale", jnum(r.scale)},
                         {"ratio", jnum(r.ratio)},
                         {"degenerate", r.degenerate}});
  }
  return j.dump(2) + "\n";
}

std::string moser_json(const MoserReport& rep, const std::string& hash, const std::string& config_text) {
  json j = envelope("moser", hash, config_text);
  j["coefficients"] = rep.coefficients;
  j["seed"] = rep.seed;
  j["dim"] = rep.dim;
  j["resolution"] = rep.resolution;
  j["horizon"] = rep.horizon;
  j["dt"] = rep.dt;
  j["low"] = rep.low;
  j["delta"] = rep.delta;
  j["inf_dphi"] = rep.inf_dphi;
  j["c_star"] = rep.c_star;
  j["log_c0"] = jnum(rep.log_c0);
  j["degenerate"] = rep.degenerate;
  j["rows"] = json::array();
  for (const auto& r : rep.rows) {
    j["rows"].push_back({{"schedule", schedule_json(r.schedule)},
                         {"status", status_json(r.status)},
                         {"hits", r.hits},
                         {"probability", jnum(r.probability)},
                         {"ci_lo", r.ci.lo},
                         {"ci_hi", r.ci.hi},
                         {"log_R", jnum(r.log_r)},
                         {"zeta", r.series.zeta},
                         {"series", jnum(r.series.value)},
                         {"series_terms", r.series.terms},
                         {"partial_sums", r.series.partial_sums},
                         {"bound", jnum(r.bound)}});
  }
  return j.dump(2) + "\n";
}

std::string validation_json(const ValidationReport& rep, const std::string& hash, const std::string& config_text) {
  json j = envelope("validate", hash, config_text);
  j["coefficients"] = rep.coefficients;
  j["all_pass"] = rep.all_pass();
  j["checks"] = json::array();
  for (const auto& c : rep.checks) {
    j["checks"].push_back({{"id", c.id},
                           {"status", to_string(c.status)},
                           {"constant", jnum(c.constant)},
                           {"witness", jnum(c.witness)},
                           {"description", c.description},
                           {"note", c.note}});
  }
  return j.dump(2) + "\n";
}

std::string report_stem(const std::string& kind, std::uint64_t seed, const std::string& hash) {
  return kind + "_seed" + std::to_string(seed) + "_" + hash;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.close();
  if (!out) throw Error("cannot write " + path.string());
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw InvalidArgument("no column '" + name + "'");
}

CsvTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != std::string("# ") + kCsvSchema) {
    throw ReportMismatch("unsupported CSV schema line '" + line + "' (expected '# " + kCsvSchema + "')");
  }
  CsvTable t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# kind ", 0) == 0) {
      t.kind = line.substr(7);
    } else if (line.rfind("# config_hash ", 0) == 0) {
      t.config_hash = line.substr(14);
    } else if (line[0] == '#') {
      continue;
    } else if (t.columns.empty()) {
      std::stringstream ss(line);
      for (std::string c; std::getline(ss, c, ',');) t.columns.push_back(c);
    } else {
      std::vector<double> row;
      std::stringstream ss(line);
      for (std::string c; std::getline(ss, c, ',');) {
        if (c == "nan") {
          row.push_back(std::numeric_limits<double>::quiet_NaN());
        } else if (c == "inf" || c == "-inf") {
          row.push_back(c[0] == '-' ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity());
        } else {
          double x = 0.0;
          const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), x);
          if (ec != std::errc() || ptr != c.data() + c.size()) throw Error("malformed CSV value '" + c + "'");
          row.push_back(x);
        }
      }
      if (row.size() != t.columns.size()) throw Error("CSV row width differs from the header");
      t.rows.push_back(std::move(row));
    }
  }
  if (t.config_hash.empty()) throw ReportMismatch("CSV carries no config hash");
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

void require_compatible(const std::vector<CsvTable>& tables) {
  for (const auto& t : tables) {
    if (t.config_hash != tables.front().config_hash) {
      throw ReportMismatch("config hash " + t.config_hash + " differs from " + tables.front().config_hash);
    }
    if (t.kind != tables.front().kind) throw ReportMismatch("report kind " + t.kind + " differs from " + tables.front().kind);
  }
}

}  // namespace fluctuon
