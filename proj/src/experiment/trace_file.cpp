// Copyright 2026 The rankcollapse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "rankcollapse/experiment/trace_file.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace rankcollapse::experiment {

namespace {

const std::map<std::string, std::vector<std::string>>& column_table() {
  static const std::vector<std::string> grid{"iteration", "step", "srank", "td_error", "qstar_fit_error",
                                             "greedy_return", "penalty"};
  static const std::map<std::string, std::vector<std::string>> table{
      {"kernel-psd",
       {"k", "srank", "energy_at_prev_srank", "sigma_max", "sigma_min", "ratio_increases", "ratio_ties",
        "ratio_missed_decreases", "max_bound_excess"}},
      {"kernel-normal", {"l", "k", "srank", "psd", "symmetry_residual", "ratio_increases", "ratio_ties", "ratio_missed_decreases",
        "f_worst_excess"}},
      {"linear-flow", {"time", "step", "srank", "balancedness_eta", "balancedness_half_eta", "ode_max_rel_err"}},
      {"linear-fqi",
       {"iteration", "step", "srank", "td_error", "balancedness", "sigma_max", "sigma_ratio", "mean_q"}},
      {"grid-offline", grid},
      {"grid-online", grid},
      {"grid-penalty", grid},
      {"grid-ablations", grid},
  };
  return table;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& text) {
  if (text == "nan") return std::nan("");
  if (text == "inf") return HUGE_VAL;
  if (text == "-inf") return -HUGE_VAL;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) throw TraceFormatError("trace: bad number '" + text + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, ',')) out.push_back(item);
  return out;
}

constexpr const char* kMagic = "# rankcollapse-trace";

}  // namespace

const std::vector<std::string>& columns_for(const std::string& experiment) {
  const auto it = column_table().find(experiment);
  if (it == column_table().end()) throw TraceFormatError("trace: unknown experiment '" + experiment + "'");
  return it->second;
}

std::size_t TraceFile::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw TraceFormatError("trace: no column '" + name + "' in " + file_name());
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> TraceFile::values(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

double TraceFile::last(const std::string& name) const {
  if (rows.empty()) throw TraceFormatError("trace: " + file_name() + " has no rows");
  return rows.back()[column(name)];
}

std::string TraceFile::file_name() const {
  return experiment + "_" + arm + "_seed" + std::to_string(seed) + ".csv";
}

std::string format_trace(const TraceFile& trace) {
  std::ostringstream os;
  os << kMagic << "\n";
  os << "# schema_version: " << kTraceSchemaVersion << "\n";
  os << "# experiment: " << trace.experiment << "\n";
  os << "# arm: " << trace.arm << "\n";
  os << "# seed: " << trace.seed << "\n";
  os << "# diverged: " << (trace.diverged ? 1 : 0) << "\n";
  os << "# config_digest: " << trace.config.digest() << "\n";
  for (const auto& [k, v] : trace.config.values()) os << "# config: " << k << " = " << v << "\n";
  for (std::size_t c = 0; c < trace.columns.size(); ++c) os << (c ? "," : "") << trace.columns[c];
  os << "\n";
  for (const auto& row : trace.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_double(row[c]);
    os << "\n";
  }
  return os.str();
}

TraceFile parse_trace(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw TraceFormatError("trace: missing rankcollapse-trace header");
  TraceFile trace;
  std::map<std::string, std::string> fields;
  std::string config_text;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) != 0) break;
    const std::string body = line.substr(2);
    if (body.rfind("config: ", 0) == 0) {
      config_text += body.substr(8) + "\n";
      continue;
    }
    const auto colon = body.find(": ");
    if (colon == std::string::npos) throw TraceFormatError("trace: malformed header line '" + line + "'");
    fields[body.substr(0, colon)] = body.substr(colon + 2);
  }
  auto field = [&](const std::string& name) -> const std::string& {
    const auto it = fields.find(name);
    if (it == fields.end()) throw TraceFormatError("trace: header lacks '" + name + "'");
    return it->second;
  };
  if (field("schema_version") != std::to_string(kTraceSchemaVersion))
    throw TraceFormatError("trace: schema version " + field("schema_version") + " does not match expected " +
                           std::to_string(kTraceSchemaVersion));
  trace.experiment = field("experiment");
  trace.arm = field("arm");
  trace.seed = std::stoull(field("seed"));
  trace.diverged = field("diverged") == "1";
  trace.config = Config::parse(config_text);
  if (trace.config.digest() != field("config_digest"))
    throw TraceFormatError("trace: config digest does not match the embedded config");
  trace.columns = split_csv(line);
  if (trace.columns != columns_for(trace.experiment))
    throw TraceFormatError("trace: columns do not match the " + trace.experiment + " schema");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != trace.columns.size()) throw TraceFormatError("trace: row width differs from header");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c));
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

void write_trace(const TraceFile& trace, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto path = dir / trace.file_name();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << format_trace(trace);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

TraceFile read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_trace(buf.str());
  } catch (const TraceFormatError& e) {
    throw TraceFormatError(path.filename().string() + ": " + e.what());
  }
}

std::vector<TraceFile> read_trace_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw std::runtime_error(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv") paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());
  std::vector<TraceFile> out;
  for (const auto& p : paths) out.push_back(read_trace(p));
  return out;
}

}  // namespace rankcollapse::experiment
