/*
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "ucmimo/simulation.hpp"

namespace ucmimo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void ensure_writable(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
  const fs::path probe = dir / ".write_probe";
  {
    std::ofstream out(probe, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("output directory '" + dir.string() + "' is not writable");
  }
  fs::remove(probe, ec);
}

json trace_json(const DropResult& drop) {
  json doc;
  doc["drop"] = drop.drop;
  doc["ok"] = drop.ok;
  doc["time_capped"] = drop.time_capped;
  doc["warnings"] = drop.diagnostics.warnings;
  json runs = json::array();
  for (const auto& e : drop.entries) {
    if (!e.optimized) continue;
    runs.push_back({{"strategy", to_string(e.strategy)},
                    {"csi", to_string(e.csi)},
                    {"direction", to_string(e.direction)},
                    {"objective_bps", e.trace.objective_per_iteration},
                    {"sweeps", e.trace.sweeps},
                    {"converged", e.trace.converged},
                    {"time_capped", e.trace.time_capped},
                    {"constraint_violation_w", e.constraint_violation_w}});
  }
  doc["runs"] = runs;
  return doc;
}

}  // namespace

std::string rates_csv(const CampaignReport& report) {
  std::string out = "drop,strategy,csi,direction,user,rate_bps\n";
  for (const auto& drop : report.drops) {
    if (!drop.ok) continue;
    for (const auto& e : drop.entries)
      for (Eigen::Index k = 0; k < e.rates_bps.size(); ++k) {
        out += std::to_string(drop.drop) + "," + to_string(e.strategy) + "," + to_string(e.csi) + "," +
               to_string(e.direction) + "," + std::to_string(k) + "," + format_double(e.rates_bps(k)) + "\n";
      }
  }
  return out;
}

void emit_results(const CampaignReport& report, const std::string& output_dir) {
  const fs::path dir(output_dir);
  ensure_writable(dir);
  if (report.config.trace) {
    ensure_writable(dir / "traces");
  }

  write_file(dir / "rates.csv", rates_csv(report));

  json summary;
  summary["n_drops"] = report.drops.size();
  summary["n_successful"] = report.n_successful();
  summary["n_failed"] = report.n_failed();
  json failures = json::array();
  std::size_t capped = 0;
  for (const auto& d : report.drops) {
    if (!d.ok) failures.push_back({{"drop", d.drop}, {"error", d.error}});
    if (d.time_capped) ++capped;
  }
  summary["failed_drops"] = failures;
  summary["time_capped_drops"] = capped;
  json rows = json::array();
  for (const auto& r : summarize(report)) {
    rows.push_back({{"strategy", to_string(r.strategy)},
                    {"csi", to_string(r.csi)},
                    {"direction", to_string(r.direction)},
                    {"n_drops", r.n_drops},
                    {"mean_sum_rate_bps", r.mean_sum_rate},
                    {"median_sum_rate_bps", r.median_sum_rate},
                    {"mean_min_rate_bps", r.mean_min_rate},
                    {"median_min_rate_bps", r.median_min_rate},
                    {"p5_user_rate_bps", r.p5_user_rate},
                    {"mean_user_rate_bps", r.mean_user_rate},
                    {"median_user_rate_bps", r.median_user_rate}});
  }
  summary["strategies"] = rows;
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  write_file(dir / "config.echo.json", config_to_json(report.config) + "\n");

  if (report.config.trace) {
    for (const auto& d : report.drops) {
      char name[32];
      std::snprintf(name, sizeof name, "drop_%04zu.json", d.drop);
      write_file(dir / "traces" / name, trace_json(d).dump(2) + "\n");
    }
  }
}

}  // namespace ucmimo
