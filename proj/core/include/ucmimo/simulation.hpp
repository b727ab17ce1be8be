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

/**
 * @file simulation.hpp
 * @brief Monte Carlo drops and campaigns, rate reports and their files.
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ucmimo/config.hpp"
#include "ucmimo/power_opt.hpp"
#include "ucmimo/types.hpp"

namespace ucmimo {

enum class Direction { kDownlink, kUplink };
std::string to_string(Direction direction);

/// Rates of one (strategy, CSI mode, direction) combination within a drop.
struct RateEntry {
  Strategy strategy = Strategy::kUniform;
  CsiMode csi = CsiMode::kEstimated;
  Direction direction = Direction::kDownlink;
  RVector rates_bps;               // one per user
  bool optimized = false;          // trace below is meaningful
  OptimizationTrace trace;
  double constraint_violation_w = 0.0;

  double sum_rate() const { return rates_bps.sum(); }
  double min_rate() const { return rates_bps.size() ? rates_bps.minCoeff() : 0.0; }
};

struct DropResult {
  std::size_t drop = 0;
  bool ok = false;
  std::string error;  // set when !ok
  bool time_capped = false;
  std::vector<RateEntry> entries;
  Diagnostics diagnostics;
};

struct CampaignReport {
  SimulationConfig config;
  std::vector<DropResult> drops;  // in drop-index order
  std::size_t n_failed() const;
  std::size_t n_successful() const { return drops.size() - n_failed(); }
};

/// Seeds are derived from (config.seed, drop_index); module errors come back
/// as ok = false with the drop index in the message.
DropResult run_drop(const SimulationConfig& config, std::size_t drop_index);

/// Runs config.n_drops drops on config.threads workers; results are stored by
/// drop index so the report does not depend on completion order.
CampaignReport run_campaign(const SimulationConfig& config);

struct SummaryRow {
  Strategy strategy = Strategy::kUniform;
  CsiMode csi = CsiMode::kEstimated;
  Direction direction = Direction::kDownlink;
  std::size_t n_drops = 0;
  double mean_sum_rate = 0.0;
  double median_sum_rate = 0.0;
  double mean_min_rate = 0.0;
  double median_min_rate = 0.0;
  double p5_user_rate = 0.0;
  double mean_user_rate = 0.0;
  double median_user_rate = 0.0;
};

/// Per-user rates of successful drops, pooled and sorted ascending.
std::vector<double> pooled_rates(const CampaignReport& report, Strategy strategy, CsiMode csi,
                                 Direction direction);
std::vector<SummaryRow> summarize(const CampaignReport& report);

/// Median with the midpoint rule for even sizes; input need not be sorted.
double median(std::vector<double> values);
/// Linear-interpolation percentile, q in [0, 100].
double percentile(std::vector<double> values, double q);

/// Writes rates.csv, summary.json, config.echo.json and (when config.trace)
/// traces/drop_XXXX.json. Fails with IoError before writing anything if the
/// directory cannot be created or written.
void emit_results(const CampaignReport& report, const std::string& output_dir);

/// rates.csv content only.
std::string rates_csv(const CampaignReport& report);

}  // namespace ucmimo
