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
 * @file config.hpp
 * @brief Simulation configuration: a flat JSON object with dotted keys such
 * as "geometry.side_m" or "solver.outer_tol". Unknown keys are rejected.
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ucmimo/beamforming.hpp"
#include "ucmimo/geometry.hpp"
#include "ucmimo/power_opt.hpp"

namespace ucmimo {

enum class Strategy { kUniform, kSumRate, kMinRate };
enum class CsiMode { kPerfect, kEstimated };

Strategy parse_strategy(const std::string& text);
std::string to_string(Strategy strategy);
CsiMode parse_csi_mode(const std::string& text);
std::string to_string(CsiMode mode);

/// Parses "perfect", "estimated" or "both".
std::vector<CsiMode> parse_csi_modes(const std::string& text);
/// Parses a comma separated strategy list such as "uniform,srmax".
std::vector<Strategy> parse_strategies(const std::string& text);

struct SimulationConfig {
  // geometry
  double side_m = 1000.0;
  std::size_t n_aps = 20;
  std::size_t n_users = 4;
  ArrayConfig arrays{};
  PathLossParams path_loss = [] {
    PathLossParams p;
    p.distance_unit_m = 1000.0;
    return p;
  }();

  // link
  double bandwidth_hz = 20e6;
  double noise_psd_dbm_hz = -174.0;
  double noise_figure_db = 9.0;

  // training
  int tau_p = 8;
  double train_power_w = 0.1;

  // power
  double p_max_ap_w = 0.2;
  double p_max_ms_w = 0.1;

  AssociationMode association = AssociationMode::cell_free();
  SolverConfig solver{};
  BlockMode block_mode = BlockMode::kPerAp;

  // campaign
  std::size_t n_drops = 20;
  std::uint64_t seed = 1;
  std::vector<Strategy> strategies{Strategy::kUniform, Strategy::kSumRate, Strategy::kMinRate};
  std::vector<CsiMode> csi_modes{CsiMode::kEstimated};
  unsigned threads = 1;
  double drop_time_limit_s = 300.0;
  std::string output_dir = "results";
  bool trace = false;

  void validate() const;
};

/// Parses a JSON document; keys absent from it keep their defaults.
SimulationConfig parse_config(const std::string& json_text);
/// Applies the keys of a JSON document on top of an existing config.
void apply_config(SimulationConfig& config, const std::string& json_text);
/// Loads a file, or a built-in preset when `path_or_preset` names one.
SimulationConfig load_config(const std::string& path_or_preset);

/// Built-in presets: "high_density", "low_density" and "desk".
bool is_preset(const std::string& name);
SimulationConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

/// Fully resolved configuration as pretty-printed JSON (every key present).
std::string config_to_json(const SimulationConfig& config);

}  // namespace ucmimo
