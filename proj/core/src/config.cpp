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

#include "ucmimo/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"

namespace ucmimo {

using nlohmann::json;

namespace {

std::string trimmed(const std::string& text) {
  const auto first = text.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  return text.substr(first, text.find_last_not_of(" \t") - first + 1);
}

struct Field {
  std::function<void(SimulationConfig&, const json&)> set;
  std::function<json(const SimulationConfig&)> get;
};

double as_double(const json& v, const std::string& key) {
  if (!v.is_number()) throw ParameterError("config: '" + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t as_count(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw ParameterError("config: '" + key + "' must be a non-negative integer");
}

int as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ParameterError("config: '" + key + "' must be an integer");
  return v.get<int>();
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw ParameterError("config: '" + key + "' must be a string");
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw ParameterError("config: '" + key + "' must be true or false");
  return v.get<bool>();
}

// Accepts ["a", "b"] or "a,b".
std::string joined_list(const json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (!v.is_array()) throw ParameterError("config: '" + key + "' must be a string or a list");
  std::string out;
  for (const auto& item : v) {
    if (!out.empty()) out += ",";
    out += as_string(item, key);
  }
  return out;
}

#define UCMIMO_DOUBLE(key, member) \
  {key, {[](SimulationConfig& c, const json& v) { c.member = as_double(v, key); }, [](const SimulationConfig& c) { return json(c.member); }}}
#define UCMIMO_INT(key, member) \
  {key, {[](SimulationConfig& c, const json& v) { c.member = as_int(v, key); }, [](const SimulationConfig& c) { return json(c.member); }}}
#define UCMIMO_COUNT(key, member, type)                                                                         \
  {key, {[](SimulationConfig& c, const json& v) { c.member = static_cast<type>(as_count(v, key)); }, \
         [](const SimulationConfig& c) { return json(c.member); }}}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      UCMIMO_DOUBLE("geometry.side_m", side_m),
      UCMIMO_COUNT("geometry.n_aps", n_aps, std::size_t),
      UCMIMO_COUNT("geometry.n_users", n_users, std::size_t),
      UCMIMO_INT("geometry.n_ap_antennas", arrays.n_ap_antennas),
      UCMIMO_INT("geometry.n_ms_antennas", arrays.n_ms_antennas),
      UCMIMO_INT("geometry.streams_per_user", arrays.streams_per_user),
      UCMIMO_DOUBLE("channel.carrier_mhz", path_loss.carrier_mhz),
      UCMIMO_DOUBLE("channel.h_ap_m", path_loss.h_ap_m),
      UCMIMO_DOUBLE("channel.h_ms_m", path_loss.h_ms_m),
      UCMIMO_DOUBLE("channel.d0_m", path_loss.d0_m),
      UCMIMO_DOUBLE("channel.d1_m", path_loss.d1_m),
      UCMIMO_DOUBLE("channel.sigma_sh_db", path_loss.sigma_sh_db),
      UCMIMO_DOUBLE("channel.delta", path_loss.delta),
      UCMIMO_DOUBLE("channel.d_decorr_m", path_loss.d_decorr_m),
      UCMIMO_DOUBLE("channel.distance_unit_m", path_loss.distance_unit_m),
      UCMIMO_DOUBLE("link.bandwidth_hz", bandwidth_hz),
      UCMIMO_DOUBLE("link.noise_psd_dbm_hz", noise_psd_dbm_hz),
      UCMIMO_DOUBLE("link.noise_figure_db", noise_figure_db),
      UCMIMO_INT("training.tau_p", tau_p),
      UCMIMO_DOUBLE("training.power_w", train_power_w),
      UCMIMO_DOUBLE("power.p_max_ap_w", p_max_ap_w),
      UCMIMO_DOUBLE("power.p_max_ms_w", p_max_ms_w),
      {"association",
       {[](SimulationConfig& c, const json& v) { c.association = AssociationMode::parse(as_string(v, "association")); },
        [](const SimulationConfig& c) { return json(c.association.to_string()); }}},
      UCMIMO_DOUBLE("solver.outer_tol", solver.outer_tol),
      UCMIMO_DOUBLE("solver.inner_tol", solver.inner_tol),
      UCMIMO_INT("solver.max_outer", solver.max_outer),
      UCMIMO_INT("solver.max_inner", solver.max_inner),
      UCMIMO_INT("solver.max_sweeps", solver.max_sweeps),
      UCMIMO_DOUBLE("solver.step_init", solver.step_init),
      UCMIMO_DOUBLE("solver.armijo_c", solver.armijo_c),
      UCMIMO_DOUBLE("solver.armijo_shrink", solver.armijo_shrink),
      {"solver.block_mode",
       {[](SimulationConfig& c, const json& v) { c.block_mode = parse_block_mode(as_string(v, "solver.block_mode")); },
        [](const SimulationConfig& c) { return json(to_string(c.block_mode)); }}},
      UCMIMO_COUNT("sim.n_drops", n_drops, std::size_t),
      UCMIMO_COUNT("sim.seed", seed, std::uint64_t),
      {"sim.strategies",
       {[](SimulationConfig& c, const json& v) { c.strategies = parse_strategies(joined_list(v, "sim.strategies")); },
        [](const SimulationConfig& c) {
          json out = json::array();
          for (auto s : c.strategies) out.push_back(to_string(s));
          return out;
        }}},
      {"sim.csi",
       {[](SimulationConfig& c, const json& v) {
          const std::string text = joined_list(v, "sim.csi");
          c.csi_modes.clear();
          std::stringstream ss(text);
          std::string item;
          while (std::getline(ss, item, ','))
            for (auto mode : parse_csi_modes(item))
              if (std::find(c.csi_modes.begin(), c.csi_modes.end(), mode) == c.csi_modes.end())
                c.csi_modes.push_back(mode);
        },
        [](const SimulationConfig& c) {
          json out = json::array();
          for (auto m : c.csi_modes) out.push_back(to_string(m));
          return out;
        }}},
      UCMIMO_COUNT("sim.threads", threads, unsigned),
      UCMIMO_DOUBLE("sim.drop_time_limit_s", drop_time_limit_s),
      {"sim.output_dir",
       {[](SimulationConfig& c, const json& v) { c.output_dir = as_string(v, "sim.output_dir"); },
        [](const SimulationConfig& c) { return json(c.output_dir); }}},
      {"sim.trace",
       {[](SimulationConfig& c, const json& v) { c.trace = as_bool(v, "sim.trace"); },
        [](const SimulationConfig& c) { return json(c.trace); }}},
  };
  return table;
}

#undef UCMIMO_DOUBLE
#undef UCMIMO_INT
#undef UCMIMO_COUNT

}  // namespace

Strategy parse_strategy(const std::string& raw) {
  const std::string text = trimmed(raw);
  if (text == "uniform") return Strategy::kUniform;
  if (text == "srmax") return Strategy::kSumRate;
  if (text == "mrmax") return Strategy::kMinRate;
  throw ParameterError("unknown strategy '" + text + "' (expected uniform, srmax or mrmax)");
}

std::string to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kUniform:
      return "uniform";
    case Strategy::kSumRate:
      return "srmax";
    case Strategy::kMinRate:
      return "mrmax";
  }
  return "uniform";
}

CsiMode parse_csi_mode(const std::string& raw) {
  const std::string text = trimmed(raw);
  if (text == "perfect") return CsiMode::kPerfect;
  if (text == "estimated") return CsiMode::kEstimated;
  throw ParameterError("unknown CSI mode '" + text + "' (expected perfect or estimated)");
}

std::string to_string(CsiMode mode) { return mode == CsiMode::kPerfect ? "perfect" : "estimated"; }

std::vector<CsiMode> parse_csi_modes(const std::string& text) {
  if (trimmed(text) == "both") return {CsiMode::kPerfect, CsiMode::kEstimated};
  return {parse_csi_mode(text)};
}

std::vector<Strategy> parse_strategies(const std::string& text) {
  std::vector<Strategy> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const Strategy s = parse_strategy(item);
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  }
  if (out.empty()) throw ParameterError("strategy list is empty");
  return out;
}

void SimulationConfig::validate() const {
  if (!(side_m > 0.0)) throw ParameterError("config: geometry.side_m must be positive");
  if (n_aps < 1 || n_users < 1) throw ParameterError("config: need at least one AP and one user");
  if (arrays.n_ap_antennas < 1 || arrays.n_ms_antennas < 1 || arrays.streams_per_user < 1)
    throw ParameterError("config: antenna and stream counts must be >= 1");
  if (arrays.n_ms_antennas % arrays.streams_per_user != 0)
    throw ParameterError("config: streams_per_user must divide n_ms_antennas");
  if (arrays.n_ap_antennas < arrays.n_ms_antennas)
    throw ParameterError("config: channel inversion needs n_ap_antennas >= n_ms_antennas");
  path_loss.validate();
  if (!(bandwidth_hz > 0.0)) throw ParameterError("config: link.bandwidth_hz must be positive");
  if (tau_p < arrays.n_ms_antennas) throw ParameterError("config: training.tau_p must be >= n_ms_antennas");
  if (!(train_power_w > 0.0)) throw ParameterError("config: training.power_w must be positive");
  if (!(p_max_ap_w > 0.0) || !(p_max_ms_w > 0.0)) throw ParameterError("config: power budgets must be positive");
  solver.validate();
  if (n_drops < 1) throw ParameterError("config: sim.n_drops must be >= 1");
  if (strategies.empty()) throw ParameterError("config: sim.strategies is empty");
  if (csi_modes.empty()) throw ParameterError("config: sim.csi is empty");
  if (threads < 1) throw ParameterError("config: sim.threads must be >= 1");
  if (!(drop_time_limit_s > 0.0)) throw ParameterError("config: sim.drop_time_limit_s must be positive");
}

void apply_config(SimulationConfig& config, const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParameterError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParameterError("config: top level must be an object");
  if (auto it = doc.find("preset"); it != doc.end()) config = preset_config(as_string(*it, "preset"));
  const auto& table = fields();
  for (const auto& [key, value] : doc.items()) {
    if (key == "preset") continue;
    auto field = table.find(key);
    if (field == table.end()) throw ParameterError("config: unknown key '" + key + "'");
    field->second.set(config, value);
  }
}

SimulationConfig parse_config(const std::string& json_text) {
  SimulationConfig config;
  apply_config(config, json_text);
  config.validate();
  return config;
}

SimulationConfig load_config(const std::string& path_or_preset) {
  if (is_preset(path_or_preset)) return preset_config(path_or_preset);
  std::ifstream in(path_or_preset);
  if (!in) throw IoError("cannot open config file '" + path_or_preset + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::vector<std::string> preset_names() { return {"desk", "high_density", "low_density"}; }

bool is_preset(const std::string& name) {
  const auto names = preset_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

SimulationConfig preset_config(const std::string& name) {
  SimulationConfig c;
  if (name == "high_density") {
    c.n_aps = 80;
    c.n_users = 15;
    c.association = AssociationMode::top_n(6);
    c.tau_p = 16;
    c.n_drops = 100;
  } else if (name == "low_density") {
    c.n_aps = 50;
    c.n_users = 5;
    c.association = AssociationMode::top_n(2);
    c.tau_p = 8;
    c.n_drops = 100;
  } else if (name == "desk") {
    c.n_aps = 20;
    c.n_users = 4;
    c.association = AssociationMode::top_n(2);
    c.tau_p = 8;
    c.n_drops = 20;
  } else {
    throw ParameterError("unknown preset '" + name + "'");
  }
  return c;
}

std::string config_to_json(const SimulationConfig& config) {
  json doc = json::object();
  for (const auto& [key, field] : fields()) doc[key] = field.get(config);
  return doc.dump(2);
}

}  // namespace ucmimo
