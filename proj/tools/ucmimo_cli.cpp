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

// ucmimo simulate --config <path|preset> [overrides...]

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "ucmimo/config.hpp"
#include "ucmimo/simulation.hpp"

namespace {

int fail(const std::string& kind, const std::string& message, int code) {
  nlohmann::json err{{"error", kind}, {"message", message}};
  std::cerr << err.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cell-free / user-centric massive MIMO Monte Carlo simulator"};
  app.require_subcommand(1);

  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo campaign and write rates.csv, summary.json");
  std::string config_arg;
  std::optional<std::size_t> drops;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> strategies, association, csi, out_dir;
  std::optional<unsigned> threads;
  bool trace = false;
  bool quiet = false;
  simulate->add_option("--config", config_arg, "Config file (flat JSON) or preset name")->required();
  simulate->add_option("--drops", drops, "Number of random drops");
  simulate->add_option("--seed", seed, "Master seed");
  simulate->add_option("--strategies", strategies, "Comma list of uniform,srmax,mrmax");
  simulate->add_option("--association", association, "cf | topn:N | above_average");
  simulate->add_option("--csi", csi, "perfect | estimated | both");
  simulate->add_option("--out", out_dir, "Output directory");
  simulate->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  simulate->add_flag("--trace", trace, "Dump optimizer traces per drop");
  simulate->add_flag("--quiet", quiet, "Do not print the summary");

  auto* presets = app.add_subcommand("presets", "List built-in presets");
  auto* show = app.add_subcommand("show-config", "Print the resolved configuration");
  std::string show_arg;
  show->add_option("--config", show_arg, "Config file or preset name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("usage", e.what(), 2);
  }

  try {
    if (*presets) {
      for (const auto& name : ucmimo::preset_names()) std::cout << name << "\n";
      return 0;
    }
    if (*show) {
      std::cout << ucmimo::config_to_json(ucmimo::load_config(show_arg)) << "\n";
      return 0;
    }

    ucmimo::SimulationConfig config = ucmimo::load_config(config_arg);
    if (drops) config.n_drops = *drops;
    if (seed) config.seed = *seed;
    if (strategies) config.strategies = ucmimo::parse_strategies(*strategies);
    if (association) config.association = ucmimo::AssociationMode::parse(*association);
    if (csi) config.csi_modes = ucmimo::parse_csi_modes(*csi);
    if (out_dir) config.output_dir = *out_dir;
    if (threads) config.threads = *threads;
    if (trace) config.trace = true;
    config.validate();

    const auto report = ucmimo::run_campaign(config);
    ucmimo::emit_results(report, config.output_dir);

    if (!quiet) {
      std::cout << "drops: " << report.n_successful() << " ok, " << report.n_failed() << " failed\n";
      for (const auto& d : report.drops)
        if (!d.ok) std::cout << "  " << d.error << "\n";
      for (const auto& row : ucmimo::summarize(report)) {
        std::cout << ucmimo::to_string(row.csi) << " " << ucmimo::to_string(row.direction) << " "
                  << ucmimo::to_string(row.strategy) << ": mean sum-rate " << row.mean_sum_rate / 1e6
                  << " Mbit/s, mean min-rate " << row.mean_min_rate / 1e6 << " Mbit/s, 5% user "
                  << row.p5_user_rate / 1e6 << " Mbit/s\n";
      }
      std::cout << "results written to " << config.output_dir << "\n";
    }
    return report.n_successful() > 0 ? 0 : 3;
  } catch (const ucmimo::ParameterError& e) {
    return fail("parameter", e.what(), 2);
  } catch (const ucmimo::IoError& e) {
    return fail("io", e.what(), 4);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 5);
  }
}
