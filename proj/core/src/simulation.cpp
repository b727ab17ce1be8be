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

#include "ucmimo/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>

#include "ucmimo/beamforming.hpp"
#include "ucmimo/geometry.hpp"
#include "ucmimo/random.hpp"
#include "ucmimo/rates.hpp"
#include "ucmimo/training.hpp"

namespace ucmimo {

namespace {

enum SeedTag : std::uint64_t {
  kPlacement = 1,
  kShadowing = 2,
  kFading = 3,
  kPilots = 4,
  kTrainingNoise = 5,
};

constexpr double kFeasibilityTolerance = 1e-9;

void run_csi_mode(const SimulationConfig& config, const NetworkTopology& topology,
                  const ChannelSet& drawn, const NoiseModel& noise, CsiMode csi,
                  std::uint64_t drop_seed,
                  std::chrono::steady_clock::time_point deadline, DropResult& out) {
  ChannelSet channels = drawn;
  if (csi == CsiMode::kEstimated) {
    PilotOptions options;
    options.train_power_w = config.train_power_w;
    const PilotBook book = generate_pilots(config.n_users, config.arrays.n_ms_antennas, config.tau_p,
                                           derive_seed(drop_seed, {kPilots}), options);
    estimate_channels(channels, book, noise, derive_seed(drop_seed, {kTrainingNoise}));
  } else {
    assume_perfect_csi(channels);
  }

  Diagnostics& diag = out.diagnostics;
  const AssociationMap association = build_association(channels.estimated_channels, config.association);
  for (std::size_t k = 0; k < association.n_users(); ++k)
    if (association.is_orphan(k)) diag.warn(to_string(csi) + ": user " + std::to_string(k) + " is served by no AP");
  const auto spreading = spreading_matrices(topology);
  const PrecoderSet precoders = build_precoders(channels.estimated_channels, association, spreading, &diag);
  const CombinerSet combiners = build_combiners(channels.estimated_channels, association, spreading, &diag);
  const DlEffectiveChannels dl =
      dl_effective_channels(channels.true_channels, precoders, association, spreading, config.bandwidth_hz);
  const UlEffectiveChannels ul = ul_effective_channels(channels.true_channels, combiners, association, spreading,
                                                       noise.sigma2_w, config.bandwidth_hz);

  const RVector p_ap = RVector::Constant(static_cast<Eigen::Index>(config.n_aps), config.p_max_ap_w);
  const RVector p_ms = RVector::Constant(static_cast<Eigen::Index>(config.n_users), config.p_max_ms_w);
  const RMatrix dl_uniform = uniform_dl(association, precoders, p_ap, &diag);
  const RVector ul_uniform = uniform_ul(config.n_users, config.arrays.n_ms_antennas, p_ms);

  SolverConfig solver = config.solver;
  solver.deadline = deadline;

  for (Strategy strategy : config.strategies) {
    RateEntry down{strategy, csi, Direction::kDownlink, {}, false, {}, 0.0};
    RateEntry up{strategy, csi, Direction::kUplink, {}, false, {}, 0.0};
    RMatrix eta_dl;
    RVector eta_ul;
    switch (strategy) {
      case Strategy::kUniform:
        eta_dl = dl_uniform;
        eta_ul = ul_uniform;
        break;
      case Strategy::kSumRate:
      case Strategy::kMinRate: {
        const bool sum = strategy == Strategy::kSumRate;
        OptimizationResult rd = sum ? slm_sum_rate_dl(dl, noise.sigma2_z, p_ap, solver, config.block_mode, &dl_uniform)
                                    : slm_min_rate_dl(dl, noise.sigma2_z, p_ap, solver, config.block_mode, &dl_uniform);
        OptimizationResult ru = sum ? slm_sum_rate_ul(ul, p_ms, solver, &ul_uniform)
                                    : slm_min_rate_ul(ul, p_ms, solver, &ul_uniform);
        eta_dl = std::move(rd.allocation.dl);
        eta_ul = std::move(ru.allocation.ul);
        down.optimized = up.optimized = true;
        down.trace = std::move(rd.trace);
        up.trace = std::move(ru.trace);
        if (down.trace.time_capped || up.trace.time_capped) {
          out.time_capped = true;
          diag.warn(to_string(csi) + "/" + to_string(strategy) + ": optimizer stopped by the drop time limit");
        }
        break;
      }
    }
    down.constraint_violation_w = dl_constraint_violation(dl, eta_dl, p_ap);
    up.constraint_violation_w = ul_constraint_violation(eta_ul, p_ms);
    if (down.constraint_violation_w > kFeasibilityTolerance || up.constraint_violation_w > kFeasibilityTolerance)
      throw InternalError(to_string(strategy) + " allocation violates its power budget");
    down.rates_bps = dl_rates(dl, eta_dl, noise.sigma2_z).cwiseMax(0.0);
    up.rates_bps = ul_rates(ul, eta_ul).cwiseMax(0.0);
    out.entries.push_back(std::move(down));
    out.entries.push_back(std::move(up));
  }
}

}  // namespace

std::string to_string(Direction direction) { return direction == Direction::kDownlink ? "dl" : "ul"; }

std::size_t CampaignReport::n_failed() const {
  return static_cast<std::size_t>(std::count_if(drops.begin(), drops.end(), [](const DropResult& d) { return !d.ok; }));
}

DropResult run_drop(const SimulationConfig& config, std::size_t drop_index) {
  DropResult out;
  out.drop = drop_index;
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(config.drop_time_limit_s));
  try {
    config.validate();
    const std::uint64_t drop_seed = derive_seed(config.seed, {drop_index});
    const NetworkTopology topology = place_nodes(config.side_m, config.n_aps, config.n_users,
                                                 derive_seed(drop_seed, {kPlacement}), config.arrays);
    const RMatrix pl = path_loss_matrix(topology, config.path_loss);
    const RMatrix z = shadowing_field(topology, config.path_loss, derive_seed(drop_seed, {kShadowing}));
    const LargeScaleGains gains = large_scale_gains(pl, z, config.path_loss.sigma_sh_db);
    const ChannelSet channels = draw_channels(gains, topology, derive_seed(drop_seed, {kFading}));
    const double sigma2 = noise_variance(config.noise_psd_dbm_hz, config.bandwidth_hz, config.noise_figure_db);
    const NoiseModel noise{sigma2, sigma2};

    for (CsiMode csi : config.csi_modes)
      run_csi_mode(config, topology, channels, noise, csi, drop_seed, deadline, out);
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.entries.clear();
    out.error = "drop " + std::to_string(drop_index) + ": " + e.what();
  }
  return out;
}

CampaignReport run_campaign(const SimulationConfig& config) {
  config.validate();
  CampaignReport report;
  report.config = config;
  report.drops.resize(config.n_drops);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t d = next++; d < config.n_drops; d = next++) report.drops[d] = run_drop(config, d);
  };
  const auto n_workers = std::min<std::size_t>(config.threads, config.n_drops);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return report;
}

std::vector<double> pooled_rates(const CampaignReport& report, Strategy strategy, CsiMode csi,
                                 Direction direction) {
  std::vector<double> out;
  for (const auto& drop : report.drops) {
    if (!drop.ok) continue;
    for (const auto& e : drop.entries)
      if (e.strategy == strategy && e.csi == csi && e.direction == direction)
        out.insert(out.end(), e.rates_bps.data(), e.rates_bps.data() + e.rates_bps.size());
  }
  std::sort(out.begin(), out.end());
  return out;
}

double median(std::vector<double> values) { return percentile(std::move(values), 50.0); }

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<SummaryRow> summarize(const CampaignReport& report) {
  std::vector<SummaryRow> rows;
  for (CsiMode csi : report.config.csi_modes)
    for (Strategy strategy : report.config.strategies)
      for (Direction direction : {Direction::kDownlink, Direction::kUplink}) {
        SummaryRow row{strategy, csi, direction};
        std::vector<double> sums, mins;
        for (const auto& drop : report.drops) {
          if (!drop.ok) continue;
          for (const auto& e : drop.entries)
            if (e.strategy == strategy && e.csi == csi && e.direction == direction) {
              sums.push_back(e.sum_rate());
              mins.push_back(e.min_rate());
            }
        }
        row.n_drops = sums.size();
        const auto users = pooled_rates(report, strategy, csi, direction);
        auto mean = [](const std::vector<double>& v) {
          double s = 0.0;
          for (double x : v) s += x;
          return v.empty() ? 0.0 : s / static_cast<double>(v.size());
        };
        row.mean_sum_rate = mean(sums);
        row.median_sum_rate = median(sums);
        row.mean_min_rate = mean(mins);
        row.median_min_rate = median(mins);
        row.p5_user_rate = percentile(users, 5.0);
        row.mean_user_rate = mean(users);
        row.median_user_rate = median(users);
        rows.push_back(row);
      }
  return rows;
}

}  // namespace ucmimo
