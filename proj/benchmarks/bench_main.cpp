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

#include <benchmark/benchmark.h>

#include "ucmimo/config.hpp"
#include "ucmimo/power_opt.hpp"
#include "ucmimo/simulation.hpp"
#include "ucmimo/training.hpp"

using namespace ucmimo;

namespace {

struct Instance {
  DlEffectiveChannels dl;
  UlEffectiveChannels ul;
  double sigma2 = 0.0;
  RVector p_ap;
  RVector p_ms;
};

Instance make_instance(std::size_t n_aps, std::size_t n_users) {
  SimulationConfig c = preset_config("desk");
  c.n_aps = n_aps;
  c.n_users = n_users;
  const std::uint64_t seed = 7;
  const NetworkTopology topo = place_nodes(c.side_m, c.n_aps, c.n_users, derive_seed(seed, {1}), c.arrays);
  const RMatrix pl = path_loss_matrix(topo, c.path_loss);
  const RMatrix z = shadowing_field(topo, c.path_loss, derive_seed(seed, {2}));
  ChannelSet channels = draw_channels(large_scale_gains(pl, z, c.path_loss.sigma_sh_db), topo, derive_seed(seed, {3}));
  Instance in;
  in.sigma2 = noise_variance(c.noise_psd_dbm_hz, c.bandwidth_hz, c.noise_figure_db);
  PilotOptions options;
  options.train_power_w = c.train_power_w;
  const auto book = generate_pilots(c.n_users, c.arrays.n_ms_antennas, c.tau_p, derive_seed(seed, {4}), options);
  estimate_channels(channels, book, NoiseModel{in.sigma2, in.sigma2}, derive_seed(seed, {5}));
  const auto association = build_association(channels.estimated_channels, c.association);
  const auto spreading = spreading_matrices(topo);
  in.dl = dl_effective_channels(channels, association, spreading, c.bandwidth_hz);
  in.ul = ul_effective_channels(channels, association, spreading, in.sigma2, c.bandwidth_hz);
  in.p_ap = RVector::Constant(static_cast<Eigen::Index>(c.n_aps), c.p_max_ap_w);
  in.p_ms = RVector::Constant(static_cast<Eigen::Index>(c.n_users), c.p_max_ms_w);
  return in;
}

void BM_DlRates(benchmark::State& state) {
  const auto in = make_instance(static_cast<std::size_t>(state.range(0)), 10);
  const RMatrix eta = uniform_dl(in.dl, in.p_ap);
  for (auto _ : state) benchmark::DoNotOptimize(dl_rates(in.dl, eta, in.sigma2));
}
BENCHMARK(BM_DlRates)->Arg(20)->Arg(60);

void BM_UlRates(benchmark::State& state) {
  const auto in = make_instance(static_cast<std::size_t>(state.range(0)), 10);
  const RVector eta = uniform_ul(10, 2, in.p_ms);
  for (auto _ : state) benchmark::DoNotOptimize(ul_rates(in.ul, eta));
}
BENCHMARK(BM_UlRates)->Arg(20)->Arg(60);

void BM_DlGradient(benchmark::State& state) {
  const auto in = make_instance(20, 10);
  const RMatrix eta = uniform_dl(in.dl, in.p_ap);
  const auto vars = dl_ap_block(in.dl, 0);
  for (auto _ : state) benchmark::DoNotOptimize(dl_g_gradient(in.dl, eta, in.sigma2, 0, vars, false));
}
BENCHMARK(BM_DlGradient);

void BM_ProjectCappedSimplex(benchmark::State& state) {
  Rng rng(1);
  RVector v(state.range(0));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.uniform(-0.5, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(project_capped_simplex(v, 1.0));
}
BENCHMARK(BM_ProjectCappedSimplex)->Arg(8)->Arg(64)->Arg(512);

void BM_SlmSumRateDl(benchmark::State& state) {
  const auto in = make_instance(20, 10);
  const SolverConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(slm_sum_rate_dl(in.dl, in.sigma2, in.p_ap, cfg));
}
BENCHMARK(BM_SlmSumRateDl)->Unit(benchmark::kMillisecond);

void BM_SlmMinRateUl(benchmark::State& state) {
  const auto in = make_instance(20, 10);
  const SolverConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(slm_min_rate_ul(in.ul, in.p_ms, cfg));
}
BENCHMARK(BM_SlmMinRateUl)->Unit(benchmark::kMillisecond);

void BM_Drop(benchmark::State& state) {
  SimulationConfig c = preset_config("desk");
  c.csi_modes = {CsiMode::kEstimated};
  for (auto _ : state) benchmark::DoNotOptimize(run_drop(c, 0));
}
BENCHMARK(BM_Drop)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
