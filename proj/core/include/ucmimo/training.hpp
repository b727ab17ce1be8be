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
 * @file training.hpp
 * @brief Uplink pilot generation (m-sequence based), the training observation
 * at each AP and pilot-matched channel estimation.
 */

#pragma once

#include <cstdint>
#include <vector>

#include "ucmimo/geometry.hpp"
#include "ucmimo/types.hpp"

namespace ucmimo {

struct PilotBook {
  int tau_p = 0;
  std::vector<CMatrix> pilots;     // Phi_k, N_MS x tau_p, Phi_k Phi_k^H = I
  std::vector<double> train_powers;  // p_k in watts

  std::size_t n_users() const { return pilots.size(); }
};

struct NoiseModel {
  double sigma2_w = 0.0;  // AP receiver noise variance (W)
  double sigma2_z = 0.0;  // MS receiver noise variance (W)

  void validate() const;
};

/// Thermal noise power in watts for a PSD in dBm/Hz, bandwidth and noise figure.
double noise_variance(double psd_dbm_hz, double bandwidth_hz, double noise_figure_db);

/// Binary (+1/-1) maximum-length sequence of period 2^order - 1.
std::vector<double> m_sequence(int order);

struct PilotOptions {
  double train_power_w = 0.1;
  // Orthonormalize all K*N_MS rows jointly (requires tau_p >= K*N_MS).
  bool orthogonalize_across_users = false;
};

/// Pilots built from cyclic shifts of an m-sequence; user k, row r uses
/// shift (k*N_MS + r + offset), offset drawn from the seed. Shifts whose
/// truncated window is linearly dependent on earlier rows are skipped.
PilotBook generate_pilots(std::size_t n_users, int n_ms_antennas, int tau_p, std::uint64_t seed,
                          const PilotOptions& options = {});

/// Noise-free part of the training observation at AP m: sum_k sqrt(p_k) G_{k,m} Phi_k.
CMatrix training_signal(const ChannelSet& channels, const PilotBook& pilots, std::size_t ap);

/// Y_m = training_signal + W_m with W_m ~ CN(0, sigma2_w) entries.
CMatrix training_observation(const ChannelSet& channels, const PilotBook& pilots,
                             const NoiseModel& noise, std::size_t ap, std::uint64_t seed);

/// Pilot-matched estimate (1/sqrt(p_k)) Y_m Phi_k^H.
CMatrix pm_estimate(const CMatrix& observation, const PilotBook& pilots, std::size_t user);

/// Fills channels.estimated_channels for every (k, m); AP m uses noise stream (seed, m).
void estimate_channels(ChannelSet& channels, const PilotBook& pilots, const NoiseModel& noise,
                       std::uint64_t seed);

/// Perfect-CSI mode: estimates are a copy of the true channels.
void assume_perfect_csi(ChannelSet& channels);

}  // namespace ucmimo
