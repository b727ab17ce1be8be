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

#include "ucmimo/training.hpp"

#include <array>
#include <cmath>
#include <string>

namespace ucmimo {

namespace {

// Feedback taps of primitive polynomials, indexed by LFSR order.
const std::array<std::vector<int>, 17> kPrimitiveTaps = {{
    {},
    {},
    {2, 1},
    {3, 2},
    {4, 3},
    {5, 3},
    {6, 5},
    {7, 6},
    {8, 6, 5, 4},
    {9, 5},
    {10, 7},
    {11, 9},
    {12, 11, 10, 4},
    {13, 12, 11, 8},
    {14, 13, 12, 2},
    {15, 14},
    {16, 15, 13, 4},
}};

// Modified Gram-Schmidt step: removes from `row` its projection on the first
// `count` rows of `basis` and normalizes it. Returns false if nothing is left.
bool orthonormalize_against(RVector& row, const RMatrix& basis, Eigen::Index count) {
  const double original = row.norm();
  for (Eigen::Index j = 0; j < count; ++j) row -= row.dot(basis.row(j).transpose()) * basis.row(j).transpose();
  const double n = row.norm();
  if (!(n > 1e-8 * original)) return false;
  row /= n;
  return true;
}

}  // namespace

void NoiseModel::validate() const {
  if (!(sigma2_w > 0.0) || !(sigma2_z > 0.0))
    throw ParameterError("noise variances must be strictly positive");
}

double noise_variance(double psd_dbm_hz, double bandwidth_hz, double noise_figure_db) {
  if (!(bandwidth_hz > 0.0)) throw ParameterError("noise_variance: bandwidth must be positive");
  return std::pow(10.0, (psd_dbm_hz - 30.0) / 10.0) * bandwidth_hz *
         std::pow(10.0, noise_figure_db / 10.0);
}

std::vector<double> m_sequence(int order) {
  if (order < 2 || order >= static_cast<int>(kPrimitiveTaps.size()))
    throw ParameterError("m_sequence: order must be in [2, 16]");
  const auto& taps = kPrimitiveTaps[static_cast<std::size_t>(order)];
  const std::size_t period = (std::size_t{1} << order) - 1;
  std::vector<int> state(static_cast<std::size_t>(order), 1);
  std::vector<double> seq;
  seq.reserve(period);
  for (std::size_t n = 0; n < period; ++n) {
    seq.push_back(state.back() ? -1.0 : 1.0);
    int feedback = 0;
    for (int t : taps) feedback ^= state[static_cast<std::size_t>(t - 1)];
    for (std::size_t i = state.size() - 1; i > 0; --i) state[i] = state[i - 1];
    state[0] = feedback;
  }
  return seq;
}

PilotBook generate_pilots(std::size_t n_users, int n_ms_antennas, int tau_p, std::uint64_t seed,
                          const PilotOptions& options) {
  if (n_users < 1 || n_ms_antennas < 1) throw ParameterError("generate_pilots: empty system");
  if (tau_p < n_ms_antennas)
    throw ParameterError("generate_pilots: tau_p=" + std::to_string(tau_p) +
                         " < N_MS=" + std::to_string(n_ms_antennas));
  if (!(options.train_power_w > 0.0))
    throw ParameterError("generate_pilots: training power must be positive");
  const std::size_t total_rows = n_users * static_cast<std::size_t>(n_ms_antennas);
  if (options.orthogonalize_across_users && static_cast<std::size_t>(tau_p) < total_rows)
    throw ParameterError("generate_pilots: joint orthogonality needs tau_p >= K*N_MS");

  int order = 2;
  while (((1 << order) - 1) < tau_p) ++order;
  const auto base = m_sequence(order);
  const std::size_t period = base.size();

  Rng rng(seed);
  const std::size_t offset =
      std::uniform_int_distribution<std::size_t>(0, period - 1)(rng.engine());

  // Rows take consecutive cyclic shifts. A shift whose truncated window is
  // linearly dependent on the rows it must be orthogonal to is skipped.
  auto window = [&](std::size_t shift) {
    RVector r(tau_p);
    for (int n = 0; n < tau_p; ++n) r(n) = base[(shift + static_cast<std::size_t>(n)) % period];
    return r;
  };
  PilotBook book;
  book.tau_p = tau_p;
  book.train_powers.assign(n_users, options.train_power_w);

  RMatrix all(static_cast<Eigen::Index>(total_rows), tau_p);
  std::size_t next_shift = offset;
  std::size_t tried = 0;
  for (std::size_t k = 0; k < n_users; ++k) {
    RMatrix user_rows(n_ms_antennas, tau_p);
    for (int r = 0; r < n_ms_antennas; ++r) {
      const auto global = static_cast<Eigen::Index>(k) * n_ms_antennas + r;
      bool placed = false;
      while (!placed) {
        if (tried++ >= total_rows + period * n_users)
          throw InternalError("generate_pilots: cannot find independent pilot rows; increase tau_p");
        RVector row = window(next_shift % period);
        ++next_shift;
        placed = options.orthogonalize_across_users ? orthonormalize_against(row, all, global)
                                                    : orthonormalize_against(row, user_rows, r);
        if (placed) {
          user_rows.row(r) = row.transpose();
          all.row(global) = row.transpose();
        }
      }
    }
    book.pilots.push_back(user_rows.cast<Complex>());
  }
  return book;
}

CMatrix training_signal(const ChannelSet& channels, const PilotBook& pilots, std::size_t ap) {
  if (pilots.n_users() != channels.n_users())
    throw ParameterError("training_signal: pilot book and channel set disagree on K");
  const auto n_ap = channels.true_channels(0, ap).rows();
  CMatrix y = CMatrix::Zero(n_ap, pilots.tau_p);
  for (std::size_t k = 0; k < channels.n_users(); ++k)
    y.noalias() += std::sqrt(pilots.train_powers[k]) * channels.true_channels(k, ap) * pilots.pilots[k];
  return y;
}

CMatrix training_observation(const ChannelSet& channels, const PilotBook& pilots,
                             const NoiseModel& noise, std::size_t ap, std::uint64_t seed) {
  CMatrix y = training_signal(channels, pilots, ap);
  Rng rng(seed);
  y += rng.complex_normal_matrix(y.rows(), y.cols(), noise.sigma2_w);
  return y;
}

CMatrix pm_estimate(const CMatrix& observation, const PilotBook& pilots, std::size_t user) {
  if (observation.cols() != pilots.tau_p)
    throw ParameterError("pm_estimate: observation has wrong number of samples");
  return (observation * pilots.pilots[user].adjoint()) / std::sqrt(pilots.train_powers[user]);
}

void estimate_channels(ChannelSet& channels, const PilotBook& pilots, const NoiseModel& noise,
                       std::uint64_t seed) {
  const auto K = channels.n_users();
  const auto M = channels.n_aps();
  channels.estimated_channels = UserApGrid<CMatrix>(K, M);
  for (std::size_t m = 0; m < M; ++m) {
    CMatrix y = training_observation(channels, pilots, noise, m, derive_seed(seed, {m}));
    for (std::size_t k = 0; k < K; ++k) channels.estimated_channels(k, m) = pm_estimate(y, pilots, k);
  }
}

void assume_perfect_csi(ChannelSet& channels) { channels.estimated_channels = channels.true_channels; }

}  // namespace ucmimo
