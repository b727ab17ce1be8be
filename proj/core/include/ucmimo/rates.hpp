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
 * @file rates.hpp
 * @brief Downlink and uplink achievable rates, their split into a difference
 * of two log-det terms g1 - g2, exact gradients of those terms and the
 * linearized lower bounds used by the power optimizers.
 *
 * Downlink power coefficients eta(k, m) are the scalars multiplying the
 * channel-inversion precoder Q_{k,m}; the power radiated by AP m for user k
 * is eta(k, m) * tr(Q_{k,m} Q_{k,m}^H). Uplink coefficients eta(k) are the
 * per-MS transmit powers. All rates are in bit/s.
 */

#pragma once

#include <vector>

#include "ucmimo/beamforming.hpp"
#include "ucmimo/geometry.hpp"
#include "ucmimo/types.hpp"

namespace ucmimo {

struct PowerAllocation {
  RMatrix dl;  // K x M downlink coefficients
  RVector ul;  // K uplink powers (W)
};

/// Log-determinant of a Hermitian positive definite matrix (natural log).
double logdet_hpd(const CMatrix& s);

// ---------------------------------------------------------------------------
// Downlink

struct DlEffectiveChannels {
  double bandwidth_hz = 0.0;
  std::size_t n_users = 0;
  std::size_t n_aps = 0;
  std::vector<CMatrix> noise_shape;            // L_k^H L_k
  std::vector<std::vector<int>> serving_aps;   // M(j)
  std::vector<std::vector<CMatrix>> a_terms;   // [k*K + j][slot of m in M(j)]
  UserApGrid<double> precoder_power;           // tr(Q_{k,m} Q_{k,m}^H), 0 if unserved

  const CMatrix& a(std::size_t k, std::size_t j, std::size_t slot) const {
    return a_terms[k * n_users + j][slot];
  }
  /// Position of AP m inside M(j), or -1.
  int slot_of(std::size_t j, std::size_t m) const;
};

/// A_{k,j,m} = L_k^H G_{k,m}^H Q_{j,m} for every k, j and m in M(j).
DlEffectiveChannels dl_effective_channels(const UserApGrid<CMatrix>& true_channels,
                                          const PrecoderSet& precoders,
                                          const AssociationMap& association,
                                          const std::vector<SpreadingMatrix>& spreading,
                                          double bandwidth_hz);

/// Convenience overload that builds the precoders from the estimates.
DlEffectiveChannels dl_effective_channels(const ChannelSet& channels,
                                          const AssociationMap& association,
                                          const std::vector<SpreadingMatrix>& spreading,
                                          double bandwidth_hz, Diagnostics* diagnostics = nullptr);

/// A_{k,j} = sum_{m in M(j)} sqrt(eta(j,m)) A_{k,j,m}.
CMatrix dl_cross_matrix(const DlEffectiveChannels& eff, const RMatrix& eta, std::size_t k,
                        std::size_t j);

/// W log2 |I + R_k^-1 A_kk A_kk^H| evaluated directly from the interference
/// covariance R_k = sigma2_z L^H L + sum_{j != k} A_kj A_kj^H.
double dl_user_rate(const DlEffectiveChannels& eff, const RMatrix& eta, double sigma2_z,
                    std::size_t k);

/// g1 (include_own) or g2 of the difference-of-log-det form.
double dl_g(const DlEffectiveChannels& eff, const RMatrix& eta, double sigma2_z, std::size_t k,
            bool include_own);

/// Power radiated by AP m: sum_k eta(k,m) tr(Q_{k,m} Q_{k,m}^H).
double dl_radiated_power(const DlEffectiveChannels& eff, const RMatrix& eta, std::size_t m);

/// One optimization variable eta(user, ap).
struct BlockVar {
  int user = 0;
  int ap = 0;
};

/// Variables of AP block m: eta(j, m) for every j with m in M(j).
std::vector<BlockVar> dl_ap_block(const DlEffectiveChannels& eff, std::size_t m);
/// Every downlink variable (single-block mode).
std::vector<BlockVar> dl_all_vars(const DlEffectiveChannels& eff);

/// Exact gradient of g1/g2 with respect to the listed variables. Entries of
/// eta below eta_floor (same shape, optional) are clamped before
/// differentiating since d sqrt(eta)/d eta diverges at zero.
RVector dl_g_gradient(const DlEffectiveChannels& eff, const RMatrix& eta, double sigma2_z,
                      std::size_t k, const std::vector<BlockVar>& vars, bool include_own,
                      const RMatrix* eta_floor = nullptr);

/// Gradient of g2 over AP block m.
RVector dl_g2_gradient(const DlEffectiveChannels& eff, const RMatrix& eta, double sigma2_z,
                       std::size_t k, std::size_t block_m, const RMatrix* eta_floor = nullptr);

/// g1(eta) - g2(anchor) - grad g2(anchor)^T (eta - anchor) over `vars`.
/// eta and anchor must agree outside the block.
double dl_surrogate(const DlEffectiveChannels& eff, const RMatrix& eta, const RMatrix& anchor,
                    double sigma2_z, std::size_t k, const std::vector<BlockVar>& vars,
                    const RMatrix* eta_floor = nullptr);

/// Cached evaluator of g1/g2 when only `vars` move; everything else is frozen
/// at the construction-time coefficients.
class DlBlockEvaluator {
 public:
  DlBlockEvaluator(const DlEffectiveChannels& eff, double sigma2_z, const RMatrix& eta,
                   std::vector<BlockVar> vars);

  const std::vector<BlockVar>& vars() const { return vars_; }
  RVector values_from(const RMatrix& eta) const;

  double g(std::size_t k, bool include_own, const RVector& values) const;
  double rate(std::size_t k, const RVector& values) const;
  RVector g_gradient(std::size_t k, bool include_own, const RVector& values,
                     const RVector& floor) const;

 private:
  void coherent_sums(std::size_t k, const RVector& values, std::vector<CMatrix>& sums) const;

  const DlEffectiveChannels& eff_;
  double sigma2_z_;
  std::vector<BlockVar> vars_;
  std::vector<CMatrix> base_;                    // [k*K + j], block entries excluded
  std::vector<std::vector<std::size_t>> var_of_user_;  // j -> indices into vars_
  std::vector<std::size_t> var_slot_;            // slot of vars_[i].ap inside M(user)
};

// ---------------------------------------------------------------------------
// Uplink

struct UlEffectiveChannels {
  double bandwidth_hz = 0.0;
  double sigma2_w = 0.0;
  std::size_t n_users = 0;
  int n_ms_antennas = 1;
  std::vector<std::vector<CMatrix>> b_terms;  // [k][j] = B_{k,j}
  std::vector<CMatrix> noise_terms;           // G_k = sigma2_w sum Gtilde Gtilde^H
  std::vector<bool> orphan;                   // M(k) empty

  const CMatrix& b(std::size_t k, std::size_t j) const { return b_terms[k][j]; }
};

/// B_{k,j} = sum_{m in M(k)} Gtilde_{k,m} G_{j,m} L_j.
UlEffectiveChannels ul_effective_channels(const UserApGrid<CMatrix>& true_channels,
                                          const CombinerSet& combiners,
                                          const AssociationMap& association,
                                          const std::vector<SpreadingMatrix>& spreading,
                                          double sigma2_w, double bandwidth_hz);

UlEffectiveChannels ul_effective_channels(const ChannelSet& channels,
                                          const AssociationMap& association,
                                          const std::vector<SpreadingMatrix>& spreading,
                                          double sigma2_w, double bandwidth_hz,
                                          Diagnostics* diagnostics = nullptr);

/// W log2 |I + eta_k Rtilde_k^-1 B_kk B_kk^H|; 0 for an orphan user.
double ul_user_rate(const UlEffectiveChannels& eff, const RVector& eta, std::size_t k);

double ul_g(const UlEffectiveChannels& eff, const RVector& eta, std::size_t k, bool include_own);

/// Gradient over all K uplink powers.
RVector ul_g_gradient(const UlEffectiveChannels& eff, const RVector& eta, std::size_t k,
                      bool include_own);
inline RVector ul_g2_gradient(const UlEffectiveChannels& eff, const RVector& eta, std::size_t k) {
  return ul_g_gradient(eff, eta, k, false);
}

double ul_surrogate(const UlEffectiveChannels& eff, const RVector& eta, const RVector& anchor,
                    std::size_t k);

}  // namespace ucmimo
