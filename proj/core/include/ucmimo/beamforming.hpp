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
 * @file beamforming.hpp
 * @brief AP/MS association (cell-free, top-N user-centric, above-average),
 * the fixed spreading matrix L_k, channel-inversion precoders and the uplink
 * combiners formed at each AP.
 */

#pragma once

#include <string>
#include <vector>

#include "ucmimo/geometry.hpp"
#include "ucmimo/types.hpp"

namespace ucmimo {

struct AssociationMode {
  enum class Kind { kCellFree, kTopN, kAboveAverage };

  Kind kind = Kind::kCellFree;
  int n = 0;  // only meaningful for kTopN

  static AssociationMode cell_free() { return {Kind::kCellFree, 0}; }
  static AssociationMode top_n(int n) { return {Kind::kTopN, n}; }
  static AssociationMode above_average() { return {Kind::kAboveAverage, 0}; }

  /// Parses "cf" | "topn:<N>" | "above_average".
  static AssociationMode parse(const std::string& text);
  std::string to_string() const;
};

struct AssociationMap {
  std::vector<std::vector<int>> served_by_ap;  // K(m), ascending user index
  std::vector<std::vector<int>> serving_aps;   // M(k), ascending AP index

  std::size_t n_aps() const { return served_by_ap.size(); }
  std::size_t n_users() const { return serving_aps.size(); }
  bool serves(std::size_t ap, std::size_t user) const;
  bool is_orphan(std::size_t user) const { return serving_aps[user].empty(); }
};

AssociationMap build_association(const UserApGrid<CMatrix>& estimated_channels,
                                 const AssociationMode& mode);

/// L_k = I_{P_k} kron 1_{N_MS/P_k}.
struct SpreadingMatrix {
  RMatrix matrix;

  CMatrix as_complex() const { return matrix.cast<Complex>(); }
};

SpreadingMatrix spreading_matrix(int streams, int n_ms_antennas);

/// Channel-inversion precoder Q = Ghat (Ghat^H Ghat)^-1 L.
CMatrix downlink_precoder(const CMatrix& estimate, const SpreadingMatrix& spreading,
                          Diagnostics* diagnostics = nullptr);

/// Uplink combiner (L^H Ghat^H Ghat L)^-1 L^H Ghat^H.
CMatrix uplink_combiner(const CMatrix& estimate, const SpreadingMatrix& spreading,
                        Diagnostics* diagnostics = nullptr);

/// Solves gram * X = rhs for a Hermitian positive (semi)definite gram; falls
/// back to a ridge of 1e-12 * trace/dim when the condition number exceeds 1e12.
CMatrix solve_gram(const CMatrix& gram, const CMatrix& rhs, bool* regularized = nullptr);

struct PrecoderSet {
  UserApGrid<CMatrix> precoders;  // Q_{k,m}; empty matrix when m not in M(k)
};

struct CombinerSet {
  UserApGrid<CMatrix> combiners;  // Gtilde_{k,m}; empty matrix when m not in M(k)
};

std::vector<SpreadingMatrix> spreading_matrices(const NetworkTopology& topology);

PrecoderSet build_precoders(const UserApGrid<CMatrix>& estimated_channels,
                            const AssociationMap& association,
                            const std::vector<SpreadingMatrix>& spreading,
                            Diagnostics* diagnostics = nullptr);

CombinerSet build_combiners(const UserApGrid<CMatrix>& estimated_channels,
                            const AssociationMap& association,
                            const std::vector<SpreadingMatrix>& spreading,
                            Diagnostics* diagnostics = nullptr);

}  // namespace ucmimo
