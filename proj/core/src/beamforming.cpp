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

#include "ucmimo/beamforming.hpp"

#include <algorithm>
#include <numeric>

namespace ucmimo {

namespace {

constexpr double kMaxGramCondition = 1e12;
constexpr double kRidgeScale = 1e-12;

}  // namespace

AssociationMode AssociationMode::parse(const std::string& text) {
  if (text == "cf") return cell_free();
  if (text == "above_average") return above_average();
  const std::string prefix = "topn:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string digits = text.substr(prefix.size());
    std::size_t used = 0;
    int n = 0;
    try {
      n = std::stoi(digits, &used);
    } catch (const std::exception&) {
      throw ParameterError("association: cannot parse N in '" + text + "'");
    }
    if (used != digits.size()) throw ParameterError("association: cannot parse N in '" + text + "'");
    if (n <= 0) throw ParameterError("association: top-N requires N >= 1");
    return top_n(n);
  }
  throw ParameterError("association: unknown mode '" + text + "'");
}

std::string AssociationMode::to_string() const {
  switch (kind) {
    case Kind::kCellFree:
      return "cf";
    case Kind::kTopN:
      return "topn:" + std::to_string(n);
    case Kind::kAboveAverage:
      return "above_average";
  }
  return "cf";
}

bool AssociationMap::serves(std::size_t ap, std::size_t user) const {
  const auto& users = served_by_ap[ap];
  return std::binary_search(users.begin(), users.end(), static_cast<int>(user));
}

AssociationMap build_association(const UserApGrid<CMatrix>& estimated_channels,
                                 const AssociationMode& mode) {
  const auto K = estimated_channels.n_users();
  const auto M = estimated_channels.n_aps();
  if (K == 0 || M == 0) throw ParameterError("build_association: no channel estimates");
  if (mode.kind == AssociationMode::Kind::kTopN && mode.n <= 0)
    throw ParameterError("build_association: top-N requires N >= 1");

  AssociationMap map;
  map.served_by_ap.resize(M);
  map.serving_aps.resize(K);

  std::vector<double> norms(K);
  std::vector<int> order(K);
  for (std::size_t m = 0; m < M; ++m) {
    auto& served = map.served_by_ap[m];
    for (std::size_t k = 0; k < K; ++k) norms[k] = estimated_channels(k, m).norm();
    switch (mode.kind) {
      case AssociationMode::Kind::kCellFree:
        served.resize(K);
        std::iota(served.begin(), served.end(), 0);
        break;
      case AssociationMode::Kind::kTopN: {
        std::iota(order.begin(), order.end(), 0);
        // Stable sort keeps the lower user index first among equal norms.
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return norms[a] > norms[b]; });
        const auto n = std::min<std::size_t>(static_cast<std::size_t>(mode.n), K);
        served.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));
        std::sort(served.begin(), served.end());
        break;
      }
      case AssociationMode::Kind::kAboveAverage: {
        double mean = 0.0;
        for (double v : norms) mean += v;
        mean /= static_cast<double>(K);
        for (std::size_t k = 0; k < K; ++k)
          if (norms[k] > mean) served.push_back(static_cast<int>(k));
        break;
      }
    }
    for (int k : served) map.serving_aps[static_cast<std::size_t>(k)].push_back(static_cast<int>(m));
  }
  return map;
}

SpreadingMatrix spreading_matrix(int streams, int n_ms_antennas) {
  if (streams < 1 || n_ms_antennas < 1 || n_ms_antennas % streams != 0)
    throw ParameterError("spreading_matrix: P_k must divide N_MS");
  const int group = n_ms_antennas / streams;
  SpreadingMatrix out{RMatrix::Zero(n_ms_antennas, streams)};
  for (int p = 0; p < streams; ++p) out.matrix.block(p * group, p, group, 1).setOnes();
  return out;
}

std::vector<SpreadingMatrix> spreading_matrices(const NetworkTopology& topology) {
  std::vector<SpreadingMatrix> out;
  out.reserve(topology.n_users());
  for (int p : topology.multiplexing_orders) out.push_back(spreading_matrix(p, topology.n_ms_antennas));
  return out;
}

CMatrix solve_gram(const CMatrix& gram, const CMatrix& rhs, bool* regularized) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  const bool ill = !(lo > 0.0) || hi / lo > kMaxGramCondition;
  if (regularized) *regularized = ill;
  if (!ill) return gram.llt().solve(rhs);
  CMatrix ridged = gram;
  const double ridge =
      kRidgeScale * std::max(gram.trace().real(), 1e-300) / static_cast<double>(gram.rows());
  ridged.diagonal().array() += ridge;
  return ridged.ldlt().solve(rhs);
}

CMatrix downlink_precoder(const CMatrix& estimate, const SpreadingMatrix& spreading,
                          Diagnostics* diagnostics) {
  if (estimate.rows() < estimate.cols())
    throw ParameterError("downlink_precoder: channel inversion needs N_AP >= N_MS");
  if (spreading.matrix.rows() != estimate.cols())
    throw ParameterError("downlink_precoder: spreading matrix does not match N_MS");
  bool regularized = false;
  CMatrix gram = estimate.adjoint() * estimate;
  CMatrix q = estimate * solve_gram(gram, spreading.as_complex(), &regularized);
  if (regularized && diagnostics) diagnostics->warn("downlink precoder Gram ill-conditioned; regularized");
  return q;
}

CMatrix uplink_combiner(const CMatrix& estimate, const SpreadingMatrix& spreading,
                        Diagnostics* diagnostics) {
  if (spreading.matrix.rows() != estimate.cols())
    throw ParameterError("uplink_combiner: spreading matrix does not match N_MS");
  bool regularized = false;
  const CMatrix gl = estimate * spreading.as_complex();
  CMatrix gram = gl.adjoint() * gl;
  CMatrix g = solve_gram(gram, gl.adjoint(), &regularized);
  if (regularized && diagnostics) diagnostics->warn("uplink combiner Gram ill-conditioned; regularized");
  return g;
}

PrecoderSet build_precoders(const UserApGrid<CMatrix>& estimated_channels,
                            const AssociationMap& association,
                            const std::vector<SpreadingMatrix>& spreading,
                            Diagnostics* diagnostics) {
  PrecoderSet out{UserApGrid<CMatrix>(estimated_channels.n_users(), estimated_channels.n_aps())};
  for (std::size_t k = 0; k < association.n_users(); ++k)
    for (int m : association.serving_aps[k])
      out.precoders(k, static_cast<std::size_t>(m)) =
          downlink_precoder(estimated_channels(k, static_cast<std::size_t>(m)), spreading[k], diagnostics);
  return out;
}

CombinerSet build_combiners(const UserApGrid<CMatrix>& estimated_channels,
                            const AssociationMap& association,
                            const std::vector<SpreadingMatrix>& spreading,
                            Diagnostics* diagnostics) {
  CombinerSet out{UserApGrid<CMatrix>(estimated_channels.n_users(), estimated_channels.n_aps())};
  for (std::size_t k = 0; k < association.n_users(); ++k)
    for (int m : association.serving_aps[k])
      out.combiners(k, static_cast<std::size_t>(m)) =
          uplink_combiner(estimated_channels(k, static_cast<std::size_t>(m)), spreading[k], diagnostics);
  return out;
}

}  // namespace ucmimo
