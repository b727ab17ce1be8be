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

#include "ucmimo/rates.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace ucmimo {

namespace {

constexpr double kLn2 = std::numbers::ln2;

// Inverse of a Hermitian positive definite matrix.
CMatrix hpd_inverse(const CMatrix& s) {
  Eigen::LLT<CMatrix> llt(s);
  if (llt.info() != Eigen::Success) return s.ldlt().solve(CMatrix::Identity(s.rows(), s.cols()));
  return llt.solve(CMatrix::Identity(s.rows(), s.cols()));
}

// log|I + X X^H| with X = C^-1 a and C the Cholesky factor of r.
double whitened_logdet(const CMatrix& r, const CMatrix& a) {
  Eigen::LLT<CMatrix> llt(r);
  if (llt.info() != Eigen::Success)
    throw InternalError("interference-plus-noise covariance is not positive definite");
  CMatrix x = llt.matrixL().solve(a);
  CMatrix s = CMatrix::Identity(x.rows(), x.rows());
  s.noalias() += x * x.adjoint();
  return logdet_hpd(s);
}

double derivative_over_sqrt(double numerator, double eta) {
  if (eta > 0.0) return numerator / std::sqrt(eta);
  if (numerator == 0.0) return 0.0;
  return std::copysign(std::numeric_limits<double>::infinity(), numerator);
}

}  // namespace

double logdet_hpd(const CMatrix& s) {
  Eigen::LLT<CMatrix> llt(s);
  if (llt.info() == Eigen::Success) {
    double acc = 0.0;
    const CMatrix& l = llt.matrixLLT();
    for (Eigen::Index i = 0; i < s.rows(); ++i) acc += std::log(l(i, i).real());
    return 2.0 * acc;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(s, Eigen::EigenvaluesOnly);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const double v = eig.eigenvalues()(i);
    if (!(v > 0.0)) throw InternalError("logdet of a matrix that is not positive definite");
    acc += std::log(v);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Downlink

int DlEffectiveChannels::slot_of(std::size_t j, std::size_t m) const {
  const auto& aps = serving_aps[j];
  for (std::size_t s = 0; s < aps.size(); ++s)
    if (static_cast<std::size_t>(aps[s]) == m) return static_cast<int>(s);
  return -1;
}

DlEffectiveChannels dl_effective_channels(const UserApGrid<CMatrix>& true_channels,
                                          const PrecoderSet& precoders,
                                          const AssociationMap& association,
                                          const std::vector<SpreadingMatrix>& spreading,
                                          double bandwidth_hz) {
  const auto K = true_channels.n_users();
  const auto M = true_channels.n_aps();
  if (association.n_users() != K || association.n_aps() != M || spreading.size() != K)
    throw ParameterError("dl_effective_channels: inconsistent dimensions");

  DlEffectiveChannels eff;
  eff.bandwidth_hz = bandwidth_hz;
  eff.n_users = K;
  eff.n_aps = M;
  eff.serving_aps = association.serving_aps;
  eff.precoder_power = UserApGrid<double>(K, M, 0.0);
  eff.noise_shape.reserve(K);
  std::vector<CMatrix> l_adj(K);
  for (std::size_t k = 0; k < K; ++k) {
    const CMatrix l = spreading[k].as_complex();
    l_adj[k] = l.adjoint();
    eff.noise_shape.push_back(l_adj[k] * l);
  }
  for (std::size_t j = 0; j < K; ++j)
    for (int m : association.serving_aps[j]) {
      const CMatrix& q = precoders.precoders(j, static_cast<std::size_t>(m));
      eff.precoder_power(j, static_cast<std::size_t>(m)) = q.squaredNorm();
    }

  eff.a_terms.resize(K * K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t j = 0; j < K; ++j) {
      auto& terms = eff.a_terms[k * K + j];
      terms.reserve(association.serving_aps[j].size());
      for (int m : association.serving_aps[j]) {
        const auto mu = static_cast<std::size_t>(m);
        terms.push_back(l_adj[k] * true_channels(k, mu).adjoint() * precoders.precoders(j, mu));
      }
    }
  return eff;
}

DlEffectiveChannels dl_effective_channels(const ChannelSet& channels,
                                          const AssociationMap& association,
                                          const std::vector<SpreadingMatrix>& spreading,
                                          double bandwidth_hz, Diagnostics* diagnostics) {
  if (!channels.has_estimates()) throw ParameterError("dl_effective_channels: no channel estimates");
  auto precoders = build_precoders(channels.estimated_channels, association, spreading, diagnostics);
  return dl_effective_channels(channels.true_channels, precoders, association, spreading,
                               bandwidth_hz);
}

CMatrix dl_cross_matrix(const DlEffectiveChannels& eff, const RMatrix& eta, std::size_t k,
                        std::size_t j) {
  const auto& aps = eff.serving_aps[j];
  CMatrix sum = CMatrix::Zero(eff.noise_shape[k].rows(), eff.noise_shape[j].cols());
  for (std::size_t s = 0; s < aps.size(); ++s)
    sum += std::sqrt(eta(static_cast<Eigen::Index>(j), aps[s])) * eff.a(k, j, s);
  return sum;
}

double dl_user_rate(const DlEffectiveChannels& eff, const RMatrix& eta, double sigma2_z,
                    std::size_t k) {
  CMatrix r = sigma2_z * eff.noise_shape[k];
  for (std::size_t j = 0; j < eff.n_users; ++j) {
    if (j == k) continue;
    const CMatrix a = dl_cross_matrix(eff, eta, k, j);
    r.noalias() += a * a.adjoint();
  }
  return eff.bandwidth_hz * whitened_logdet(r, dl_cross_matrix(eff, eta, k, k)) / kLn2;
}

double dl_g(const DlEffectiveChannels& eff, const RMatrix& eta, double sigma2_z, std::size_t k,
            bool include_own) {
  CMatrix s = sigma2_z * eff.noise_shape[k];
  for (std::size_t j = 0; j < eff.n_users; ++j) {
    if (j == k && !include_own) continue;
    const CMatrix a = dl_cross_matrix(eff, eta, k, j);
    s.noalias() += a * a.adjoint();
  }
  return eff.bandwidth_hz * logdet_hpd(s) / kLn2;
}

double dl_radiated_power(const DlEffectiveChannels& eff, const RMatrix& eta, std::size_t m) {
  double p = 0.0;
  for (std::size_t k = 0; k < eff.n_users; ++k)
    p += eta(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) * eff.precoder_power(k, m);
  return p;
}

std::vector<BlockVar> dl_ap_block(const DlEffectiveChannels& eff, std::size_t m) {
  std::vector<BlockVar> vars;
  for (std::size_t j = 0; j < eff.n_users; ++j)
    if (eff.slot_of(j, m) >= 0) vars.push_back({static_cast<int>(j), static_cast<int>(m)});
  return vars;
}

std::vector<BlockVar> dl_all_vars(const DlEffectiveChannels& eff) {
  std::vector<BlockVar> vars;
  for (std::size_t m = 0; m < eff.n_aps; ++m) {
    auto block = dl_ap_block(eff, m);
    vars.insert(vars.end(), block.begin(), block.end());
  }
  return vars;
}

RVector dl_g_gradient(const DlEffectiveChannels& eff, const RMatrix& eta, double sigma2_z,
                      std::size_t k, const std::vector<BlockVar>& vars, bool include_own,
                      const RMatrix* eta_floor) {
  RMatrix at = eta;
  if (eta_floor)
    for (const auto& v : vars) at(v.user, v.ap) = std::max(at(v.user, v.ap), (*eta_floor)(v.user, v.ap));

  std::vector<CMatrix> sums(eff.n_users);
  CMatrix s = sigma2_z * eff.noise_shape[k];
  for (std::size_t j = 0; j < eff.n_users; ++j) {
    sums[j] = dl_cross_matrix(eff, at, k, j);
    if (j == k && !include_own) continue;
    s.noalias() += sums[j] * sums[j].adjoint();
  }
  const CMatrix s_inv = hpd_inverse(s);

  RVector grad = RVector::Zero(static_cast<Eigen::Index>(vars.size()));
  const double scale = eff.bandwidth_hz / kLn2;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const auto j = static_cast<std::size_t>(vars[i].user);
    const auto m = static_cast<std::size_t>(vars[i].ap);
    if (j == k && !include_own) continue;
    const int slot = eff.slot_of(j, m);
    if (slot < 0) throw ParameterError("dl_g_gradient: variable outside the association");
    const double re =
        (s_inv * eff.a(k, j, static_cast<std::size_t>(slot)) * sums[j].adjoint()).trace().real();
    grad(static_cast<Eigen::Index>(i)) = scale * derivative_over_sqrt(re, at(vars[i].user, vars[i].ap));
  }
  return grad;
}

RVector dl_g2_gradient(const DlEffectiveChannels& eff, const RMatrix& eta, double sigma2_z,
                       std::size_t k, std::size_t block_m, const RMatrix* eta_floor) {
  return dl_g_gradient(eff, eta, sigma2_z, k, dl_ap_block(eff, block_m), false, eta_floor);
}

double dl_surrogate(const DlEffectiveChannels& eff, const RMatrix& eta, const RMatrix& anchor,
                    double sigma2_z, std::size_t k, const std::vector<BlockVar>& vars,
                    const RMatrix* eta_floor) {
  const RVector grad = dl_g_gradient(eff, anchor, sigma2_z, k, vars, false, eta_floor);
  double linear = 0.0;
  for (std::size_t i = 0; i < vars.size(); ++i)
    linear += grad(static_cast<Eigen::Index>(i)) *
              (eta(vars[i].user, vars[i].ap) - anchor(vars[i].user, vars[i].ap));
  return dl_g(eff, eta, sigma2_z, k, true) - dl_g(eff, anchor, sigma2_z, k, false) - linear;
}

DlBlockEvaluator::DlBlockEvaluator(const DlEffectiveChannels& eff, double sigma2_z,
                                   const RMatrix& eta, std::vector<BlockVar> vars)
    : eff_(eff), sigma2_z_(sigma2_z), vars_(std::move(vars)) {
  const auto K = eff_.n_users;
  var_of_user_.resize(K);
  var_slot_.resize(vars_.size());
  std::vector<std::vector<bool>> in_block(K);
  for (std::size_t j = 0; j < K; ++j) in_block[j].assign(eff_.serving_aps[j].size(), false);
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    const auto j = static_cast<std::size_t>(vars_[i].user);
    const int slot = eff_.slot_of(j, static_cast<std::size_t>(vars_[i].ap));
    if (slot < 0) throw ParameterError("DlBlockEvaluator: variable outside the association");
    var_of_user_[j].push_back(i);
    var_slot_[i] = static_cast<std::size_t>(slot);
    in_block[j][var_slot_[i]] = true;
  }
  base_.resize(K * K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t j = 0; j < K; ++j) {
      CMatrix sum = CMatrix::Zero(eff_.noise_shape[k].rows(), eff_.noise_shape[j].cols());
      const auto& aps = eff_.serving_aps[j];
      for (std::size_t s = 0; s < aps.size(); ++s)
        if (!in_block[j][s]) sum += std::sqrt(eta(static_cast<Eigen::Index>(j), aps[s])) * eff_.a(k, j, s);
      base_[k * K + j] = std::move(sum);
    }
}

RVector DlBlockEvaluator::values_from(const RMatrix& eta) const {
  RVector v(static_cast<Eigen::Index>(vars_.size()));
  for (std::size_t i = 0; i < vars_.size(); ++i) v(static_cast<Eigen::Index>(i)) = eta(vars_[i].user, vars_[i].ap);
  return v;
}

void DlBlockEvaluator::coherent_sums(std::size_t k, const RVector& values,
                                     std::vector<CMatrix>& sums) const {
  const auto K = eff_.n_users;
  sums.resize(K);
  for (std::size_t j = 0; j < K; ++j) {
    sums[j] = base_[k * K + j];
    for (std::size_t i : var_of_user_[j])
      sums[j] += std::sqrt(values(static_cast<Eigen::Index>(i))) * eff_.a(k, j, var_slot_[i]);
  }
}

double DlBlockEvaluator::g(std::size_t k, bool include_own, const RVector& values) const {
  std::vector<CMatrix> sums;
  coherent_sums(k, values, sums);
  CMatrix s = sigma2_z_ * eff_.noise_shape[k];
  for (std::size_t j = 0; j < eff_.n_users; ++j) {
    if (j == k && !include_own) continue;
    s.noalias() += sums[j] * sums[j].adjoint();
  }
  return eff_.bandwidth_hz * logdet_hpd(s) / kLn2;
}

double DlBlockEvaluator::rate(std::size_t k, const RVector& values) const {
  std::vector<CMatrix> sums;
  coherent_sums(k, values, sums);
  CMatrix s = sigma2_z_ * eff_.noise_shape[k];
  for (std::size_t j = 0; j < eff_.n_users; ++j)
    if (j != k) s.noalias() += sums[j] * sums[j].adjoint();
  const double g2 = logdet_hpd(s);
  s.noalias() += sums[k] * sums[k].adjoint();
  return eff_.bandwidth_hz * (logdet_hpd(s) - g2) / kLn2;
}

RVector DlBlockEvaluator::g_gradient(std::size_t k, bool include_own, const RVector& values,
                                     const RVector& floor) const {
  const RVector at = values.cwiseMax(floor);
  std::vector<CMatrix> sums;
  coherent_sums(k, at, sums);
  CMatrix s = sigma2_z_ * eff_.noise_shape[k];
  for (std::size_t j = 0; j < eff_.n_users; ++j) {
    if (j == k && !include_own) continue;
    s.noalias() += sums[j] * sums[j].adjoint();
  }
  const CMatrix s_inv = hpd_inverse(s);
  RVector grad = RVector::Zero(static_cast<Eigen::Index>(vars_.size()));
  const double scale = eff_.bandwidth_hz / kLn2;
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    const auto j = static_cast<std::size_t>(vars_[i].user);
    if (j == k && !include_own) continue;
    const double re = (s_inv * eff_.a(k, j, var_slot_[i]) * sums[j].adjoint()).trace().real();
    grad(static_cast<Eigen::Index>(i)) = scale * derivative_over_sqrt(re, at(static_cast<Eigen::Index>(i)));
  }
  return grad;
}

// ---------------------------------------------------------------------------
// Uplink

UlEffectiveChannels ul_effective_channels(const UserApGrid<CMatrix>& true_channels,
                                          const CombinerSet& combiners,
                                          const AssociationMap& association,
                                          const std::vector<SpreadingMatrix>& spreading,
                                          double sigma2_w, double bandwidth_hz) {
  const auto K = true_channels.n_users();
  if (association.n_users() != K || spreading.size() != K)
    throw ParameterError("ul_effective_channels: inconsistent dimensions");

  UlEffectiveChannels eff;
  eff.bandwidth_hz = bandwidth_hz;
  eff.sigma2_w = sigma2_w;
  eff.n_users = K;
  eff.n_ms_antennas = K > 0 ? static_cast<int>(spreading[0].matrix.rows()) : 1;
  eff.b_terms.assign(K, std::vector<CMatrix>(K));
  eff.noise_terms.resize(K);
  eff.orphan.resize(K);
  std::vector<CMatrix> l(K);
  for (std::size_t j = 0; j < K; ++j) l[j] = spreading[j].as_complex();

  for (std::size_t k = 0; k < K; ++k) {
    const auto pk = l[k].cols();
    eff.orphan[k] = association.serving_aps[k].empty();
    eff.noise_terms[k] = CMatrix::Zero(pk, pk);
    for (int m : association.serving_aps[k]) {
      const CMatrix& gt = combiners.combiners(k, static_cast<std::size_t>(m));
      eff.noise_terms[k].noalias() += sigma2_w * gt * gt.adjoint();
    }
    for (std::size_t j = 0; j < K; ++j) {
      CMatrix b = CMatrix::Zero(pk, l[j].cols());
      for (int m : association.serving_aps[k]) {
        const auto mu = static_cast<std::size_t>(m);
        b.noalias() += combiners.combiners(k, mu) * true_channels(j, mu) * l[j];
      }
      eff.b_terms[k][j] = std::move(b);
    }
  }
  return eff;
}

UlEffectiveChannels ul_effective_channels(const ChannelSet& channels,
                                          const AssociationMap& association,
                                          const std::vector<SpreadingMatrix>& spreading,
                                          double sigma2_w, double bandwidth_hz,
                                          Diagnostics* diagnostics) {
  if (!channels.has_estimates()) throw ParameterError("ul_effective_channels: no channel estimates");
  auto combiners = build_combiners(channels.estimated_channels, association, spreading, diagnostics);
  return ul_effective_channels(channels.true_channels, combiners, association, spreading, sigma2_w,
                               bandwidth_hz);
}

double ul_user_rate(const UlEffectiveChannels& eff, const RVector& eta, std::size_t k) {
  if (eff.orphan[k]) return 0.0;
  CMatrix r = eff.noise_terms[k];
  for (std::size_t j = 0; j < eff.n_users; ++j)
    if (j != k) r.noalias() += eta(static_cast<Eigen::Index>(j)) * eff.b(k, j) * eff.b(k, j).adjoint();
  const CMatrix a = std::sqrt(eta(static_cast<Eigen::Index>(k))) * eff.b(k, k);
  return eff.bandwidth_hz * whitened_logdet(r, a) / kLn2;
}

double ul_g(const UlEffectiveChannels& eff, const RVector& eta, std::size_t k, bool include_own) {
  if (eff.orphan[k]) return 0.0;
  CMatrix s = eff.noise_terms[k];
  for (std::size_t j = 0; j < eff.n_users; ++j) {
    if (j == k && !include_own) continue;
    s.noalias() += eta(static_cast<Eigen::Index>(j)) * eff.b(k, j) * eff.b(k, j).adjoint();
  }
  return eff.bandwidth_hz * logdet_hpd(s) / kLn2;
}

RVector ul_g_gradient(const UlEffectiveChannels& eff, const RVector& eta, std::size_t k,
                      bool include_own) {
  RVector grad = RVector::Zero(static_cast<Eigen::Index>(eff.n_users));
  if (eff.orphan[k]) return grad;
  CMatrix s = eff.noise_terms[k];
  for (std::size_t j = 0; j < eff.n_users; ++j) {
    if (j == k && !include_own) continue;
    s.noalias() += eta(static_cast<Eigen::Index>(j)) * eff.b(k, j) * eff.b(k, j).adjoint();
  }
  const CMatrix s_inv = hpd_inverse(s);
  const double scale = eff.bandwidth_hz / kLn2;
  for (std::size_t j = 0; j < eff.n_users; ++j) {
    if (j == k && !include_own) continue;
    grad(static_cast<Eigen::Index>(j)) =
        scale * (s_inv * eff.b(k, j) * eff.b(k, j).adjoint()).trace().real();
  }
  return grad;
}

double ul_surrogate(const UlEffectiveChannels& eff, const RVector& eta, const RVector& anchor,
                    std::size_t k) {
  const RVector grad = ul_g_gradient(eff, anchor, k, false);
  return ul_g(eff, eta, k, true) - ul_g(eff, anchor, k, false) - grad.dot(eta - anchor);
}

}  // namespace ucmimo
