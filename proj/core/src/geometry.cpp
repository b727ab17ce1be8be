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

#include "ucmimo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

namespace ucmimo {

namespace {

constexpr double kCholeskyJitter = 1e-10;

// Maps each point to the index of its first exact duplicate so that
// co-located nodes share one Gaussian draw.
std::pair<std::vector<Point>, std::vector<std::size_t>> unique_points(
    const std::vector<Point>& points) {
  std::vector<Point> unique;
  std::vector<std::size_t> index(points.size());
  std::map<std::pair<double, double>, std::size_t> seen;
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto key = std::make_pair(points[i].x, points[i].y);
    auto [it, inserted] = seen.emplace(key, unique.size());
    if (inserted) unique.push_back(points[i]);
    index[i] = it->second;
  }
  return {std::move(unique), std::move(index)};
}

RVector correlated_draw(const std::vector<Point>& points, double side_m, double d_decorr_m,
                        Rng& rng) {
  auto [unique, index] = unique_points(points);
  CorrelatedGaussian sampler(shadowing_covariance(unique, side_m, d_decorr_m));
  RVector draws = sampler.sample(rng);
  RVector out(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = draws(static_cast<Eigen::Index>(index[i]));
  return out;
}

}  // namespace

void NetworkTopology::validate() const {
  if (!(side_m > 0.0)) throw ParameterError("topology: side_m must be positive");
  if (ap_positions.empty()) throw ParameterError("topology: need at least one AP");
  if (ms_positions.empty()) throw ParameterError("topology: need at least one MS");
  if (n_ap_antennas < 1 || n_ms_antennas < 1)
    throw ParameterError("topology: antenna counts must be >= 1");
  if (multiplexing_orders.size() != ms_positions.size())
    throw ParameterError("topology: one multiplexing order per MS required");
  for (int p : multiplexing_orders) {
    if (p < 1 || n_ms_antennas % p != 0)
      throw ParameterError("topology: multiplexing order " + std::to_string(p) +
                           " does not divide N_MS=" + std::to_string(n_ms_antennas));
  }
  auto inside = [this](const Point& q) {
    return q.x >= 0.0 && q.x < side_m && q.y >= 0.0 && q.y < side_m;
  };
  if (!std::all_of(ap_positions.begin(), ap_positions.end(), inside) ||
      !std::all_of(ms_positions.begin(), ms_positions.end(), inside))
    throw ParameterError("topology: coordinates outside [0, side_m)");
}

void PathLossParams::validate() const {
  if (!(carrier_mhz > 0.0)) throw ParameterError("path loss: carrier frequency must be positive");
  if (!(h_ap_m > 0.0) || !(h_ms_m > 0.0))
    throw ParameterError("path loss: antenna heights must be positive");
  if (!(d0_m > 0.0) || !(d1_m > d0_m)) throw ParameterError("path loss: need 0 < d0 < d1");
  if (!(delta >= 0.0 && delta <= 1.0)) throw ParameterError("path loss: delta must be in [0,1]");
  if (!(sigma_sh_db >= 0.0)) throw ParameterError("path loss: sigma_sh must be >= 0");
  if (!(d_decorr_m > 0.0)) throw ParameterError("path loss: d_decorr must be positive");
  if (!(distance_unit_m > 0.0)) throw ParameterError("path loss: distance unit must be positive");
}

NetworkTopology place_nodes(double side_m, std::size_t n_aps, std::size_t n_users,
                            std::uint64_t seed, const ArrayConfig& arrays) {
  if (!(side_m > 0.0)) throw ParameterError("place_nodes: side_m must be positive");
  if (n_aps < 1 || n_users < 1) throw ParameterError("place_nodes: need M >= 1 and K >= 1");

  Rng rng(seed);
  auto draw = [&] {
    // uniform_real_distribution may round up to the upper bound.
    double v = rng.uniform(0.0, side_m);
    return v < side_m ? v : std::nextafter(side_m, 0.0);
  };

  NetworkTopology topo;
  topo.side_m = side_m;
  topo.n_ap_antennas = arrays.n_ap_antennas;
  topo.n_ms_antennas = arrays.n_ms_antennas;
  topo.ap_positions.reserve(n_aps);
  topo.ms_positions.reserve(n_users);
  for (std::size_t m = 0; m < n_aps; ++m) {
    double x = draw();
    topo.ap_positions.push_back({x, draw()});
  }
  for (std::size_t k = 0; k < n_users; ++k) {
    double x = draw();
    topo.ms_positions.push_back({x, draw()});
  }
  topo.multiplexing_orders.assign(n_users, arrays.streams_per_user);
  topo.validate();
  return topo;
}

double torus_distance(const Point& p, const Point& q, double side_m) {
  double dx = std::abs(p.x - q.x);
  double dy = std::abs(p.y - q.y);
  dx = std::min(dx, side_m - dx);
  dy = std::min(dy, side_m - dy);
  return std::hypot(dx, dy);
}

double path_loss_constant(const PathLossParams& params) {
  if (!(params.carrier_mhz > 0.0) || !(params.h_ap_m > 0.0) || !(params.h_ms_m > 0.0))
    throw ParameterError("path_loss_constant: frequency and heights must be positive");
  const double lf = std::log10(params.carrier_mhz);
  return 46.3 + 33.9 * lf - 13.82 * std::log10(params.h_ap_m) -
         (1.11 * lf - 0.7) * params.h_ms_m + 1.56 * lf - 0.8;
}

double path_loss_db(double d_m, const PathLossParams& params) {
  if (!(d_m > 0.0)) throw ParameterError("path_loss_db: distance must be positive");
  const double L = path_loss_constant(params);
  const double u = params.distance_unit_m;
  const double d = d_m / u;
  const double d0 = params.d0_m / u;
  const double d1 = params.d1_m / u;
  if (d > d1) return -L - 35.0 * std::log10(d);
  if (d > d0) return -L - 10.0 * std::log10(std::pow(d1, 1.5) * d * d);
  return -L - 10.0 * std::log10(std::pow(d1, 1.5) * d0 * d0);
}

RMatrix path_loss_matrix(const NetworkTopology& topology, const PathLossParams& params) {
  const auto K = static_cast<Eigen::Index>(topology.n_users());
  const auto M = static_cast<Eigen::Index>(topology.n_aps());
  RMatrix pl(K, M);
  for (Eigen::Index k = 0; k < K; ++k)
    for (Eigen::Index m = 0; m < M; ++m) {
      // Co-located nodes fall into the constant d <= d0 branch.
      double d = torus_distance(topology.ms_positions[k], topology.ap_positions[m],
                                topology.side_m);
      pl(k, m) = path_loss_db(std::max(d, 1e-9), params);
    }
  return pl;
}

RMatrix shadowing_covariance(const std::vector<Point>& points, double side_m,
                             double d_decorr_m) {
  const auto n = static_cast<Eigen::Index>(points.size());
  RMatrix cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cov(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      double d = torus_distance(points[i], points[j], side_m);
      cov(i, j) = cov(j, i) = std::exp2(-d / d_decorr_m);
    }
  }
  return cov;
}

CorrelatedGaussian::CorrelatedGaussian(const RMatrix& covariance) {
  Eigen::LLT<RMatrix> llt(covariance);
  if (llt.info() != Eigen::Success) {
    RMatrix jittered = covariance;
    jittered.diagonal().array() += kCholeskyJitter;
    llt.compute(jittered);
    jittered_ = true;
    if (llt.info() != Eigen::Success)
      throw InternalError("shadowing covariance is not positive definite even after jitter");
  }
  factor_ = llt.matrixL();
}

RVector CorrelatedGaussian::sample(Rng& rng) const {
  RVector white(factor_.rows());
  for (Eigen::Index i = 0; i < white.size(); ++i) white(i) = rng.normal();
  return factor_ * white;
}

ShadowingComponents shadowing_components(const NetworkTopology& topology,
                                         const PathLossParams& params, std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  ShadowingComponents out;
  out.ap_component =
      correlated_draw(topology.ap_positions, topology.side_m, params.d_decorr_m, rng);
  out.ms_component =
      correlated_draw(topology.ms_positions, topology.side_m, params.d_decorr_m, rng);
  return out;
}

RMatrix mix_shadowing(const ShadowingComponents& components, double delta) {
  const auto K = components.ms_component.size();
  const auto M = components.ap_component.size();
  const double wa = std::sqrt(delta);
  const double wb = std::sqrt(1.0 - delta);
  RMatrix z(K, M);
  for (Eigen::Index k = 0; k < K; ++k)
    for (Eigen::Index m = 0; m < M; ++m)
      z(k, m) = wa * components.ap_component(m) + wb * components.ms_component(k);
  return z;
}

RMatrix shadowing_field(const NetworkTopology& topology, const PathLossParams& params,
                        std::uint64_t seed) {
  return mix_shadowing(shadowing_components(topology, params, seed), params.delta);
}

LargeScaleGains large_scale_gains(const RMatrix& path_loss_db, const RMatrix& z,
                                  double sigma_sh_db) {
  if (path_loss_db.rows() != z.rows() || path_loss_db.cols() != z.cols())
    throw ParameterError("large_scale_gains: shape mismatch between PL and z");
  LargeScaleGains out;
  out.beta = RMatrix(z.rows(), z.cols());
  for (Eigen::Index k = 0; k < z.rows(); ++k)
    for (Eigen::Index m = 0; m < z.cols(); ++m) {
      double b = std::pow(10.0, path_loss_db(k, m) / 10.0) *
                 std::pow(10.0, sigma_sh_db * z(k, m) / 10.0);
      out.beta(k, m) = std::max(b, kMinLargeScaleGain);
    }
  return out;
}

ChannelSet draw_channels(const LargeScaleGains& gains, const NetworkTopology& topology,
                         std::uint64_t seed) {
  const auto K = topology.n_users();
  const auto M = topology.n_aps();
  if (static_cast<std::size_t>(gains.beta.rows()) != K ||
      static_cast<std::size_t>(gains.beta.cols()) != M)
    throw ParameterError("draw_channels: gain matrix does not match topology");

  Rng rng(seed);
  ChannelSet set;
  set.true_channels = UserApGrid<CMatrix>(K, M);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t m = 0; m < M; ++m) {
      const double scale = std::sqrt(gains.beta(static_cast<Eigen::Index>(k),
                                                static_cast<Eigen::Index>(m)));
      set.true_channels(k, m) =
          scale * rng.complex_normal_matrix(topology.n_ap_antennas, topology.n_ms_antennas);
    }
  return set;
}

}  // namespace ucmimo
