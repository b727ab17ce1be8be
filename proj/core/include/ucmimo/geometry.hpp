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
 * @file geometry.hpp
 * @brief Node placement on a wrap-around square, three-slope path loss,
 * two-component correlated shadowing and i.i.d. Rayleigh small-scale fading.
 */

#pragma once

#include <cstdint>
#include <vector>

#include "ucmimo/random.hpp"
#include "ucmimo/types.hpp"

namespace ucmimo {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Antenna and stream configuration shared by every node of a kind.
struct ArrayConfig {
  int n_ap_antennas = 4;
  int n_ms_antennas = 2;
  int streams_per_user = 2;
};

struct NetworkTopology {
  double side_m = 0.0;
  std::vector<Point> ap_positions;
  std::vector<Point> ms_positions;
  int n_ap_antennas = 1;
  int n_ms_antennas = 1;
  std::vector<int> multiplexing_orders;  // P_k, one per user

  std::size_t n_aps() const { return ap_positions.size(); }
  std::size_t n_users() const { return ms_positions.size(); }

  /// Throws ParameterError if any structural invariant is broken.
  void validate() const;
};

struct PathLossParams {
  double carrier_mhz = 1900.0;
  double h_ap_m = 15.0;
  double h_ms_m = 1.65;
  double d0_m = 10.0;
  double d1_m = 50.0;
  double sigma_sh_db = 8.0;
  double delta = 0.5;
  double d_decorr_m = 100.0;
  // Length (in metres) of one distance unit inside the log10 terms of the
  // path-loss law. 1 evaluates the law in metres; 1000 in kilometres.
  double distance_unit_m = 1.0;

  void validate() const;
};

/// Uniform i.i.d. placement of M APs and K MSs over [0, side_m)^2.
NetworkTopology place_nodes(double side_m, std::size_t n_aps, std::size_t n_users,
                            std::uint64_t seed, const ArrayConfig& arrays = {});

/// Euclidean distance with per-axis wrap-around.
double torus_distance(const Point& p, const Point& q, double side_m);

/// Frequency/height dependent constant L (dB) of the three-slope law.
double path_loss_constant(const PathLossParams& params);

/// Three-slope path loss PL(d) in dB (a negative number).
double path_loss_db(double d_m, const PathLossParams& params);

/// K x M matrix of PL_{k,m} in dB using torus distances.
RMatrix path_loss_matrix(const NetworkTopology& topology, const PathLossParams& params);

/// Covariance 2^(-d/d_decorr) over a set of points with torus distances.
RMatrix shadowing_covariance(const std::vector<Point>& points, double side_m, double d_decorr_m);

/// Zero-mean Gaussian vector sampler with a fixed covariance.
class CorrelatedGaussian {
 public:
  explicit CorrelatedGaussian(const RMatrix& covariance);

  RVector sample(Rng& rng) const;
  const RMatrix& factor() const { return factor_; }
  bool jittered() const { return jittered_; }

 private:
  RMatrix factor_;
  bool jittered_ = false;
};

/// The two independent shadowing components before mixing.
struct ShadowingComponents {
  RVector ap_component;  // a_m, length M
  RVector ms_component;  // b_k, length K
};

ShadowingComponents shadowing_components(const NetworkTopology& topology,
                                         const PathLossParams& params, std::uint64_t seed);

/// z_{k,m} = sqrt(delta) a_m + sqrt(1 - delta) b_k as a K x M matrix.
RMatrix shadowing_field(const NetworkTopology& topology, const PathLossParams& params,
                        std::uint64_t seed);
RMatrix mix_shadowing(const ShadowingComponents& components, double delta);

struct LargeScaleGains {
  RMatrix beta;  // K x M linear power gains
};

inline constexpr double kMinLargeScaleGain = 1e-30;

LargeScaleGains large_scale_gains(const RMatrix& path_loss_db, const RMatrix& z,
                                  double sigma_sh_db);

struct ChannelSet {
  UserApGrid<CMatrix> true_channels;       // G_{k,m}, N_AP x N_MS
  UserApGrid<CMatrix> estimated_channels;  // empty until estimated

  std::size_t n_users() const { return true_channels.n_users(); }
  std::size_t n_aps() const { return true_channels.n_aps(); }
  bool has_estimates() const { return !estimated_channels.empty(); }
};

ChannelSet draw_channels(const LargeScaleGains& gains, const NetworkTopology& topology,
                         std::uint64_t seed);

}  // namespace ucmimo
