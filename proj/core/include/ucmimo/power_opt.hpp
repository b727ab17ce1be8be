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
 * @file power_opt.hpp
 * @brief Uniform power baselines and successive lower-bound maximization
 * (block-cyclic ascent on linearized log-det surrogates) for downlink and
 * uplink sum-rate and minimum-rate objectives.
 *
 * Downlink budgets are enforced on radiated power:
 *   sum_k eta(k,m) tr(Q_{k,m} Q_{k,m}^H) <= P_max,m.
 * Uplink budgets are the box 0 <= eta(k) <= P_max,k.
 */

#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ucmimo/rates.hpp"
#include "ucmimo/types.hpp"

namespace ucmimo {

struct SolverConfig {
  double outer_tol = 1e-4;   // relative objective change ending a sweep loop
  double inner_tol = 1e-6;   // projected-gradient norm ending a block solve
  int max_outer = 50;        // sweeps over all blocks
  int max_inner = 200;       // gradient iterations per surrogate problem
  int max_sweeps = 10;       // surrogate re-anchorings per block visit
  double step_init = 1.0;
  double armijo_c = 1e-4;
  double armijo_shrink = 0.5;
  std::optional<std::chrono::steady_clock::time_point> deadline;

  void validate() const;
};

enum class BlockMode { kPerAp, kSingle, kPerScalar };

BlockMode parse_block_mode(const std::string& text);
std::string to_string(BlockMode mode);

struct OptimizationTrace {
  std::vector<double> objective_per_iteration;  // bit/s
  int sweeps = 0;
  bool converged = false;
  bool time_capped = false;
  double constraint_violation_max = 0.0;  // W
};

struct OptimizationResult {
  PowerAllocation allocation;
  OptimizationTrace trace;
};

// ---------------------------------------------------------------------------
// Baselines

/// Each AP splits P_max,m evenly over K(m), normalized by tr(Q Q^H).
RMatrix uniform_dl(const AssociationMap& association, const PrecoderSet& precoders,
                   const RVector& p_max_ap, Diagnostics* diagnostics = nullptr);
RMatrix uniform_dl(const DlEffectiveChannels& eff, const RVector& p_max_ap,
                   Diagnostics* diagnostics = nullptr);

/// eta(k) = P_max,k / N_MS.
RVector uniform_ul(std::size_t n_users, int n_ms_antennas, const RVector& p_max_ms);

// ---------------------------------------------------------------------------
// Projections and the block solver

/// Euclidean projection onto { w >= 0, sum w <= budget }.
RVector project_capped_simplex(const RVector& v, double budget);

/// Product of capped simplices over disjoint index groups.
struct FeasibleSet {
  struct Group {
    std::vector<Eigen::Index> indices;
    double budget = 0.0;
  };
  std::vector<Group> groups;

  RVector project(const RVector& x) const;
  double violation(const RVector& x) const;
};

struct BlockSolution {
  RVector x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

using ObjectiveFn = std::function<double(const RVector&)>;
using GradientFn = std::function<RVector(const RVector&)>;

/// Projected gradient ascent with Armijo backtracking. The returned point is
/// feasible and never worse than the (projected) start.
BlockSolution solve_concave_block(const ObjectiveFn& objective, const GradientFn& gradient,
                                  const FeasibleSet& feasible, const RVector& start,
                                  const SolverConfig& cfg);

/// Pieces of a max-min problem: the per-user values and the gradient of one user.
using ValuesFn = std::function<RVector(const RVector&)>;
using UserGradientFn = std::function<RVector(const RVector&, Eigen::Index)>;

/// Projected supergradient ascent on min_k values(x)_k with diminishing,
/// normalized steps. Returns the best iterate seen.
BlockSolution solve_maxmin_block(const ValuesFn& values, const UserGradientFn& gradient,
                                 const FeasibleSet& feasible, const RVector& start,
                                 const SolverConfig& cfg);

// ---------------------------------------------------------------------------
// Successive lower-bound maximization

OptimizationResult slm_sum_rate_dl(const DlEffectiveChannels& eff, double sigma2_z,
                                   const RVector& p_max_ap, const SolverConfig& cfg,
                                   BlockMode block_mode = BlockMode::kPerAp,
                                   const RMatrix* start = nullptr);

OptimizationResult slm_min_rate_dl(const DlEffectiveChannels& eff, double sigma2_z,
                                   const RVector& p_max_ap, const SolverConfig& cfg,
                                   BlockMode block_mode = BlockMode::kPerAp,
                                   const RMatrix* start = nullptr);

OptimizationResult slm_sum_rate_ul(const UlEffectiveChannels& eff, const RVector& p_max_ms,
                                   const SolverConfig& cfg, const RVector* start = nullptr);

OptimizationResult slm_min_rate_ul(const UlEffectiveChannels& eff, const RVector& p_max_ms,
                                   const SolverConfig& cfg, const RVector* start = nullptr);

/// Largest budget excess (W) of a downlink allocation, including negative entries.
double dl_constraint_violation(const DlEffectiveChannels& eff, const RMatrix& eta,
                               const RVector& p_max_ap);
double ul_constraint_violation(const RVector& eta, const RVector& p_max_ms);

/// Per-user rates for a complete allocation.
RVector dl_rates(const DlEffectiveChannels& eff, const RMatrix& eta, double sigma2_z);
RVector ul_rates(const UlEffectiveChannels& eff, const RVector& eta);

}  // namespace ucmimo
