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

#include "ucmimo/power_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace ucmimo {

namespace {

// Gradients are taken with every normalized power at least this large.
constexpr double kGradientFloor = 1e-12;
constexpr int kMaxBacktracks = 40;
constexpr double kTieTolerance = 1e-3;

bool all_finite(const RVector& v) { return v.allFinite(); }

// ---------------------------------------------------------------------------
// A power-control problem seen by the SLM driver. Variables are normalized to
// fractions of their budget and rates are expressed in bit/s/Hz.

struct Block {
  std::vector<Eigen::Index> vars;  // indices into the full variable vector
  FeasibleSet feasible;            // over the local (block) coordinates
};

class BlockModel {
 public:
  virtual ~BlockModel() = default;
  virtual RVector surrogate_values(const RVector& xb) const = 0;
  virtual RVector surrogate_gradient(const RVector& xb, Eigen::Index k) const = 0;
  virtual RVector rates(const RVector& xb) const = 0;
};

class SlmProblem {
 public:
  virtual ~SlmProblem() = default;
  virtual std::size_t n_users() const = 0;
  virtual bool counted(std::size_t k) const = 0;
  virtual double bandwidth() const = 0;
  virtual RVector rates(const RVector& x) const = 0;
  virtual std::size_t n_blocks() const = 0;
  virtual Block block(std::size_t b, const RVector& x) const = 0;
  virtual std::unique_ptr<BlockModel> model(const Block& block, const RVector& x) const = 0;
};

RVector gather(const RVector& x, const std::vector<Eigen::Index>& idx) {
  RVector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = x(idx[i]);
  return out;
}

void scatter(RVector& x, const std::vector<Eigen::Index>& idx, const RVector& xb) {
  for (std::size_t i = 0; i < idx.size(); ++i) x(idx[i]) = xb(static_cast<Eigen::Index>(i));
}

enum class Objective { kSum, kMin };

double objective_of(const SlmProblem& problem, const RVector& rates, Objective objective) {
  if (objective == Objective::kSum) return rates.sum();
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < problem.n_users(); ++k)
    if (problem.counted(k)) lo = std::min(lo, rates(static_cast<Eigen::Index>(k)));
  return std::isfinite(lo) ? lo : 0.0;
}

bool past_deadline(const SolverConfig& cfg) {
  return cfg.deadline && std::chrono::steady_clock::now() > *cfg.deadline;
}

// Block-cyclic successive lower-bound maximization. Each surrogate optimum is
// accepted only if the true objective does not decrease; otherwise the step is
// halved back toward the anchor, which the gradient match at the anchor makes
// an ascent direction.
RVector run_slm(const SlmProblem& problem, RVector x, const SolverConfig& cfg, Objective objective,
                OptimizationTrace& trace) {
  const double bw = problem.bandwidth();
  double fx = objective_of(problem, problem.rates(x), objective);
  trace.objective_per_iteration.push_back(fx * bw);

  std::vector<Eigen::Index> counted;
  for (std::size_t k = 0; k < problem.n_users(); ++k)
    if (problem.counted(k)) counted.push_back(static_cast<Eigen::Index>(k));

  for (int sweep = 0; sweep < cfg.max_outer; ++sweep) {
    const double f_sweep_start = fx;
    for (std::size_t b = 0; b < problem.n_blocks(); ++b) {
      for (int refine = 0; refine < cfg.max_sweeps; ++refine) {
        if (past_deadline(cfg)) {
          trace.time_capped = true;
          return x;
        }
        Block block = problem.block(b, x);
        if (block.vars.empty()) break;
        auto model = problem.model(block, x);
        const RVector xb0 = gather(x, block.vars);
        auto true_objective = [&](const RVector& xb) {
          return objective_of(problem, model->rates(xb), objective);
        };

        BlockSolution sol;
        if (objective == Objective::kSum) {
          sol = solve_concave_block(
              [&](const RVector& xb) { return model->surrogate_values(xb).sum(); },
              [&](const RVector& xb) {
                RVector g = RVector::Zero(xb.size());
                for (std::size_t k = 0; k < problem.n_users(); ++k)
                  g += model->surrogate_gradient(xb, static_cast<Eigen::Index>(k));
                return g;
              },
              block.feasible, xb0, cfg);
        } else {
          if (counted.empty()) break;
          sol = solve_maxmin_block(
              [&](const RVector& xb) {
                const RVector all = model->surrogate_values(xb);
                RVector v(static_cast<Eigen::Index>(counted.size()));
                for (std::size_t i = 0; i < counted.size(); ++i) v(static_cast<Eigen::Index>(i)) = all(counted[i]);
                return v;
              },
              [&](const RVector& xb, Eigen::Index i) { return model->surrogate_gradient(xb, counted[static_cast<std::size_t>(i)]); },
              block.feasible, xb0, cfg);
        }

        RVector candidate = sol.x;
        double f_new = true_objective(candidate);
        if (!(f_new >= fx)) {
          const RVector dir = candidate - xb0;
          double s = 0.5;
          bool found = false;
          for (int i = 0; i < kMaxBacktracks; ++i, s *= 0.5) {
            RVector trial = xb0 + s * dir;
            double ft = true_objective(trial);
            if (ft >= fx) {
              candidate = std::move(trial);
              f_new = ft;
              found = true;
              break;
            }
          }
          if (!found) {
            candidate = xb0;
            f_new = fx;
          }
        }
        const double gain = f_new - fx;
        scatter(x, block.vars, candidate);
        fx = f_new;
        trace.objective_per_iteration.push_back(fx * bw);
        if (gain <= cfg.outer_tol * std::abs(fx)) break;
      }
    }
    trace.sweeps = sweep + 1;
    if (fx - f_sweep_start <= cfg.outer_tol * std::abs(f_sweep_start)) {
      trace.converged = true;
      break;
    }
  }
  return x;
}

// ---------------------------------------------------------------------------
// Downlink

class DlProblem final : public SlmProblem {
 public:
  DlProblem(const DlEffectiveChannels& eff, double sigma2_z, const RVector& p_max_ap,
            BlockMode mode)
      : eff_(eff), sigma2_z_(sigma2_z), p_max_(p_max_ap), mode_(mode) {
    if (static_cast<std::size_t>(p_max_ap.size()) != eff.n_aps)
      throw ParameterError("downlink optimizer: one power budget per AP required");
    for (std::size_t m = 0; m < eff.n_aps; ++m) {
      std::vector<Eigen::Index> at_ap;
      for (const auto& v : dl_ap_block(eff, m)) {
        const double w = eff.precoder_power(static_cast<std::size_t>(v.user), m);
        if (!(w > 0.0)) continue;
        at_ap.push_back(static_cast<Eigen::Index>(vars_.size()));
        vars_.push_back(v);
        scale_.push_back(p_max_(static_cast<Eigen::Index>(m)) / w);
      }
      ap_vars_.push_back(std::move(at_ap));
    }
  }

  std::size_t n_users() const override { return eff_.n_users; }
  bool counted(std::size_t k) const override { return !eff_.serving_aps[k].empty(); }
  double bandwidth() const override { return eff_.bandwidth_hz; }

  std::size_t n_blocks() const override {
    switch (mode_) {
      case BlockMode::kPerAp:
        return eff_.n_aps;
      case BlockMode::kSingle:
        return 1;
      case BlockMode::kPerScalar:
        return vars_.size();
    }
    return 0;
  }

  Block block(std::size_t b, const RVector& x) const override {
    Block out;
    switch (mode_) {
      case BlockMode::kPerAp: {
        out.vars = ap_vars_[b];
        FeasibleSet::Group g{{}, 1.0};
        for (std::size_t i = 0; i < out.vars.size(); ++i) g.indices.push_back(static_cast<Eigen::Index>(i));
        out.feasible.groups.push_back(std::move(g));
        break;
      }
      case BlockMode::kSingle: {
        for (const auto& at_ap : ap_vars_) {
          FeasibleSet::Group g{{}, 1.0};
          for (auto idx : at_ap) {
            g.indices.push_back(static_cast<Eigen::Index>(out.vars.size()));
            out.vars.push_back(idx);
          }
          if (!g.indices.empty()) out.feasible.groups.push_back(std::move(g));
        }
        break;
      }
      case BlockMode::kPerScalar: {
        const auto idx = static_cast<Eigen::Index>(b);
        const auto m = static_cast<std::size_t>(vars_[b].ap);
        double others = 0.0;
        for (auto other : ap_vars_[m])
          if (other != idx) others += x(other);
        out.vars = {idx};
        out.feasible.groups.push_back({{0}, std::max(0.0, 1.0 - others)});
        break;
      }
    }
    return out;
  }

  RVector rates(const RVector& x) const override {
    return dl_rates(eff_, to_eta(x), sigma2_z_) / eff_.bandwidth_hz;
  }

  std::unique_ptr<BlockModel> model(const Block& block, const RVector& x) const override;

  RMatrix to_eta(const RVector& x) const {
    RMatrix eta = RMatrix::Zero(static_cast<Eigen::Index>(eff_.n_users), static_cast<Eigen::Index>(eff_.n_aps));
    for (std::size_t i = 0; i < vars_.size(); ++i)
      eta(vars_[i].user, vars_[i].ap) = x(static_cast<Eigen::Index>(i)) * scale_[i];
    return eta;
  }

  RVector from_eta(const RMatrix& eta) const {
    RVector x(static_cast<Eigen::Index>(vars_.size()));
    for (std::size_t i = 0; i < vars_.size(); ++i)
      x(static_cast<Eigen::Index>(i)) = eta(vars_[i].user, vars_[i].ap) / scale_[i];
    return x;
  }

  const DlEffectiveChannels& eff() const { return eff_; }
  double sigma2_z() const { return sigma2_z_; }
  const BlockVar& var(Eigen::Index i) const { return vars_[static_cast<std::size_t>(i)]; }
  double scale(Eigen::Index i) const { return scale_[static_cast<std::size_t>(i)]; }

 private:
  const DlEffectiveChannels& eff_;
  double sigma2_z_;
  RVector p_max_;
  BlockMode mode_;
  std::vector<BlockVar> vars_;
  std::vector<double> scale_;  // eta = x * scale
  std::vector<std::vector<Eigen::Index>> ap_vars_;
};

class DlBlockModel final : public BlockModel {
 public:
  DlBlockModel(const DlProblem& problem, const Block& block, const RVector& x)
      : problem_(problem),
        evaluator_(problem.eff(), problem.sigma2_z(), problem.to_eta(x), block_vars(problem, block)) {
    const auto nb = static_cast<Eigen::Index>(block.vars.size());
    scale_.resize(nb);
    floor_.resize(nb);
    for (Eigen::Index i = 0; i < nb; ++i) {
      scale_(i) = problem.scale(block.vars[static_cast<std::size_t>(i)]);
      floor_(i) = kGradientFloor * scale_(i);
    }
    anchor_ = gather(x, block.vars).cwiseProduct(scale_);
    const auto K = problem.n_users();
    g2_.resize(K);
    grad2_.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
      g2_[k] = evaluator_.g(k, false, anchor_);
      grad2_[k] = evaluator_.g_gradient(k, false, anchor_, floor_);
    }
  }

  RVector surrogate_values(const RVector& xb) const override {
    const RVector eta = xb.cwiseProduct(scale_);
    const auto K = problem_.n_users();
    RVector out(static_cast<Eigen::Index>(K));
    for (std::size_t k = 0; k < K; ++k)
      out(static_cast<Eigen::Index>(k)) =
          (evaluator_.g(k, true, eta) - g2_[k] - grad2_[k].dot(eta - anchor_)) / bw();
    return out;
  }

  RVector surrogate_gradient(const RVector& xb, Eigen::Index k) const override {
    const RVector eta = xb.cwiseProduct(scale_);
    const auto ku = static_cast<std::size_t>(k);
    return (evaluator_.g_gradient(ku, true, eta, floor_) - grad2_[ku]).cwiseProduct(scale_) / bw();
  }

  RVector rates(const RVector& xb) const override {
    const RVector eta = xb.cwiseProduct(scale_);
    const auto K = problem_.n_users();
    RVector out(static_cast<Eigen::Index>(K));
    for (std::size_t k = 0; k < K; ++k) out(static_cast<Eigen::Index>(k)) = evaluator_.rate(k, eta) / bw();
    return out;
  }

 private:
  static std::vector<BlockVar> block_vars(const DlProblem& problem, const Block& block) {
    std::vector<BlockVar> out;
    out.reserve(block.vars.size());
    for (auto i : block.vars) out.push_back(problem.var(i));
    return out;
  }
  double bw() const { return problem_.eff().bandwidth_hz; }

  const DlProblem& problem_;
  DlBlockEvaluator evaluator_;
  RVector scale_;
  RVector floor_;
  RVector anchor_;
  std::vector<double> g2_;
  std::vector<RVector> grad2_;
};

std::unique_ptr<BlockModel> DlProblem::model(const Block& block, const RVector& x) const {
  return std::make_unique<DlBlockModel>(*this, block, x);
}

// ---------------------------------------------------------------------------
// Uplink: a single block of K box-constrained powers.

class UlProblem final : public SlmProblem {
 public:
  UlProblem(const UlEffectiveChannels& eff, const RVector& p_max_ms) : eff_(eff), p_max_(p_max_ms) {
    if (static_cast<std::size_t>(p_max_ms.size()) != eff.n_users)
      throw ParameterError("uplink optimizer: one power budget per MS required");
  }

  std::size_t n_users() const override { return eff_.n_users; }
  bool counted(std::size_t k) const override { return !eff_.orphan[k]; }
  double bandwidth() const override { return eff_.bandwidth_hz; }
  std::size_t n_blocks() const override { return 1; }

  Block block(std::size_t, const RVector&) const override {
    Block out;
    for (std::size_t k = 0; k < eff_.n_users; ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      out.vars.push_back(i);
      out.feasible.groups.push_back({{i}, 1.0});
    }
    return out;
  }

  RVector rates(const RVector& x) const override {
    return ul_rates(eff_, x.cwiseProduct(p_max_)) / eff_.bandwidth_hz;
  }

  std::unique_ptr<BlockModel> model(const Block& block, const RVector& x) const override;

  const UlEffectiveChannels& eff() const { return eff_; }
  const RVector& p_max() const { return p_max_; }

 private:
  const UlEffectiveChannels& eff_;
  RVector p_max_;
};

class UlBlockModel final : public BlockModel {
 public:
  UlBlockModel(const UlProblem& problem, const RVector& x)
      : problem_(problem), anchor_(x.cwiseProduct(problem.p_max())) {
    const auto K = problem.n_users();
    g2_.resize(K);
    grad2_.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
      g2_[k] = ul_g(problem.eff(), anchor_, k, false);
      grad2_[k] = ul_g_gradient(problem.eff(), anchor_, k, false);
    }
  }

  RVector surrogate_values(const RVector& xb) const override {
    const RVector eta = xb.cwiseProduct(problem_.p_max());
    const auto K = problem_.n_users();
    RVector out(static_cast<Eigen::Index>(K));
    for (std::size_t k = 0; k < K; ++k)
      out(static_cast<Eigen::Index>(k)) =
          (ul_g(problem_.eff(), eta, k, true) - g2_[k] - grad2_[k].dot(eta - anchor_)) / bw();
    return out;
  }

  RVector surrogate_gradient(const RVector& xb, Eigen::Index k) const override {
    const RVector eta = xb.cwiseProduct(problem_.p_max());
    const auto ku = static_cast<std::size_t>(k);
    return (ul_g_gradient(problem_.eff(), eta, ku, true) - grad2_[ku]).cwiseProduct(problem_.p_max()) / bw();
  }

  RVector rates(const RVector& xb) const override { return problem_.rates(xb); }

 private:
  double bw() const { return problem_.eff().bandwidth_hz; }

  const UlProblem& problem_;
  RVector anchor_;
  std::vector<double> g2_;
  std::vector<RVector> grad2_;
};

std::unique_ptr<BlockModel> UlProblem::model(const Block&, const RVector& x) const {
  return std::make_unique<UlBlockModel>(*this, x);
}

OptimizationResult optimize_dl(const DlEffectiveChannels& eff, double sigma2_z,
                               const RVector& p_max_ap, const SolverConfig& cfg, BlockMode mode,
                               const RMatrix* start, Objective objective) {
  cfg.validate();
  DlProblem problem(eff, sigma2_z, p_max_ap, mode);
  const RMatrix eta0 = start ? *start : uniform_dl(eff, p_max_ap);
  OptimizationResult result;
  RVector x = run_slm(problem, problem.from_eta(eta0), cfg, objective, result.trace);
  result.allocation.dl = problem.to_eta(x);
  result.trace.constraint_violation_max = dl_constraint_violation(eff, result.allocation.dl, p_max_ap);
  return result;
}

OptimizationResult optimize_ul(const UlEffectiveChannels& eff, const RVector& p_max_ms,
                               const SolverConfig& cfg, const RVector* start, Objective objective) {
  cfg.validate();
  UlProblem problem(eff, p_max_ms);
  const RVector eta0 = start ? *start : uniform_ul(eff.n_users, eff.n_ms_antennas, p_max_ms);
  OptimizationResult result;
  RVector x = run_slm(problem, eta0.cwiseQuotient(p_max_ms), cfg, objective, result.trace);
  result.allocation.ul = x.cwiseProduct(p_max_ms);
  result.trace.constraint_violation_max = ul_constraint_violation(result.allocation.ul, p_max_ms);
  return result;
}

}  // namespace

// ---------------------------------------------------------------------------

void SolverConfig::validate() const {
  if (!(outer_tol > 0.0) || !(inner_tol > 0.0))
    throw ParameterError("solver: tolerances must be positive");
  if (max_outer < 1 || max_inner < 1 || max_sweeps < 1)
    throw ParameterError("solver: iteration caps must be >= 1");
  if (!(armijo_c > 0.0 && armijo_c < 1.0) || !(armijo_shrink > 0.0 && armijo_shrink < 1.0))
    throw ParameterError("solver: Armijo constants must lie in (0, 1)");
  if (!(step_init > 0.0)) throw ParameterError("solver: step_init must be positive");
}

BlockMode parse_block_mode(const std::string& text) {
  if (text == "per_ap") return BlockMode::kPerAp;
  if (text == "single") return BlockMode::kSingle;
  if (text == "per_scalar") return BlockMode::kPerScalar;
  throw ParameterError("unknown block mode '" + text + "'");
}

std::string to_string(BlockMode mode) {
  switch (mode) {
    case BlockMode::kPerAp:
      return "per_ap";
    case BlockMode::kSingle:
      return "single";
    case BlockMode::kPerScalar:
      return "per_scalar";
  }
  return "per_ap";
}

RMatrix uniform_dl(const AssociationMap& association, const PrecoderSet& precoders,
                   const RVector& p_max_ap, Diagnostics* diagnostics) {
  const auto K = association.n_users();
  const auto M = association.n_aps();
  if (static_cast<std::size_t>(p_max_ap.size()) != M)
    throw ParameterError("uniform_dl: one power budget per AP required");
  RMatrix eta = RMatrix::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(M));
  for (std::size_t m = 0; m < M; ++m) {
    const auto& served = association.served_by_ap[m];
    const double share = p_max_ap(static_cast<Eigen::Index>(m)) / static_cast<double>(served.size());
    for (int k : served) {
      const double w = precoders.precoders(static_cast<std::size_t>(k), m).squaredNorm();
      if (!(w > 0.0)) {
        if (diagnostics) diagnostics->warn("uniform_dl: zero-trace precoder, user left unserved");
        continue;
      }
      eta(k, static_cast<Eigen::Index>(m)) = share / w;
    }
  }
  return eta;
}

RMatrix uniform_dl(const DlEffectiveChannels& eff, const RVector& p_max_ap, Diagnostics* diagnostics) {
  if (static_cast<std::size_t>(p_max_ap.size()) != eff.n_aps)
    throw ParameterError("uniform_dl: one power budget per AP required");
  RMatrix eta = RMatrix::Zero(static_cast<Eigen::Index>(eff.n_users), static_cast<Eigen::Index>(eff.n_aps));
  for (std::size_t m = 0; m < eff.n_aps; ++m) {
    const auto served = dl_ap_block(eff, m);
    for (const auto& v : served) {
      const double w = eff.precoder_power(static_cast<std::size_t>(v.user), m);
      if (!(w > 0.0)) {
        if (diagnostics) diagnostics->warn("uniform_dl: zero-trace precoder, user left unserved");
        continue;
      }
      eta(v.user, v.ap) = p_max_ap(static_cast<Eigen::Index>(m)) / (static_cast<double>(served.size()) * w);
    }
  }
  return eta;
}

RVector uniform_ul(std::size_t n_users, int n_ms_antennas, const RVector& p_max_ms) {
  if (static_cast<std::size_t>(p_max_ms.size()) != n_users)
    throw ParameterError("uniform_ul: one power budget per MS required");
  if (n_ms_antennas < 1) throw ParameterError("uniform_ul: N_MS must be >= 1");
  return p_max_ms / static_cast<double>(n_ms_antennas);
}

namespace {

// Threshold tau with sum max(v - tau, 0) = budget.
double simplex_threshold(const RVector& v, double budget) {
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cumulative += sorted[i];
    const double candidate = (cumulative - budget) / static_cast<double>(i + 1);
    if (i + 1 == sorted.size() || sorted[i + 1] <= candidate) return candidate;
  }
  return 0.0;
}

RVector project_unit_simplex(const RVector& v) {
  return (v.array() - simplex_threshold(v, 1.0)).cwiseMax(0.0).matrix();
}

// Minimum-norm point of the convex hull of `vectors`, by projected gradient on
// the weight simplex. Gives the steepest ascent direction of a pointwise minimum.
RVector min_norm_combination(const std::vector<RVector>& vectors) {
  if (vectors.size() == 1) return vectors.front();
  const auto n = static_cast<Eigen::Index>(vectors.size());
  RMatrix basis(vectors.front().size(), n);
  for (Eigen::Index i = 0; i < n; ++i) basis.col(i) = vectors[static_cast<std::size_t>(i)];
  const RMatrix gram = basis.transpose() * basis;
  const double lipschitz = gram.trace();
  if (!(lipschitz > 0.0)) return RVector::Zero(basis.rows());
  RVector w = RVector::Constant(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < 100; ++it) w = project_unit_simplex(w - (gram * w) / lipschitz);
  return basis * w;
}

}  // namespace

RVector project_capped_simplex(const RVector& v, double budget) {
  if (budget < 0.0) throw ParameterError("project_capped_simplex: negative budget");
  RVector clamped = v.cwiseMax(0.0);
  if (clamped.sum() <= budget) return clamped;
  return (v.array() - simplex_threshold(v, budget)).cwiseMax(0.0).matrix();
}

RVector FeasibleSet::project(const RVector& x) const {
  RVector out = x;
  for (const auto& g : groups) {
    RVector sub(static_cast<Eigen::Index>(g.indices.size()));
    for (std::size_t i = 0; i < g.indices.size(); ++i) sub(static_cast<Eigen::Index>(i)) = x(g.indices[i]);
    sub = project_capped_simplex(sub, g.budget);
    for (std::size_t i = 0; i < g.indices.size(); ++i) out(g.indices[i]) = sub(static_cast<Eigen::Index>(i));
  }
  return out;
}

double FeasibleSet::violation(const RVector& x) const {
  double worst = std::max(0.0, -x.minCoeff());
  for (const auto& g : groups) {
    double s = 0.0;
    for (auto i : g.indices) s += x(i);
    worst = std::max(worst, s - g.budget);
  }
  return worst;
}

BlockSolution solve_concave_block(const ObjectiveFn& objective, const GradientFn& gradient,
                                  const FeasibleSet& feasible, const RVector& start,
                                  const SolverConfig& cfg) {
  BlockSolution sol;
  sol.x = feasible.project(start);
  sol.value = objective(sol.x);
  if (!std::isfinite(sol.value)) throw ParameterError("solve_concave_block: objective not finite at start");

  double step = cfg.step_init;
  for (int it = 0; it < cfg.max_inner; ++it) {
    sol.iterations = it + 1;
    const RVector g = gradient(sol.x);
    if (!all_finite(g)) break;
    const RVector pg = feasible.project(sol.x + g) - sol.x;
    if (pg.lpNorm<Eigen::Infinity>() < cfg.inner_tol) {
      sol.converged = true;
      break;
    }
    bool accepted = false;
    RVector y;
    double fy = 0.0;
    while (step > 1e-18) {
      y = feasible.project(sol.x + step * g);
      fy = objective(y);
      if (std::isfinite(fy) && fy >= sol.value + cfg.armijo_c * g.dot(y - sol.x)) {
        accepted = true;
        break;
      }
      step *= cfg.armijo_shrink;
    }
    if (!accepted || (y - sol.x).lpNorm<Eigen::Infinity>() == 0.0) {
      sol.converged = accepted;
      break;
    }
    sol.x = std::move(y);
    sol.value = fy;
    step = std::min(step / cfg.armijo_shrink, 1e12);
  }
  return sol;
}

BlockSolution solve_maxmin_block(const ValuesFn& values, const UserGradientFn& gradient,
                                 const FeasibleSet& feasible, const RVector& start,
                                 const SolverConfig& cfg) {
  BlockSolution best;
  best.x = feasible.project(start);
  best.value = values(best.x).minCoeff();
  if (!std::isfinite(best.value)) throw ParameterError("solve_maxmin_block: objective not finite at start");

  double scale = 0.0;
  for (const auto& g : feasible.groups) scale = std::max(scale, g.budget);
  if (!(scale > 0.0)) return best;
  const double alpha0 = 0.1 * cfg.step_init * scale;

  RVector x = best.x;
  for (int it = 0; it < cfg.max_inner; ++it) {
    best.iterations = it + 1;
    const RVector v = values(x);
    const double lowest = v.minCoeff();
    std::vector<RVector> active;
    for (Eigen::Index k = 0; k < v.size(); ++k)
      if (v(k) <= lowest + kTieTolerance * std::abs(lowest)) active.push_back(gradient(x, k));
    const RVector g = min_norm_combination(active);
    const double n = g.norm();
    if (!(n > 0.0) || !std::isfinite(n)) break;
    x = feasible.project(x + (alpha0 / std::sqrt(static_cast<double>(it) + 1.0)) * g / n);
    const double h = values(x).minCoeff();
    if (h > best.value) {
      best.value = h;
      best.x = x;
    }
  }
  best.converged = true;
  return best;
}

OptimizationResult slm_sum_rate_dl(const DlEffectiveChannels& eff, double sigma2_z,
                                   const RVector& p_max_ap, const SolverConfig& cfg,
                                   BlockMode block_mode, const RMatrix* start) {
  return optimize_dl(eff, sigma2_z, p_max_ap, cfg, block_mode, start, Objective::kSum);
}

OptimizationResult slm_min_rate_dl(const DlEffectiveChannels& eff, double sigma2_z,
                                   const RVector& p_max_ap, const SolverConfig& cfg,
                                   BlockMode block_mode, const RMatrix* start) {
  return optimize_dl(eff, sigma2_z, p_max_ap, cfg, block_mode, start, Objective::kMin);
}

OptimizationResult slm_sum_rate_ul(const UlEffectiveChannels& eff, const RVector& p_max_ms,
                                   const SolverConfig& cfg, const RVector* start) {
  return optimize_ul(eff, p_max_ms, cfg, start, Objective::kSum);
}

OptimizationResult slm_min_rate_ul(const UlEffectiveChannels& eff, const RVector& p_max_ms,
                                   const SolverConfig& cfg, const RVector* start) {
  return optimize_ul(eff, p_max_ms, cfg, start, Objective::kMin);
}

double dl_constraint_violation(const DlEffectiveChannels& eff, const RMatrix& eta,
                               const RVector& p_max_ap) {
  double worst = 0.0;
  for (std::size_t m = 0; m < eff.n_aps; ++m) {
    worst = std::max(worst, dl_radiated_power(eff, eta, m) - p_max_ap(static_cast<Eigen::Index>(m)));
    for (std::size_t k = 0; k < eff.n_users; ++k) {
      const double e = eta(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m));
      if (eff.slot_of(k, m) < 0) worst = std::max(worst, std::abs(e));
      else worst = std::max(worst, -e * eff.precoder_power(k, m));
    }
  }
  return worst;
}

double ul_constraint_violation(const RVector& eta, const RVector& p_max_ms) {
  double worst = std::max(0.0, -eta.minCoeff());
  return std::max(worst, (eta - p_max_ms).maxCoeff());
}

RVector dl_rates(const DlEffectiveChannels& eff, const RMatrix& eta, double sigma2_z) {
  RVector r(static_cast<Eigen::Index>(eff.n_users));
  DlBlockEvaluator evaluator(eff, sigma2_z, eta, {});
  const RVector none;
  for (std::size_t k = 0; k < eff.n_users; ++k) r(static_cast<Eigen::Index>(k)) = evaluator.rate(k, none);
  return r;
}

RVector ul_rates(const UlEffectiveChannels& eff, const RVector& eta) {
  RVector r(static_cast<Eigen::Index>(eff.n_users));
  for (std::size_t k = 0; k < eff.n_users; ++k) r(static_cast<Eigen::Index>(k)) = ul_user_rate(eff, eta, k);
  return r;
}

}  // namespace ucmimo
