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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "ucmimo/power_opt.hpp"
#include "ucmimo/training.hpp"

using namespace ucmimo;

namespace {

constexpr double kW = 20e6;

struct Instance {
  DlEffectiveChannels dl;
  UlEffectiveChannels ul;
  double sigma2 = 0.1;
  RVector p_ap;
  RVector p_ms;
};

Instance make_instance(const UserApGrid<CMatrix>& channels, const std::vector<int>& streams,
                       const AssociationMode& mode, double sigma2, double p_ap, double p_ms) {
  Instance in;
  ChannelSet set;
  set.true_channels = channels;
  assume_perfect_csi(set);
  const auto assoc = build_association(set.estimated_channels, mode);
  std::vector<SpreadingMatrix> spreading;
  const int n_ms = static_cast<int>(channels(0, 0).cols());
  for (int p : streams) spreading.push_back(spreading_matrix(p, n_ms));
  in.dl = dl_effective_channels(set, assoc, spreading, kW);
  in.ul = ul_effective_channels(set, assoc, spreading, sigma2, kW);
  in.sigma2 = sigma2;
  in.p_ap = RVector::Constant(static_cast<Eigen::Index>(channels.n_aps()), p_ap);
  in.p_ms = RVector::Constant(static_cast<Eigen::Index>(channels.n_users()), p_ms);
  return in;
}

Instance random_instance(std::uint64_t seed, std::size_t K, std::size_t M,
                         const AssociationMode& mode = AssociationMode::cell_free(), int n_ap = 4, int n_ms = 2,
                         double sigma2 = 0.1) {
  Rng rng(seed);
  UserApGrid<CMatrix> g(K, M);
  for (auto& c : g.cells()) c = rng.complex_normal_matrix(n_ap, n_ms) * std::exp(0.7 * rng.normal());
  std::vector<int> streams(K);
  for (auto& p : streams) p = (n_ms == 2 && rng.uniform(0, 1) < 0.5) ? 2 : 1;
  return make_instance(g, streams, mode, sigma2, 1.0, 1.0);
}

double sum_of(const RVector& r) { return r.sum(); }
double min_of(const RVector& r) { return r.minCoeff(); }

void check_monotone(const OptimizationTrace& t) {
  for (std::size_t i = 1; i < t.objective_per_iteration.size(); ++i)
    CHECK(t.objective_per_iteration[i] >= t.objective_per_iteration[i - 1] * (1.0 - 1e-6));
}

// Exhaustive search over the normalized budget fractions x(k,m) in [0,1] with
// sum_k x(k,m) <= 1, 20 points per axis and one refinement around the best cell.
double dl_grid_oracle(const Instance& in, bool min_rate) {
  const std::size_t K = in.dl.n_users, M = in.dl.n_aps;
  const std::size_t n = K * M;
  auto evaluate = [&](const std::vector<double>& x) {
    RMatrix eta = RMatrix::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(M));
    for (std::size_t m = 0; m < M; ++m) {
      double used = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        used += x[k * M + m];
        const double w = in.dl.precoder_power(k, m);
        if (w > 0) eta(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) = x[k * M + m] * in.p_ap(0) / w;
      }
      if (used > 1.0 + 1e-12) return -std::numeric_limits<double>::infinity();
    }
    const RVector r = dl_rates(in.dl, eta, in.sigma2);
    return min_rate ? min_of(r) : sum_of(r);
  };
  auto search = [&](const std::vector<double>& lo, const std::vector<double>& hi, std::vector<double>& best_x) {
    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> idx(n, 0);
    std::vector<double> x(n);
    while (true) {
      for (std::size_t i = 0; i < n; ++i) x[i] = lo[i] + (hi[i] - lo[i]) * idx[i] / 19.0;
      const double v = evaluate(x);
      if (v > best) {
        best = v;
        best_x = x;
      }
      std::size_t i = 0;
      while (i < n && ++idx[i] == 20) idx[i++] = 0;
      if (i == n) break;
    }
    return best;
  };
  std::vector<double> best_x;
  double best = search(std::vector<double>(n, 0.0), std::vector<double>(n, 1.0), best_x);
  std::vector<double> lo(n), hi(n);
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = std::max(0.0, best_x[i] - 1.0 / 19.0);
    hi[i] = std::min(1.0, best_x[i] + 1.0 / 19.0);
  }
  std::vector<double> refined;
  best = std::max(best, search(lo, hi, refined));
  return best;
}

double ul_grid_oracle(const Instance& in, bool min_rate) {
  auto evaluate = [&](double a, double b) {
    RVector eta(2);
    eta << a, b;
    const RVector r = ul_rates(in.ul, eta);
    return min_rate ? min_of(r) : sum_of(r);
  };
  double best = -std::numeric_limits<double>::infinity();
  double ba = 0, bb = 0;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      const double a = in.p_ms(0) * i / 19.0, b = in.p_ms(1) * j / 19.0;
      const double v = evaluate(a, b);
      if (v > best) best = v, ba = a, bb = b;
    }
  const double ha = in.p_ms(0) / 19.0, hb = in.p_ms(1) / 19.0;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      const double a = std::clamp(ba - ha + 2 * ha * i / 19.0, 0.0, in.p_ms(0));
      const double b = std::clamp(bb - hb + 2 * hb * j / 19.0, 0.0, in.p_ms(1));
      best = std::max(best, evaluate(a, b));
    }
  return best;
}

}  // namespace

TEST_CASE("capped simplex projection examples") {
  RVector v(2);
  v << 0.5, 0.7;
  RVector w = project_capped_simplex(v, 1.0);
  CHECK(w(0) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(w(1) == doctest::Approx(0.6).epsilon(1e-14));

  v << -1.0, 0.5;
  w = project_capped_simplex(v, 1.0);
  CHECK(w(0) == 0.0);
  CHECK(w(1) == 0.5);
}

TEST_CASE("capped simplex projection agrees with active-set enumeration") {
  // KKT oracle: for each subset S of free coordinates, w_S = v_S - t with t >= 0
  // chosen so that the budget binds (or t = 0), the others zero.
  auto oracle = [](const RVector& v, double budget) {
    const Eigen::Index n = v.size();
    RVector best;
    double best_d = std::numeric_limits<double>::infinity();
    for (int mask = 0; mask < (1 << n); ++mask) {
      for (int binding = 0; binding < 2; ++binding) {
        double t = 0.0;
        int count = 0;
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
          if (mask >> i & 1) ++count, s += v(i);
        if (binding) {
          if (count == 0) continue;
          t = (s - budget) / count;
          if (t < 0) continue;
        }
        RVector w = RVector::Zero(n);
        bool ok = true;
        for (Eigen::Index i = 0; i < n; ++i)
          if (mask >> i & 1) {
            w(i) = v(i) - t;
            if (w(i) < -1e-15) ok = false;
          } else if (v(i) - t > 1e-15) {
            ok = false;  // dual feasibility of a clamped coordinate
          }
        if (!ok || w.sum() > budget + 1e-12) continue;
        const double d = (w - v).squaredNorm();
        if (d < best_d) best_d = d, best = w;
      }
    }
    return best;
  };
  RVector v(3);
  v << 3.0, 1.0, 0.1;
  const RVector w = project_capped_simplex(v, 1.0);
  CHECK((w - oracle(v, 1.0)).norm() < 1e-12);
  CHECK(w(0) == doctest::Approx(1.0));

  Rng rng(12);
  for (int t = 0; t < 500; ++t) {
    RVector r(4);
    for (Eigen::Index i = 0; i < 4; ++i) r(i) = 2.0 * rng.normal();
    const double budget = rng.uniform(0.1, 3.0);
    const RVector p = project_capped_simplex(r, budget);
    CHECK((p - oracle(r, budget)).norm() < 1e-10);
    CHECK(p.minCoeff() >= 0.0);
    CHECK(p.sum() <= budget + 1e-12);
  }
}

TEST_CASE("feasible set projection acts per group") {
  FeasibleSet set;
  set.groups = {{{0, 2}, 1.0}, {{1}, 0.5}};
  RVector x(3);
  x << 0.5, 2.0, 0.7;
  const RVector p = set.project(x);
  CHECK(p(0) == doctest::Approx(0.4));
  CHECK(p(2) == doctest::Approx(0.6));
  CHECK(p(1) == doctest::Approx(0.5));
  CHECK(set.violation(p) <= 1e-15);
  CHECK(set.violation(x) == doctest::Approx(1.5));
}

TEST_CASE("block solver: concave quadratic and linear objectives") {
  SolverConfig cfg;
  cfg.inner_tol = 1e-10;
  cfg.max_inner = 5000;
  FeasibleSet set;
  set.groups = {{{0, 1, 2}, 1.0}};
  const RVector start = RVector::Zero(3);

  RVector c(3);
  c << 0.2, 0.3, 0.1;
  auto quad = [&](const RVector& x) { return -(x - c).squaredNorm(); };
  auto quad_grad = [&](const RVector& x) -> RVector { return -2.0 * (x - c); };
  auto sol = solve_concave_block(quad, quad_grad, set, start, cfg);
  CHECK((sol.x - c).norm() < 1e-6);

  c << 0.9, 0.8, -0.2;
  sol = solve_concave_block(quad, quad_grad, set, start, cfg);
  CHECK((sol.x - project_capped_simplex(c, 1.0)).norm() < 1e-6);
  CHECK(sol.value >= quad(start) - 1e-12);

  RVector a(3);
  a << 1.0, 2.0, 0.5;
  auto lin = [&](const RVector& x) { return a.dot(x); };
  auto lin_grad = [&](const RVector&) -> RVector { return a; };
  sol = solve_concave_block(lin, lin_grad, set, start, cfg);
  CHECK(std::abs(sol.x.sum() - 1.0) < 1e-8);
  CHECK(sol.x(1) == doctest::Approx(1.0).epsilon(1e-8));

  auto bad = [](const RVector&) { return std::numeric_limits<double>::quiet_NaN(); };
  CHECK_THROWS_AS(solve_concave_block(bad, lin_grad, set, start, cfg), ParameterError);
}

TEST_CASE("max-min block solver balances two linear users") {
  FeasibleSet set;
  set.groups = {{{0, 1}, 1.0}};
  SolverConfig cfg;
  cfg.max_inner = 2000;
  auto values = [](const RVector& x) -> RVector {
    RVector v(2);
    v << 2.0 * x(0), x(1);
    return v;
  };
  auto grad = [](const RVector&, Eigen::Index k) -> RVector {
    RVector g = RVector::Zero(2);
    g(k) = k == 0 ? 2.0 : 1.0;
    return g;
  };
  const auto sol = solve_maxmin_block(values, grad, set, RVector::Zero(2), cfg);
  // Optimum x = (1/3, 2/3) with value 2/3.
  CHECK(sol.value == doctest::Approx(2.0 / 3.0).epsilon(1e-2));
  CHECK(set.violation(sol.x) <= 1e-12);
}

TEST_CASE("solver configuration and block mode parsing") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.outer_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg = SolverConfig{};
  cfg.armijo_shrink = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg = SolverConfig{};
  cfg.max_inner = 0;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);

  for (auto mode : {BlockMode::kPerAp, BlockMode::kSingle, BlockMode::kPerScalar})
    CHECK(parse_block_mode(to_string(mode)) == mode);
  CHECK_THROWS_AS(parse_block_mode("diagonal"), ParameterError);
}

TEST_CASE("uniform baselines") {
  const RVector p_ms = RVector::Constant(3, 0.1);
  CHECK(uniform_ul(3, 2, p_ms).isApproxToConstant(0.05));
  CHECK(uniform_ul(3, 1, p_ms).isApproxToConstant(0.1));

  const auto in = random_instance(4, 3, 4);
  const RMatrix eta = uniform_dl(in.dl, in.p_ap);
  for (std::size_t m = 0; m < 4; ++m) CHECK(dl_radiated_power(in.dl, eta, m) == doctest::Approx(in.p_ap(0)));

  // Orthonormal single-stream precoder: tr(QQ^H) = 1.
  UserApGrid<CMatrix> g(1, 1);
  g(0, 0) = CMatrix::Zero(4, 1);
  g(0, 0)(0, 0) = 1.0;
  const auto one = make_instance(g, {1}, AssociationMode::cell_free(), 0.1, 0.2, 0.1);
  CHECK(uniform_dl(one.dl, one.p_ap)(0, 0) == doctest::Approx(0.2));

  const auto uc = random_instance(6, 3, 2, AssociationMode::top_n(1));
  const RMatrix eta_uc = uniform_dl(uc.dl, uc.p_ap);
  for (std::size_t m = 0; m < 2; ++m) {
    CHECK(dl_radiated_power(uc.dl, eta_uc, m) == doctest::Approx(uc.p_ap(0)));
    for (std::size_t k = 0; k < 3; ++k)
      if (uc.dl.precoder_power(k, m) == 0.0) CHECK(eta_uc(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) == 0.0);
  }
}

TEST_CASE("single user: full budget, grid agreement and min equals sum") {
  SolverConfig cfg;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto in = random_instance(seed, 1, 3);
    const auto sr = slm_sum_rate_dl(in.dl, in.sigma2, in.p_ap, cfg);
    for (std::size_t m = 0; m < 3; ++m)
      CHECK(dl_radiated_power(in.dl, sr.allocation.dl, m) == doctest::Approx(in.p_ap(0)).epsilon(1e-6));
    // With one user each AP's term only grows with its own power, so the grid
    // optimum is the corner and 1-D searches per AP land on the full budget.
    const RMatrix full = uniform_dl(in.dl, in.p_ap);
    const double best = sum_of(dl_rates(in.dl, full, in.sigma2));
    CHECK(sum_of(dl_rates(in.dl, sr.allocation.dl, in.sigma2)) == doctest::Approx(best).epsilon(1e-3));

    const auto mr = slm_min_rate_dl(in.dl, in.sigma2, in.p_ap, cfg);
    CHECK(min_of(dl_rates(in.dl, mr.allocation.dl, in.sigma2)) == doctest::Approx(best).epsilon(1e-3));

    const auto ul = slm_sum_rate_ul(in.ul, in.p_ms, cfg);
    CHECK(ul.allocation.ul(0) == doctest::Approx(in.p_ms(0)).epsilon(1e-9));
    const auto ul_min = slm_min_rate_ul(in.ul, in.p_ms, cfg);
    CHECK(ul_min.allocation.ul(0) == doctest::Approx(in.p_ms(0)).epsilon(1e-6));
  }
}

// Noise-limited instances: the rates are close to concave in the powers, so a
// first-order method started anywhere should reach the global optimum.
constexpr double kNoiseLimited = 10.0;

TEST_CASE("downlink optimizers approach the exhaustive grid optimum") {
  SolverConfig cfg;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto in = random_instance(100 + seed, 2, 2, AssociationMode::cell_free(), 2, 1, kNoiseLimited);
    const auto sr = slm_sum_rate_dl(in.dl, in.sigma2, in.p_ap, cfg);
    CHECK(sum_of(dl_rates(in.dl, sr.allocation.dl, in.sigma2)) >= 0.99 * dl_grid_oracle(in, false));

    const auto mr = slm_min_rate_dl(in.dl, in.sigma2, in.p_ap, cfg, BlockMode::kSingle);
    CHECK(min_of(dl_rates(in.dl, mr.allocation.dl, in.sigma2)) >= 0.99 * dl_grid_oracle(in, true));
  }
}

TEST_CASE("per-AP blocks can stall on the minimum rate") {
  // AP 0 only reaches user 0 and AP 1 only user 1. From the uniform start any
  // single-AP shift lowers one of two balanced rates, while the joint move
  // raises both.
  UserApGrid<CMatrix> g(2, 2);
  g(0, 0) = CMatrix::Constant(2, 1, 1.0);
  g(1, 1) = CMatrix::Constant(2, 1, 1.0);
  g(1, 0) = CMatrix::Constant(2, 1, 0.3);
  g(0, 1) = CMatrix::Constant(2, 1, 0.3);
  const auto in = make_instance(g, {1, 1}, AssociationMode::cell_free(), 0.1, 1.0, 1.0);
  SolverConfig cfg;
  const RMatrix u = uniform_dl(in.dl, in.p_ap);
  const double start = min_of(dl_rates(in.dl, u, in.sigma2));
  const double per_ap = min_of(dl_rates(in.dl, slm_min_rate_dl(in.dl, in.sigma2, in.p_ap, cfg).allocation.dl, in.sigma2));
  const double joint = min_of(
      dl_rates(in.dl, slm_min_rate_dl(in.dl, in.sigma2, in.p_ap, cfg, BlockMode::kSingle).allocation.dl, in.sigma2));
  CHECK(per_ap >= start * (1 - 1e-9));
  CHECK(joint > 1.05 * per_ap);
}

TEST_CASE("uplink optimizers approach the exhaustive grid optimum") {
  SolverConfig cfg;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto in = random_instance(200 + seed, 2, 3, AssociationMode::cell_free(), 4, 2, kNoiseLimited);
    const auto sr = slm_sum_rate_ul(in.ul, in.p_ms, cfg);
    CHECK(sum_of(ul_rates(in.ul, sr.allocation.ul)) >= 0.99 * ul_grid_oracle(in, false));
    const auto mr = slm_min_rate_ul(in.ul, in.p_ms, cfg);
    CHECK(min_of(ul_rates(in.ul, mr.allocation.ul)) >= 0.99 * ul_grid_oracle(in, true));
  }
}

TEST_CASE("interference-limited sum-rate has several local maxima") {
  // Both corners are stationary; from the uniform start the optimizer takes the
  // nearer one, which here is not the global optimum.
  const auto in = random_instance(203, 2, 3);
  const auto sr = slm_sum_rate_ul(in.ul, in.p_ms, SolverConfig{});
  const double reached = sum_of(ul_rates(in.ul, sr.allocation.ul));
  CHECK(reached < 0.99 * ul_grid_oracle(in, false));
  CHECK(sr.trace.converged);
}

TEST_CASE("symmetric two-user instances get equal powers") {
  Rng rng(77);
  UserApGrid<CMatrix> g(2, 1);
  g(0, 0) = rng.complex_normal_matrix(4, 2);
  g(1, 0) = g(0, 0);
  const auto in = make_instance(g, {1, 1}, AssociationMode::cell_free(), 0.1, 1.0, 1.0);
  SolverConfig cfg;
  cfg.max_inner = 1000;

  const auto mr = slm_min_rate_dl(in.dl, in.sigma2, in.p_ap, cfg);
  const RMatrix& eta = mr.allocation.dl;
  CHECK(eta(0, 0) == doctest::Approx(eta(1, 0)).epsilon(1e-2));
  const RVector r = dl_rates(in.dl, eta, in.sigma2);
  double best = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double x = 0.5 * i / 400.0;
    RMatrix e(2, 1);
    e << x * in.p_ap(0) / in.dl.precoder_power(0, 0), x * in.p_ap(0) / in.dl.precoder_power(1, 0);
    best = std::max(best, sum_of(dl_rates(in.dl, e, in.sigma2)) / 2.0);
  }
  CHECK(r.minCoeff() >= 0.99 * best);
  CHECK(r.minCoeff() == doctest::Approx(r.sum() / 2.0).epsilon(1e-2));

  const auto ul = slm_min_rate_ul(in.ul, in.p_ms, cfg);
  CHECK(ul.allocation.ul(0) == doctest::Approx(ul.allocation.ul(1)).epsilon(1e-2));
}

TEST_CASE("optimizers are monotone, feasible and dominate the uniform start") {
  SolverConfig cfg;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const AssociationMode mode = seed % 2 ? AssociationMode::top_n(2) : AssociationMode::cell_free();
    const auto in = random_instance(300 + seed, 3, 4, mode);
    const RMatrix u_dl = uniform_dl(in.dl, in.p_ap);
    const RVector u_ul = uniform_ul(3, in.ul.n_ms_antennas, in.p_ms);
    const RVector r_dl = dl_rates(in.dl, u_dl, in.sigma2);
    const RVector r_ul = ul_rates(in.ul, u_ul);

    const auto sr = slm_sum_rate_dl(in.dl, in.sigma2, in.p_ap, cfg);
    check_monotone(sr.trace);
    CHECK(dl_constraint_violation(in.dl, sr.allocation.dl, in.p_ap) <= 1e-9);
    CHECK(sum_of(dl_rates(in.dl, sr.allocation.dl, in.sigma2)) >= sum_of(r_dl) * (1 - 1e-9));
    CHECK(sr.trace.objective_per_iteration.back() ==
          doctest::Approx(sum_of(dl_rates(in.dl, sr.allocation.dl, in.sigma2))).epsilon(1e-9));

    const auto mr = slm_min_rate_dl(in.dl, in.sigma2, in.p_ap, cfg);
    check_monotone(mr.trace);
    CHECK(dl_constraint_violation(in.dl, mr.allocation.dl, in.p_ap) <= 1e-9);
    CHECK(min_of(dl_rates(in.dl, mr.allocation.dl, in.sigma2)) >= min_of(r_dl) * (1 - 1e-9));

    const auto usr = slm_sum_rate_ul(in.ul, in.p_ms, cfg);
    check_monotone(usr.trace);
    CHECK(ul_constraint_violation(usr.allocation.ul, in.p_ms) <= 1e-9);
    CHECK(sum_of(ul_rates(in.ul, usr.allocation.ul)) >= sum_of(r_ul) * (1 - 1e-9));

    const auto umr = slm_min_rate_ul(in.ul, in.p_ms, cfg);
    check_monotone(umr.trace);
    CHECK(ul_constraint_violation(umr.allocation.ul, in.p_ms) <= 1e-9);
    CHECK(min_of(ul_rates(in.ul, umr.allocation.ul)) >= min_of(r_ul) * (1 - 1e-9));
  }
}

TEST_CASE("per-AP and single-block modes reach comparable sum-rates") {
  SolverConfig cfg;
  cfg.max_outer = 200;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto in = random_instance(400 + seed, 2, 3, AssociationMode::cell_free(), 4, 2, kNoiseLimited);
    auto rate = [&](BlockMode mode) {
      return sum_of(dl_rates(in.dl, slm_sum_rate_dl(in.dl, in.sigma2, in.p_ap, cfg, mode).allocation.dl, in.sigma2));
    };
    CHECK(rate(BlockMode::kSingle) == doctest::Approx(rate(BlockMode::kPerAp)).epsilon(0.02));
  }
}

TEST_CASE("per-scalar blocks ascend and stay feasible") {
  SolverConfig cfg;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto in = random_instance(450 + seed, 2, 3);
    const RMatrix u = uniform_dl(in.dl, in.p_ap);
    const auto res = slm_sum_rate_dl(in.dl, in.sigma2, in.p_ap, cfg, BlockMode::kPerScalar);
    check_monotone(res.trace);
    CHECK(dl_constraint_violation(in.dl, res.allocation.dl, in.p_ap) <= 1e-9);
    CHECK(sum_of(dl_rates(in.dl, res.allocation.dl, in.sigma2)) >= sum_of(dl_rates(in.dl, u, in.sigma2)) * (1 - 1e-9));
  }
}

TEST_CASE("a block optimum start is a fixed point") {
  SolverConfig cfg;
  const auto in = random_instance(500, 3, 3);
  const auto first = slm_sum_rate_ul(in.ul, in.p_ms, cfg);
  const auto again = slm_sum_rate_ul(in.ul, in.p_ms, cfg, &first.allocation.ul);
  const double a = sum_of(ul_rates(in.ul, first.allocation.ul));
  const double b = sum_of(ul_rates(in.ul, again.allocation.ul));
  CHECK(std::abs(b - a) <= cfg.outer_tol * a);
}

TEST_CASE("an expired deadline stops the optimizer with a feasible point") {
  SolverConfig cfg;
  cfg.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
  const auto in = random_instance(600, 3, 4);
  const auto sr = slm_sum_rate_dl(in.dl, in.sigma2, in.p_ap, cfg);
  CHECK(sr.trace.time_capped);
  CHECK(!sr.trace.converged);
  CHECK(dl_constraint_violation(in.dl, sr.allocation.dl, in.p_ap) <= 1e-9);
}

TEST_CASE("constraint violation measures") {
  const auto in = random_instance(700, 2, 2);
  RMatrix eta = uniform_dl(in.dl, in.p_ap);
  CHECK(dl_constraint_violation(in.dl, eta, in.p_ap) <= 1e-12);
  eta *= 2.0;
  CHECK(dl_constraint_violation(in.dl, eta, in.p_ap) == doctest::Approx(in.p_ap(0)));
  RVector u(2);
  u << -0.5, 1.2;
  CHECK(ul_constraint_violation(u, in.p_ms) == doctest::Approx(0.5));
}
