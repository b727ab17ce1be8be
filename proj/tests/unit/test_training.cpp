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
#include <numeric>

#include "ucmimo/training.hpp"

using namespace ucmimo;

namespace {

ChannelSet random_channels(std::size_t K, std::size_t M, int n_ap, int n_ms, std::uint64_t seed) {
  const auto topo = place_nodes(100.0, M, K, seed, ArrayConfig{n_ap, n_ms, 1});
  LargeScaleGains gains{RMatrix::Constant(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(M), 1.0)};
  return draw_channels(gains, topo, seed + 1);
}

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("noise variance") {
  CHECK(noise_variance(-174.0, 20e6, 9.0) == doctest::Approx(6.324555320336781e-13).epsilon(1e-12));
  CHECK(noise_variance(-174.0, 1.0, 0.0) == doctest::Approx(std::pow(10.0, -20.4)).epsilon(1e-12));
  CHECK(noise_variance(-174.0, 40e6, 9.0) == doctest::Approx(2.0 * noise_variance(-174.0, 20e6, 9.0)));
  CHECK_THROWS_AS(noise_variance(-174.0, 0.0, 9.0), ParameterError);
}

TEST_CASE("m-sequences have full period and balance") {
  for (int order = 2; order <= 16; ++order) {
    const auto s = m_sequence(order);
    const std::size_t period = (std::size_t{1} << order) - 1;
    REQUIRE(s.size() == period);
    // One more -1 than +1 under the 1 -> -1 mapping.
    const double sum = std::accumulate(s.begin(), s.end(), 0.0);
    CHECK(sum == -1.0);
    if (order <= 10) {
      // Two-valued periodic autocorrelation: period at lag 0, -1 elsewhere.
      for (std::size_t lag = 1; lag < period; ++lag) {
        double acc = 0.0;
        for (std::size_t n = 0; n < period; ++n) acc += s[n] * s[(n + lag) % period];
        CHECK(acc == -1.0);
      }
    }
  }
  CHECK_THROWS_AS(m_sequence(1), ParameterError);
  CHECK_THROWS_AS(m_sequence(17), ParameterError);
}

TEST_CASE("pilots are orthonormal within each user") {
  for (int tau : {2, 4, 8, 16, 31}) {
    const auto book = generate_pilots(5, 2, tau, 17);
    CHECK(book.tau_p == tau);
    for (const auto& phi : book.pilots) {
      CHECK(phi.rows() == 2);
      CHECK(phi.cols() == tau);
      CHECK(max_abs(phi * phi.adjoint() - CMatrix::Identity(2, 2)) < 1e-12);
    }
  }
  const auto single = generate_pilots(1, 2, 8, 3);
  CHECK(max_abs(single.pilots[0] * single.pilots[0].adjoint() - CMatrix::Identity(2, 2)) < 1e-12);
}

TEST_CASE("short pilots overlap across users") {
  const auto book = generate_pilots(2, 2, 4, 9);
  CHECK(max_abs(book.pilots[0] * book.pilots[1].adjoint()) > 1e-3);
}

TEST_CASE("joint orthogonalization removes cross-user overlap") {
  PilotOptions opts;
  opts.orthogonalize_across_users = true;
  const auto book = generate_pilots(3, 2, 8, 5, opts);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t k = 0; k < 3; ++k) {
      const CMatrix p = book.pilots[j] * book.pilots[k].adjoint();
      if (j == k)
        CHECK(max_abs(p - CMatrix::Identity(2, 2)) < 1e-12);
      else
        CHECK(max_abs(p) < 1e-12);
    }
  CHECK_THROWS_AS(generate_pilots(5, 2, 8, 5, opts), ParameterError);
}

TEST_CASE("pilot generation errors and determinism") {
  CHECK_THROWS_AS(generate_pilots(2, 4, 3, 1), ParameterError);
  PilotOptions zero;
  zero.train_power_w = 0.0;
  CHECK_THROWS_AS(generate_pilots(2, 2, 8, 1, zero), ParameterError);
  const auto a = generate_pilots(4, 2, 8, 77);
  const auto b = generate_pilots(4, 2, 8, 77);
  for (std::size_t k = 0; k < 4; ++k) CHECK((a.pilots[k] - b.pilots[k]).norm() == 0.0);
}

TEST_CASE("training observation: single user and zero channels") {
  auto ch = random_channels(1, 2, 4, 2, 3);
  const auto book = generate_pilots(1, 2, 8, 4);
  const CMatrix y = training_signal(ch, book, 1);
  CHECK(max_abs(y - std::sqrt(0.1) * ch.true_channels(0, 1) * book.pilots[0]) < 1e-15);

  for (auto& g : ch.true_channels.cells()) g.setZero();
  const NoiseModel noise{2.5e-3, 1.0};
  double acc = 0.0;
  int count = 0;
  for (std::uint64_t s = 0; s < 10000 / 32 + 1; ++s) {
    const CMatrix w = training_observation(ch, book, noise, 0, s);
    acc += w.squaredNorm();
    count += static_cast<int>(w.size());
  }
  CHECK(std::abs(acc / count / 2.5e-3 - 1.0) < 0.05);
}

TEST_CASE("training observation is a superposition with a shared noise draw") {
  const auto ch = random_channels(2, 1, 4, 2, 8);
  const auto book = generate_pilots(2, 2, 4, 8);
  const NoiseModel noise{1e-2, 1.0};

  ChannelSet only0 = ch, only1 = ch, none = ch;
  only0.true_channels(1, 0).setZero();
  only1.true_channels(0, 0).setZero();
  none.true_channels(0, 0).setZero();
  none.true_channels(1, 0).setZero();
  const CMatrix both = training_observation(ch, book, noise, 0, 42);
  const CMatrix sum = training_observation(only0, book, noise, 0, 42) +
                      training_observation(only1, book, noise, 0, 42) -
                      training_observation(none, book, noise, 0, 42);
  CHECK(max_abs(both - sum) < 1e-12);
}

TEST_CASE("pilot-matched estimates without noise") {
  SUBCASE("single user is exact") {
    const auto ch = random_channels(1, 3, 4, 2, 11);
    const auto book = generate_pilots(1, 2, 8, 11);
    for (std::size_t m = 0; m < 3; ++m)
      CHECK(max_abs(pm_estimate(training_signal(ch, book, m), book, 0) - ch.true_channels(0, m)) < 1e-10);
  }
  SUBCASE("cross-orthogonal pilots are exact") {
    const auto ch = random_channels(2, 2, 4, 2, 12);
    PilotOptions opts;
    opts.orthogonalize_across_users = true;
    const auto book = generate_pilots(2, 2, 8, 12, opts);
    for (std::size_t m = 0; m < 2; ++m)
      for (std::size_t k = 0; k < 2; ++k)
        CHECK(max_abs(pm_estimate(training_signal(ch, book, m), book, k) - ch.true_channels(k, m)) < 1e-10);
  }
  SUBCASE("overlapping pilots leave exactly the contamination term") {
    const auto ch = random_channels(2, 1, 4, 2, 13);
    PilotOptions opts;
    opts.train_power_w = 0.1;
    auto book = generate_pilots(2, 2, 4, 13, opts);
    book.train_powers = {0.1, 0.4};
    const CMatrix est = pm_estimate(training_signal(ch, book, 0), book, 0);
    const CMatrix contamination =
        std::sqrt(0.4 / 0.1) * ch.true_channels(1, 0) * book.pilots[1] * book.pilots[0].adjoint();
    CHECK(max_abs(contamination) > 1e-3);
    CHECK(max_abs(est - ch.true_channels(0, 0) - contamination) < 1e-10);
  }
}

TEST_CASE("estimation error decomposes into contamination plus filtered noise") {
  const std::size_t K = 3;
  const auto ch = random_channels(K, 2, 4, 2, 21);
  const auto book = generate_pilots(K, 2, 4, 21);
  const NoiseModel noise{0.05, 1.0};
  ChannelSet est = ch;
  estimate_channels(est, book, noise, 99);
  REQUIRE(est.has_estimates());

  ChannelSet zero = ch;
  for (auto& g : zero.true_channels.cells()) g.setZero();
  for (std::size_t m = 0; m < 2; ++m) {
    const CMatrix w = training_observation(zero, book, noise, m, derive_seed(99, {m}));
    for (std::size_t k = 0; k < K; ++k) {
      CMatrix rebuilt = ch.true_channels(k, m);
      for (std::size_t j = 0; j < K; ++j)
        if (j != k)
          rebuilt += std::sqrt(book.train_powers[j] / book.train_powers[k]) * ch.true_channels(j, m) *
                     book.pilots[j] * book.pilots[k].adjoint();
      rebuilt += w * book.pilots[k].adjoint() / std::sqrt(book.train_powers[k]);
      CHECK(max_abs(est.estimated_channels(k, m) - rebuilt) < 1e-10);
    }
  }
}

TEST_CASE("pm_estimate is linear in the observation") {
  const auto book = generate_pilots(2, 2, 8, 31);
  Rng rng(31);
  const CMatrix y1 = rng.complex_normal_matrix(4, 8);
  const CMatrix y2 = rng.complex_normal_matrix(4, 8);
  const Complex a(0.3, -1.2);
  CHECK(max_abs(pm_estimate(a * y1 + y2, book, 1) - (a * pm_estimate(y1, book, 1) + pm_estimate(y2, book, 1))) <
        1e-12);
  CHECK_THROWS_AS(pm_estimate(CMatrix::Zero(4, 7), book, 0), ParameterError);
}

TEST_CASE("single-user estimate error shrinks with training power") {
  const auto ch = random_channels(1, 1, 4, 2, 41);
  const NoiseModel noise{1e-2, 1.0};
  double prev = std::numeric_limits<double>::infinity();
  for (double p : {0.01, 0.1, 1.0, 10.0}) {
    PilotOptions opts;
    opts.train_power_w = p;
    const auto book = generate_pilots(1, 2, 8, 41, opts);
    ChannelSet est = ch;
    estimate_channels(est, book, noise, 5);
    const double err = (est.estimated_channels(0, 0) - ch.true_channels(0, 0)).norm();
    CHECK(err <= prev);
    prev = err;
  }
}

TEST_CASE("perfect CSI copies the true channels") {
  auto ch = random_channels(2, 2, 4, 2, 51);
  assume_perfect_csi(ch);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t m = 0; m < 2; ++m) CHECK((ch.estimated_channels(k, m) - ch.true_channels(k, m)).norm() == 0.0);
}
