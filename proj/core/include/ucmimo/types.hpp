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

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ucmimo {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Invalid input to a public operation (bad dimensions, out-of-range values).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not produce a result it promises.
class InternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem failure while persisting results.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense K x M table indexed as (user, ap).
template <typename T>
class UserApGrid {
 public:
  UserApGrid() = default;
  UserApGrid(std::size_t n_users, std::size_t n_aps, const T& init = T{})
      : n_users_(n_users), n_aps_(n_aps), cells_(n_users * n_aps, init) {}

  T& operator()(std::size_t k, std::size_t m) { return cells_[k * n_aps_ + m]; }
  const T& operator()(std::size_t k, std::size_t m) const { return cells_[k * n_aps_ + m]; }

  std::size_t n_users() const { return n_users_; }
  std::size_t n_aps() const { return n_aps_; }
  bool empty() const { return cells_.empty(); }
  std::vector<T>& cells() { return cells_; }
  const std::vector<T>& cells() const { return cells_; }

 private:
  std::size_t n_users_ = 0;
  std::size_t n_aps_ = 0;
  std::vector<T> cells_;
};

/// Non-fatal numerical events collected while processing a drop.
struct Diagnostics {
  std::vector<std::string> warnings;

  void warn(std::string message) { warnings.push_back(std::move(message)); }
};

}  // namespace ucmimo
