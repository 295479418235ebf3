// Copyright 2026 The cqm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

#include "cqm/linalg.hpp"

namespace cqm {

using Rng = std::mt19937_64;

/// Independent stream `stream` derived from `seed`; used to split one seed
/// into per-trial generators so results do not depend on evaluation order.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(stream),
      static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

/// Matrix of i.i.d. standard complex Gaussians.
inline Matrix ginibre(std::size_t n_rows, std::size_t n_cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(n_rows, n_cols);
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = Complex(re, im);
    }
  return g;
}

/// Haar-random unit vector.
inline Vector random_unit_vector(std::size_t dim, Rng& rng) {
  Vector v = ginibre(dim, 1, rng).col(0);
  return v / v.norm();
}

/// Haar-random unitary (QR of a Ginibre matrix with the R-diagonal phases
/// divided out).
inline Matrix random_unitary(std::size_t dim, Rng& rng) {
  const Eigen::MatrixXcd g = ginibre(dim, dim, rng);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

inline Matrix random_hermitian(std::size_t dim, Rng& rng) {
  const Matrix g = ginibre(dim, dim, rng);
  return (g + g.adjoint()) * 0.5;
}

/// Ginibre-ensemble mixed state of the given rank.
inline DensityOperator random_density(
    std::size_t dim, Rng& rng, std::size_t rank = 0) {
  const Matrix g = ginibre(dim, rank == 0 ? dim : rank, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = (rho + rho.adjoint()) * 0.5;
  return DensityOperator(std::move(rho));
}

}  // namespace cqm
