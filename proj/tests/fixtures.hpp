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

#include <cmath>
#include <numbers>

#include "cqm/povm.hpp"
#include "cqm/random.hpp"
#include "oracles.hpp"

namespace cqm::fixtures {

/// (2/3)|psi_j><psi_j| with real qubit vectors at 120 degrees.
inline Povm trine() {
  std::vector<Matrix> effects;
  for (int j = 0; j < 3; ++j) {
    const double a = 2.0 * std::numbers::pi * j / 3.0;
    effects.push_back((2.0 / 3.0) * projector(oracle::vec({std::cos(a), std::sin(a)})));
  }
  return make_povm(std::move(effects));
}

/// Tetrahedral qubit SIC POVM (1/4)(I + s_j . sigma).
inline Povm sic() {
  const double r2 = std::numbers::sqrt2;
  const double s[4][3] = {
      {0.0, 0.0, 1.0},
      {2.0 * r2 / 3.0, 0.0, -1.0 / 3.0},
      {-r2 / 3.0, std::sqrt(2.0 / 3.0), -1.0 / 3.0},
      {-r2 / 3.0, -std::sqrt(2.0 / 3.0), -1.0 / 3.0}};
  std::vector<Matrix> effects;
  for (const auto& v : s)
    effects.push_back(
        0.25 * (identity(2) + v[0] * oracle::pauli_x() + v[1] * oracle::pauli_y() +
                v[2] * oracle::pauli_z()));
  return make_povm(std::move(effects));
}

/// M_1 = diag(0.5, 1, 0), M_2 = diag(0.5, 0, 1) on C^3.
inline Povm c3_example() {
  return make_povm({oracle::diag({0.5, 1.0, 0.0}), oracle::diag({0.5, 0.0, 1.0})});
}

/// Member of the seeded random suite: dim in [2, 6], 2 to 5 outcomes,
/// random effect ranks.
inline Povm suite_povm(std::uint64_t seed, std::size_t index) {
  Rng rng = make_rng(seed, index);
  std::uniform_int_distribution<std::size_t> dim(2, 6), outcomes(2, 5);
  const auto d = dim(rng);
  const auto n = outcomes(rng);
  return random_povm(d, n, rng);
}

}  // namespace cqm::fixtures
