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


#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <numeric>

#include "cqm/scenarios.hpp"
#include "oracles.hpp"

using namespace cqm;
using Catch::Matchers::WithinAbs;

namespace {

const PositionSpinExample& default_example() {
  static const PositionSpinExample ex =
      build_position_spin_example(Grid::uniform(64, 6.0));
  return ex;
}

std::vector<std::size_t> all_bins(std::size_t n) {
  std::vector<std::size_t> bins(n);
  std::iota(bins.begin(), bins.end(), std::size_t{0});
  return bins;
}

std::vector<std::size_t> nonnegative_bins(const Grid& g) {
  std::vector<std::size_t> bins;
  for (std::size_t j = 0; j < g.size(); ++j)
    if (g.points()[j] >= 0.0) bins.push_back(j);
  return bins;
}

/// Probability of staying on |0,e_1> through n rotations by angle/n, each
/// followed by the projection back: cos^{2n}(angle/n).
double complete_survival_oracle(std::size_t n, double angle = std::numbers::pi / 2) {
  return std::pow(std::cos(angle / static_cast<double>(n)), 2.0 * static_cast<double>(n));
}

}  // namespace

TEST_CASE("Grid") {
  const auto g = Grid::uniform(4, 2.0);
  CHECK(g.points() == std::vector<double>{-1.5, -0.5, 0.5, 1.5});
  CHECK(g.weights() == std::vector<double>(4, 1.0));
  CHECK_THROWS(Grid({0.0, 0.0}, {1.0, 1.0}));
  CHECK_THROWS(Grid({0.0, 1.0}, {1.0, 0.0}));
  CHECK_THROWS(Grid({0.0}, {1.0, 1.0}));
  CHECK_THROWS(Grid::uniform(0, 1.0));
}

TEST_CASE("position example structure") {
  const auto& ex = default_example();
  CHECK(ex.system_dim == 128);
  CHECK(validate_povm(ex.position).passed);
  for (const auto& e : ex.position.effects) CHECK(effect_rank(e) == 2);
  CHECK(is_pvm(ex.position));
  CHECK(is_rank_one(ex.refined_position.as_rank_one_povm()));
  const auto back = coarse_grain(ex.refined_position);
  for (std::size_t j = 0; j < ex.bins; ++j)
    CHECK(frobenius_distance(back.effects[j], ex.position.effects[j]) < 1e-12);
  CHECK(is_pvm(ex.spin.as_povm()));
  CHECK(ex.spin.eigenvalues() == std::vector<double>{0.5, -0.5});

  // Midpoint quadrature of the vacuum density against erf(6) = 1 - 2e-17.
  CHECK_THAT(ex.raw_vacuum_mass, WithinAbs(std::erf(6.0), 1e-6));
  double mass = 0.0;
  for (std::size_t j = 0; j < ex.bins; ++j)
    mass += oracle::trace_product(projector(ex.plus), ex.position.effects[j]);
  CHECK_THAT(mass, WithinAbs(1.0, 1e-6));
  CHECK_THAT(negativity(ex.bell), WithinAbs(0.5, 1e-12));
}

TEST_CASE("position example rejects a grid that misses the mode") {
  CHECK_THROWS_AS(build_position_spin_example(Grid::uniform(16, 1.0)), NormalizationError);
  CHECK_THROWS_AS(build_position_spin_example(Grid::uniform(64, 6.0), 3.0), NormalizationError);
}

TEST_CASE("position instrument equals its measurement model") {
  const auto ex = build_position_spin_example(Grid::uniform(16, 6.0));
  const auto model = build_measurement_model(ex.refined_position, std::vector<Vector>{ex.plus, ex.minus});
  CHECK((model.interaction.adjoint() * model.interaction - identity(32 * 16)).norm() < 1e-9);
  const auto induced = model_induced_instrument(model);
  Rng rng = make_rng(50);
  const auto rho = random_density(32, rng);
  for (std::size_t j = 0; j < ex.bins; ++j)
    CHECK(frobenius_distance(induced.apply(j, rho.matrix()), ex.position_instrument.apply(j, rho.matrix())) < 1e-12);
}

TEST_CASE("run_position_example") {
  const auto& ex = default_example();

  SECTION("all bins") {
    const auto r = run_position_example(ex, all_bins(ex.bins));
    CHECK(r.passed);
    CHECK_THAT(r.probability, WithinAbs(1.0, 1e-12));
    CHECK(r.distance_to_bell < 1e-9);
    CHECK_THAT(r.negativity, WithinAbs(0.5, 1e-9));
    CHECK_THAT(r.up.conditional_probability, WithinAbs(0.5, 1e-9));
    CHECK_THAT(r.down.conditional_probability, WithinAbs(0.5, 1e-9));
    CHECK(r.up.negativity < 1e-7);
    CHECK(r.up.product);
    CHECK(r.up.distance_to_target < 1e-7);
    CHECK(r.up.reduced_distance_to_target < 1e-7);
    CHECK(r.down.reduced_distance_to_target < 1e-7);
  }

  SECTION("non-negative half line") {
    const auto r = run_position_example(ex, nonnegative_bins(ex.grid));
    CHECK(r.passed);
    CHECK_THAT(r.probability, WithinAbs(0.5, 1e-3));
    CHECK_THAT(r.probability, WithinAbs(r.expected_probability, 1e-12));
    CHECK(r.distance_to_bell < 1e-9);
    CHECK_THAT(r.negativity, WithinAbs(0.5, 1e-9));
  }

  SECTION("single bin") {
    const std::vector<std::size_t> x{40};
    const auto r = run_position_example(ex, x);
    CHECK(r.passed);
    const double expected = std::pow(gaussian_mode(ex.grid.points()[40]), 2) * ex.grid.weights()[40];
    CHECK_THAT(r.probability, WithinAbs(expected / ex.raw_vacuum_mass, 1e-12));
  }

  SECTION("empty event has zero probability") {
    CHECK_THROWS_AS(run_position_example(ex, {}), ZeroProbabilityBranchError);
  }
}

TEST_CASE("Zeno with a frozen generator") {
  for (auto mode : {ZenoMode::complete, ZenoMode::incomplete}) {
    auto cfg = canonical_zeno_config(20, mode);
    cfg.generator = Matrix::Zero(6, 6);
    const auto r = zeno_simulate(cfg);
    for (double s : r.survival)
      // Incomplete mode keeps the entangled initial state at fidelity 1/2.
      CHECK_THAT(s, WithinAbs(mode == ZenoMode::complete ? 1.0 : 0.5, 1e-12));
  }
  auto cfg = canonical_zeno_config(10, ZenoMode::complete);
  cfg.generator = Matrix::Zero(6, 6);
  cfg.initial_state = projector(tensor(Vector(basis_vector(2, 0)), Vector(basis_vector(3, 0))));
  for (auto mode : {ZenoMode::complete, ZenoMode::incomplete}) {
    cfg.mode = mode;
    for (double s : zeno_simulate(cfg).survival) CHECK_THAT(s, WithinAbs(1.0, 1e-12));
  }
  for (const auto& row : zeno_sweep(cfg, {10, 20, 40}))
    CHECK_THAT(row.final_survival, WithinAbs(1.0, 1e-12));
}

TEST_CASE("Zeno complete mode") {
  for (std::size_t n : {10u, 100u, 1000u}) {
    const auto r = zeno_simulate(canonical_zeno_config(n, ZenoMode::complete));
    CHECK(r.survival.size() == n);
    CHECK_THAT(r.preparation_probability, WithinAbs(0.5, 1e-12));
    CHECK_THAT(r.final_survival(), WithinAbs(complete_survival_oracle(n), 1e-9));
    CHECK(r.max_negativity() < 1e-7);
    for (std::size_t s = 1; s < n; ++s) CHECK(r.survival[s] <= r.survival[s - 1]);
    CHECK_THAT(r.final_fidelity, WithinAbs(1.0, 1e-12));
  }
  CHECK(zeno_simulate(canonical_zeno_config(100)).final_survival() >= 0.9);
}

TEST_CASE("Zeno incomplete mode") {
  const auto r = zeno_simulate(canonical_zeno_config(100, ZenoMode::incomplete));
  CHECK_THAT(r.preparation_probability, WithinAbs(1.0, 1e-12));
  // The rotation by pi/2 maps (a + b)/sqrt 2 to (b - a)/sqrt 2.
  CHECK_THAT(r.final_fidelity, WithinAbs(0.5, 1e-9));
  CHECK(r.final_fidelity <= 0.6);
  CHECK_THAT(r.negativity.back(), WithinAbs(0.5, 1e-9));
  CHECK(r.max_negativity() > 1e-3);
  CHECK(r.negativity[49] < 1e-9);
  for (double s : r.survival) {
    CHECK(s >= 0.0);
    CHECK(s <= 1.0 + 1e-12);
  }
}

TEST_CASE("Zeno sweep") {
  const std::vector<std::size_t> ns{10, 20, 40, 80, 160, 320};
  const auto rows = zeno_sweep(canonical_zeno_config(), ns);
  REQUIRE(rows.size() == 2 * ns.size());
  double prev = 0.0;
  for (std::size_t q = 0; q < ns.size(); ++q) {
    const auto& c = rows[2 * q];
    const auto& inc = rows[2 * q + 1];
    CHECK(c.mode == ZenoMode::complete);
    CHECK(inc.mode == ZenoMode::incomplete);
    CHECK(c.final_survival > prev);
    prev = c.final_survival;
    // 1 - s(n) <= C / n, C frozen from the oracle (n (1 - s) -> pi^2/4).
    CHECK((1.0 - c.final_survival) * static_cast<double>(ns[q]) <= 2.47);
    CHECK_THAT(inc.final_survival, WithinAbs(0.5, 1e-9));
  }
}

TEST_CASE("Zeno config errors") {
  auto cfg = canonical_zeno_config(10);
  // Couple e_1 and e_3, which lie in different eigenspaces.
  const Vector a = tensor(Vector(basis_vector(2, 0)), Vector(basis_vector(3, 0)));
  const Vector c = tensor(Vector(basis_vector(2, 0)), Vector(basis_vector(3, 2)));
  cfg.generator = a * c.adjoint() + c * a.adjoint();
  CHECK_THROWS_AS(zeno_simulate(cfg), CommutantViolationError);

  auto bad = canonical_zeno_config(10);
  bad.target_outcome = 1;
  CHECK_THROWS_AS(zeno_simulate(bad), ZeroProbabilityBranchError);
  bad.target_index = 1;
  CHECK_THROWS_AS(zeno_simulate(bad), std::out_of_range);

  auto zero = canonical_zeno_config(0);
  CHECK_THROWS_AS(zeno_simulate(zero), std::invalid_argument);

  auto dims = canonical_zeno_config(10);
  dims.generator = Matrix::Zero(4, 4);
  CHECK_THROWS_AS(zeno_simulate(dims), DimensionError);
}
