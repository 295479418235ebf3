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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cqm/entanglement.hpp"
#include "cqm/linalg.hpp"
#include "cqm/measurement.hpp"
#include "cqm/povm.hpp"

namespace cqm {

class NormalizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CommutantViolationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ZeroProbabilityBranchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Spin-1/2 particle on a line, discretized
// ---------------------------------------------------------------------------

/// Quadrature grid: strictly increasing points with positive weights.
class Grid {
 public:
  Grid(std::vector<double> points, std::vector<double> weights)
      : points_(std::move(points)), weights_(std::move(weights)) {
    if (points_.empty() || points_.size() != weights_.size())
      throw std::invalid_argument("grid: points/weights size mismatch");
    for (std::size_t j = 0; j < points_.size(); ++j) {
      if (!(weights_[j] > 0.0))
        throw std::invalid_argument("grid: weights must be positive");
      if (j > 0 && !(points_[j] > points_[j - 1]))
        throw std::invalid_argument("grid: points must be strictly increasing");
    }
  }

  /// n bin midpoints on [-halfwidth, halfwidth], weights = bin width.
  static Grid uniform(std::size_t n, double halfwidth) {
    if (n == 0 || !(halfwidth > 0.0))
      throw std::invalid_argument("grid: need n > 0 and halfwidth > 0");
    const double h = 2.0 * halfwidth / static_cast<double>(n);
    std::vector<double> points, weights;
    for (std::size_t j = 0; j < n; ++j) {
      points.push_back(-halfwidth + (static_cast<double>(j) + 0.5) * h);
      weights.push_back(h);
    }
    return Grid(std::move(points), std::move(weights));
  }

  const std::vector<double>& points() const noexcept { return points_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return points_.size(); }

  /// Bins with x_j >= 0.
  std::vector<std::size_t> nonnegative_bins() const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < points_.size(); ++j)
      if (points_[j] >= 0.0) out.push_back(j);
    return out;
  }

  std::vector<std::size_t> all_bins() const {
    std::vector<std::size_t> out(points_.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = j;
    return out;
  }

 private:
  std::vector<double> points_;
  std::vector<double> weights_;
};

/// Gaussian (pi w^2)^{-1/4} exp(-x^2 / (2 w^2)); w = 1 is the vacuum h_0.
inline double gaussian_mode(double x, double width = 1.0) {
  return std::pow(std::numbers::pi * width * width, -0.25) *
         std::exp(-x * x / (2.0 * width * width));
}

/// Discretized spin-1/2 particle on a line, with a spin-1/2 environment.
///
/// The system space is C^2 (spin) (x) C^n (bins), basis |s>|j> with spin as
/// the slow index; amplitudes are psi_s(x_j) sqrt(w_j). d_{j,+} = |up>|j>,
/// d_{j,-} = |down>|j>. The environment is a C^2 copy of the spin.
struct PositionSpinExample {
  Grid grid;
  std::size_t bins = 0;
  std::size_t system_dim = 0;
  /// Sum_j w_j phi_0(x_j)^2 before normalization.
  double raw_vacuum_mass = 0.0;
  /// Normalized discretized phi_0 on C^n.
  Vector vacuum;
  /// |+> = up (x) phi_0, |-> = down (x) phi_0.
  Vector plus;
  Vector minus;
  /// Position PVM: Q_j = I_spin (x) |j><j|, rank 2 each.
  Povm position;
  /// Q^1 with (j, 0) = spin up and (j, 1) = spin down.
  RefinedPovm refined_position;
  /// N = (1/2) N_+ - (1/2) N_-.
  SharpObservable spin;
  /// (|up>_E |+> + |down>_E |->) / sqrt 2 on C^2 (x) system.
  BipartiteState bell;
  /// Minimal position measurement: A_j = |+><d_{j,+}| + |-><d_{j,-}|.
  Instrument position_instrument;
};

namespace detail {

inline Matrix spin_projection(std::size_t bins, std::size_t spin) {
  return tensor(projector(basis_vector(2, spin)), identity(bins));
}

}  // namespace detail

/// Builds the discretized example. Throws NormalizationError when the grid
/// misses more than 1e-6 of the mode's mass.
inline PositionSpinExample build_position_spin_example(
    const Grid& grid, double vacuum_width = 1.0) {
  const std::size_t n = grid.size();
  const std::size_t dim = 2 * n;

  Vector phi0(static_cast<Eigen::Index>(n));
  double mass = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double a =
        gaussian_mode(grid.points()[j], vacuum_width) * std::sqrt(grid.weights()[j]);
    phi0(static_cast<Eigen::Index>(j)) = a;
    mass += a * a;
  }
  if (std::abs(mass - 1.0) > 1e-6)
    throw NormalizationError(
        "discretized mode mass " + std::to_string(mass) +
        " differs from 1 by more than 1e-6; widen or refine the grid");
  phi0 /= std::sqrt(mass);

  const Vector up = basis_vector(2, 0), down = basis_vector(2, 1);
  const Vector plus = tensor(up, phi0);
  const Vector minus = tensor(down, phi0);

  std::vector<Matrix> effects;
  std::vector<std::string> labels;
  RefinedPovm refined;
  refined.dim = dim;
  for (std::size_t j = 0; j < n; ++j) {
    const Vector bin = basis_vector(n, j);
    effects.push_back(tensor(identity(2), projector(bin)));
    labels.push_back(std::to_string(grid.points()[j]));
    refined.vectors.push_back({tensor(up, bin), tensor(down, bin)});
  }
  refined.parent_labels = labels;
  Povm q = make_povm(std::move(effects), labels);

  SharpObservable spin(
      {0.5, -0.5},
      {detail::spin_projection(n, 0), detail::spin_projection(n, 1)});

  const Vector psi =
      (tensor(up, plus) + tensor(down, minus)) / std::numbers::sqrt2;
  BipartiteState bell(DensityOperator::pure(psi), 2, dim);

  std::vector<InstrumentOutcome> outcomes;
  for (std::size_t j = 0; j < n; ++j) {
    const auto& ds = refined.vectors[j];
    outcomes.push_back(
        {labels[j], {plus * ds[0].adjoint() + minus * ds[1].adjoint()}});
  }
  Instrument instrument(dim, dim, std::move(outcomes));

  return PositionSpinExample{
      grid,      n,           dim,   mass,         phi0,
      plus,      minus,       std::move(q), std::move(refined),
      std::move(spin), std::move(bell), std::move(instrument)};
}

/// Outcome of one spin sign after the completing spin measurement.
struct SpinBranchReport {
  double joint_probability = 0.0;
  /// Probability of this sign given the position event X.
  double conditional_probability = 0.0;
  double negativity = 0.0;
  bool product = false;
  /// Frobenius distance of the post state to |s>_E<s| (x) |s,phi_0><s,phi_0|.
  double distance_to_target = 0.0;
  /// Frobenius distance of the env (x) spin reduced state to |ss><ss|.
  double reduced_distance_to_target = 0.0;
};

struct PositionReport {
  std::vector<std::size_t> bins;
  double probability = 0.0;
  /// Sum over X of the discretized |phi_0(x_j)|^2 w_j.
  double expected_probability = 0.0;
  double distance_to_bell = 0.0;
  double negativity = 0.0;
  SpinBranchReport up;
  SpinBranchReport down;
  bool passed = false;
};

/// Applies id (x) I_X for the position instrument to the Bell state, then
/// completes it with the Lueders spin measurement, and checks:
/// post state = Bell within 1e-7 with probability sum_X |phi_0|^2; each spin
/// sign has conditional probability 1/2, negativity < 1e-7, and the +
/// branch equals |up><up| (x) |+><+|.
inline PositionReport run_position_example(
    const PositionSpinExample& ex, const std::vector<std::size_t>& bins) {
  PositionReport report;
  report.bins = bins;
  for (auto j : bins) {
    const double a = std::abs(ex.vacuum(static_cast<Eigen::Index>(j)));
    report.expected_probability += a * a;
  }

  const auto post = apply_local_event(ex.bell, ex.position_instrument, bins);
  report.probability = post.probability;
  if (!post.post_state)
    throw ZeroProbabilityBranchError("position event X has zero probability");
  report.distance_to_bell =
      frobenius_distance(post.post_state->matrix(), ex.bell.matrix());
  report.negativity = negativity(*post.post_state);

  const Instrument completed =
      sequential(ex.position_instrument, luders_instrument(ex.spin.as_povm()));
  const std::size_t signs = 2;
  for (std::size_t s = 0; s < signs; ++s) {
    std::vector<std::size_t> event;
    for (auto j : bins) event.push_back(j * signs + s);
    const auto branch = apply_local_event(ex.bell, completed, event);
    SpinBranchReport& out = s == 0 ? report.up : report.down;
    out.joint_probability = branch.probability;
    out.conditional_probability = branch.probability / report.probability;
    if (!branch.post_state) continue;
    out.negativity = negativity(*branch.post_state);
    out.product = is_product(*branch.post_state, kNegativityThreshold);
    const Vector env = basis_vector(2, s);
    const Vector sys = s == 0 ? ex.plus : ex.minus;
    out.distance_to_target = frobenius_distance(
        branch.post_state->matrix(), projector(tensor(env, sys)));
    const Matrix reduced = partial_trace(
        branch.post_state->matrix(), 4, ex.bins, Side::right);
    out.reduced_distance_to_target = frobenius_distance(
        reduced, projector(basis_vector(4, s == 0 ? 0 : 3)));
  }

  const auto branch_ok = [](const SpinBranchReport& b) {
    return std::abs(b.conditional_probability - 0.5) <= 1e-9 &&
           b.negativity < kNegativityThreshold && b.product &&
           b.distance_to_target < 1e-7;
  };
  report.passed =
      report.distance_to_bell < 1e-7 &&
      std::abs(report.negativity - 0.5) <= 1e-7 &&
      std::abs(report.probability - report.expected_probability) <= 1e-9 &&
      branch_ok(report.up) && branch_ok(report.down);
  return report;
}

// ---------------------------------------------------------------------------
// Complete quantum Zeno effect
// ---------------------------------------------------------------------------

enum class ZenoMode { incomplete, complete };

inline const char* to_string(ZenoMode m) {
  return m == ZenoMode::complete ? "complete" : "incomplete";
}

/// Repeated measurement of H on the system of an env (x) system pair that
/// evolves under exp(-i G t / steps) between measurements.
struct ZenoConfig {
  std::size_t system_dim = 0;
  std::size_t env_dim = 0;
  /// H; its refinement provides the d_ik.
  SharpObservable hamiltonian;
  /// Hermitian generator on env (x) system; must commute with I (x) M_i.
  Matrix generator;
  double total_time = 1.0;
  std::size_t steps = 100;
  ZenoMode mode = ZenoMode::complete;
  /// Density matrix on env (x) system.
  Matrix initial_state;
  /// The refined outcome (i, k) conditioned on.
  std::size_t target_outcome = 0;
  std::size_t target_index = 0;
  double tol = kDefaultTol;
};

/// env = C^2, system = C^3, H = diag(x_1, x_1, x_2) so m_1 = 2. G rotates
/// |0,e_1> into |1,e_2> (an entangling rotation inside env (x) span{e_1,e_2})
/// by `angle` over the total time; the initial state is
/// (|0,e_1> + |1,e_2>)/sqrt 2.
inline ZenoConfig canonical_zeno_config(
    std::size_t steps = 100, ZenoMode mode = ZenoMode::complete,
    double angle = std::numbers::pi / 2, double total_time = 1.0) {
  const std::size_t env = 2, sys = 3;
  const Matrix m1 = projector(basis_vector(sys, 0)) + projector(basis_vector(sys, 1));
  const Matrix m2 = projector(basis_vector(sys, 2));
  const Vector a = tensor(Vector(basis_vector(env, 0)), Vector(basis_vector(sys, 0)));
  const Vector b = tensor(Vector(basis_vector(env, 1)), Vector(basis_vector(sys, 1)));
  const Complex i(0.0, 1.0);
  const Matrix g =
      (angle / total_time) * i * (b * a.adjoint() - a * b.adjoint());
  ZenoConfig cfg{
      sys, env, SharpObservable({1.0, 2.0}, {m1, m2}), g, total_time, steps,
      mode, projector((a + b) / std::numbers::sqrt2), 0, 0, kDefaultTol};
  return cfg;
}

struct ZenoResult {
  ZenoMode mode = ZenoMode::complete;
  /// Probability of the conditioning outcome at the t = 0 preparation.
  double preparation_probability = 0.0;
  /// Per step. Complete mode: cumulative probability of repeating (i, k).
  /// Incomplete mode: cumulative probability of i times the current
  /// fidelity <d_ik| rho_S |d_ik>.
  std::vector<double> survival;
  /// Joint env (x) system negativity after each step.
  std::vector<double> negativity;
  /// Fidelity of the reduced system state with d_ik after each step.
  std::vector<double> fidelity;
  Matrix final_system_state;
  double final_fidelity = 0.0;

  double final_survival() const {
    return survival.empty() ? 1.0 : survival.back();
  }
  double max_negativity() const {
    double m = 0.0;
    for (double v : negativity) m = std::max(m, v);
    return m;
  }
};

/// Throws CommutantViolationError when ||[G, I (x) M_i]|| exceeds tol.
inline void check_zeno_config(const ZenoConfig& cfg) {
  const std::size_t joint = cfg.env_dim * cfg.system_dim;
  if (cfg.steps == 0) throw std::invalid_argument("zeno: steps must be >= 1");
  if (cfg.hamiltonian.dim() != cfg.system_dim)
    throw DimensionError("zeno: Hamiltonian acts on another space");
  if (rows(cfg.generator) != joint || cols(cfg.generator) != joint ||
      rows(cfg.initial_state) != joint || cols(cfg.initial_state) != joint)
    throw DimensionError("zeno: generator/state must act on env (x) system");
  if (!is_hermitian(cfg.generator, cfg.tol))
    throw NotHermitianError("zeno: generator is not Hermitian");
  for (std::size_t i = 0; i < cfg.hamiltonian.size(); ++i) {
    const Matrix p = tensor(identity(cfg.env_dim), cfg.hamiltonian.projections()[i]);
    const double c = (cfg.generator * p - p * cfg.generator).cwiseAbs().maxCoeff();
    if (c > cfg.tol)
      throw CommutantViolationError(
          "generator does not commute with I (x) M_" + std::to_string(i) +
          " (commutator " + std::to_string(c) + ")");
  }
}

inline ZenoResult zeno_simulate(const ZenoConfig& cfg) {
  check_zeno_config(cfg);
  const Povm h = cfg.hamiltonian.as_povm();
  const RefinedPovm r = maximally_refine(h);
  if (cfg.target_outcome >= r.parent_size() ||
      cfg.target_index >= r.vectors[cfg.target_outcome].size())
    throw std::out_of_range("zeno: target outcome (i, k) does not exist");
  const Vector target = r.vectors[cfg.target_outcome][cfg.target_index];

  std::vector<Matrix> kraus;
  if (cfg.mode == ZenoMode::complete) {
    // Multiplicity observable with phi_k = d_{i*,k} for the target i*, the
    // remaining d_jl as further eigenvectors.
    std::vector<double> values;
    std::vector<Matrix> projections;
    for (const auto& d : r.vectors[cfg.target_outcome]) {
      values.push_back(static_cast<double>(values.size() + 1));
      projections.push_back(projector(d));
    }
    for (std::size_t j = 0; j < r.parent_size(); ++j) {
      if (j == cfg.target_outcome) continue;
      for (const auto& d : r.vectors[j]) {
        values.push_back(static_cast<double>(values.size() + 1));
        projections.push_back(projector(d));
      }
    }
    const Instrument inst = complete_measurement(
        h, SharpObservable(std::move(values), std::move(projections), cfg.tol));
    kraus = inst.outcome(inst.index_of(RefinedPovm::refined_label(
                             h.labels[cfg.target_outcome], cfg.target_index)))
                .kraus;
  } else {
    kraus = luders_instrument(h).outcome(cfg.target_outcome).kraus;
  }

  const DensityOperator initial(cfg.initial_state, cfg.tol);
  const auto env = cfg.env_dim, sys = cfg.system_dim;
  auto condition = [&](const Matrix& omega, std::size_t step) {
    Matrix out = local_kraus_action(omega, env, sys, kraus);
    const double p = out.trace().real();
    if (p <= cfg.tol)
      throw ZeroProbabilityBranchError(
          "zeno: conditioning outcome has zero probability at step " +
          std::to_string(step));
    out /= p;
    return std::pair<Matrix, double>((out + out.adjoint()) * 0.5, p);
  };

  ZenoResult result;
  result.mode = cfg.mode;
  auto [omega, p0] = condition(initial.matrix(), 0);
  result.preparation_probability = p0;

  const Matrix u = unitary_exp(cfg.generator, cfg.total_time / static_cast<double>(cfg.steps), cfg.tol);
  double cumulative = 1.0;
  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    omega = u * omega * u.adjoint();
    auto [next, p] = condition(omega, step);
    omega = std::move(next);
    cumulative *= p;
    const Matrix rho_s = partial_trace(omega, env, sys, Side::left);
    const double fid = std::clamp(
        target.dot(rho_s * target).real() / target.squaredNorm(), 0.0, 1.0);
    result.fidelity.push_back(fid);
    result.negativity.push_back(negativity(omega, env, sys));
    result.survival.push_back(
        cfg.mode == ZenoMode::complete ? cumulative : cumulative * fid);
  }
  result.final_system_state = partial_trace(omega, env, sys, Side::left);
  result.final_fidelity = result.fidelity.back();
  return result;
}

struct ZenoSweepRow {
  std::size_t steps = 0;
  ZenoMode mode = ZenoMode::complete;
  double final_survival = 0.0;
  double max_negativity = 0.0;
  double final_fidelity = 0.0;
};

/// One row per (steps, mode); both modes for every entry of `steps`.
inline std::vector<ZenoSweepRow> zeno_sweep(
    const ZenoConfig& base, const std::vector<std::size_t>& steps) {
  std::vector<ZenoSweepRow> rows;
  for (auto n : steps)
    for (auto mode : {ZenoMode::complete, ZenoMode::incomplete}) {
      ZenoConfig cfg = base;
      cfg.steps = n;
      cfg.mode = mode;
      const auto r = zeno_simulate(cfg);
      rows.push_back(
          {n, mode, r.final_survival(), r.max_negativity(), r.final_fidelity});
    }
  return rows;
}

}  // namespace cqm
