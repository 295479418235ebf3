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
#include <cstdint>
#include <optional>
#include <string>

#include "cqm/linalg.hpp"
#include "cqm/measurement.hpp"
#include "cqm/povm.hpp"
#include "cqm/random.hpp"

namespace cqm {

/// Post-measurement negativity above this counts as surviving entanglement.
inline constexpr double kNegativityThreshold = 1e-7;

/// Sum of |negative eigenvalues| of the partial transpose of a Hermitian
/// operator on left (x) right.
inline double negativity(
    const Matrix& m, std::size_t dim_left, std::size_t dim_right) {
  const Matrix pt = partial_transpose(m, dim_left, dim_right, Side::right);
  double total = 0.0;
  for (double v : hermitian_eigenvalues(pt, 1e-6))
    if (v < 0.0) total -= v;
  return total;
}

inline double negativity(const BipartiteState& w) {
  return negativity(w.matrix(), w.dim_left(), w.dim_right());
}

/// Minimum eigenvalue of the partial transpose >= -tol. Decides
/// separability on 2x2 and 2x3; elsewhere it is a necessary condition only.
inline bool is_ppt(const BipartiteState& w, double tol = kDefaultTol) {
  const auto values =
      hermitian_eigenvalues(partial_transpose(w, Side::right), 1e-6);
  return values.back() >= -tol;
}

/// ||w - tr_R(w) (x) tr_L(w)||_F < tol.
inline bool is_product(const BipartiteState& w, double tol = kDefaultTol) {
  const Matrix left =
      partial_trace(w.matrix(), w.dim_left(), w.dim_right(), Side::right);
  const Matrix right =
      partial_trace(w.matrix(), w.dim_left(), w.dim_right(), Side::left);
  return frobenius_distance(w.matrix(), tensor(left, right)) < tol;
}

/// PPT is decisive for separability only when dim_left * dim_right <= 6.
inline bool ppt_is_decisive(std::size_t dim_left, std::size_t dim_right) {
  return dim_left * dim_right <= 6;
}

/// (|0,0> + |1,1> + ... ) / sqrt(d) on C^d (x) C^d.
inline BipartiteState maximally_entangled_state(std::size_t d) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(d * d));
  for (std::size_t j = 0; j < d; ++j)
    v(static_cast<Eigen::Index>(j * d + j)) = 1.0;
  return BipartiteState(DensityOperator::pure(v), d, d);
}

/// Haar-random pure state, resampled until its negativity exceeds 0.05.
inline BipartiteState random_entangled_state(
    std::size_t dim_left, std::size_t dim_right, Rng& rng) {
  if (dim_left < 2 || dim_right < 2)
    throw DimensionError("random_entangled_state: dims must be >= 2");
  for (;;) {
    BipartiteState w(
        DensityOperator::pure(random_unit_vector(dim_left * dim_right, rng)),
        dim_left, dim_right);
    if (negativity(w) > 0.05) return w;
  }
}

inline BipartiteState random_entangled_state(
    std::size_t dim_left, std::size_t dim_right, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return random_entangled_state(dim_left, dim_right, rng);
}

enum class Verdict { entanglement_breaking_consistent, counterexample_found };

inline const char* to_string(Verdict v) {
  return v == Verdict::entanglement_breaking_consistent
             ? "entanglement_breaking_consistent"
             : "counterexample_found";
}

struct EbCertificate {
  std::string instrument;
  std::size_t trials = 0;
  std::size_t env_dim = 0;
  std::uint64_t seed = 0;
  double max_negativity = 0.0;
  Verdict verdict = Verdict::entanglement_breaking_consistent;
  /// True when every tested output was (numerically) a product state or PPT
  /// is decisive at these dims, so "PPT" can be read as "separable".
  bool separability_certified = false;
  /// Input state that produced max_negativity, when above threshold.
  std::optional<BipartiteState> counterexample;
  std::string counterexample_outcome;
};

namespace detail {

struct ProbeTally {
  double max_negativity = 0.0;
  bool all_product = true;
  std::optional<BipartiteState> worst_input;
  std::string worst_outcome;
};

inline void probe_instrument(
    const Instrument& inst, const BipartiteState& input, ProbeTally& tally) {
  const auto dl = input.dim_left();
  const auto dout = inst.output_dim();
  for (const auto& o : inst.outcomes()) {
    if (o.kraus.empty()) continue;
    Matrix out =
        local_kraus_action(input.matrix(), dl, input.dim_right(), o.kraus);
    const double p = out.trace().real();
    if (p <= inst.tol()) continue;
    out /= p;
    out = (out + out.adjoint()) * 0.5;
    const double neg = negativity(out, dl, dout);
    if (tally.all_product) {
      const Matrix left = partial_trace(out, dl, dout, Side::right);
      const Matrix right = partial_trace(out, dl, dout, Side::left);
      tally.all_product =
          frobenius_distance(out, tensor(left, right)) < kNegativityThreshold;
    }
    if (neg > tally.max_negativity) {
      tally.max_negativity = neg;
      if (neg > kNegativityThreshold) {
        tally.worst_input = input;
        tally.worst_outcome = o.label;
      }
    }
  }
}

}  // namespace detail

/// Monte Carlo check that id (x) I_i leaves no entanglement. First probes
/// with the maximally entangled state on C^d_in (x) C^d_in (Choi probe), then
/// `trials` random entangled states on C^dim_env (x) C^d_in; trial t draws
/// from make_rng(seed, t + 1), so trials are order independent.
inline EbCertificate certify_entanglement_breaking(
    const Instrument& inst, std::size_t dim_env, std::size_t trials = 200,
    std::uint64_t seed = 42, std::string name = "instrument") {
  const auto din = inst.input_dim();
  if (dim_env < 2 || din < 2)
    throw DimensionError("certify: env and system dims must be >= 2");

  detail::ProbeTally tally;
  detail::probe_instrument(inst, maximally_entangled_state(din), tally);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = make_rng(seed, t + 1);
    detail::probe_instrument(
        inst, random_entangled_state(dim_env, din, rng), tally);
  }

  EbCertificate cert;
  cert.instrument = std::move(name);
  cert.trials = trials;
  cert.env_dim = dim_env;
  cert.seed = seed;
  cert.max_negativity = tally.max_negativity;
  cert.verdict = tally.max_negativity > kNegativityThreshold
                     ? Verdict::counterexample_found
                     : Verdict::entanglement_breaking_consistent;
  if (cert.verdict == Verdict::counterexample_found) {
    cert.counterexample = tally.worst_input;
    cert.counterexample_outcome = tally.worst_outcome;
  } else {
    cert.separability_certified =
        tally.all_product || (ppt_is_decisive(dim_env, inst.output_dim()) &&
                              ppt_is_decisive(din, inst.output_dim()));
  }
  return cert;
}

/// Entangled input that survives the Lueders measurement of outcome i when
/// M_i has rank >= 2: with v_1, v_2 the top eigenvectors of M_i, the state
/// proportional to |0>|v_1>/sqrt(l_1) + |1>|v_2>/sqrt(l_2) on C^2 (x) C^d is
/// mapped by I (x) sqrt(M_i) onto a maximally entangled state (negativity 1/2).
inline BipartiteState luders_witness_state(const Povm& p, std::size_t i) {
  const auto eig = hermitian_eig(p.effects.at(i), p.tol);
  if (eig.values.size() < 2 || eig.values[1] <= p.tol)
    throw InvalidPovmError("luders_witness_state: effect has rank < 2");
  const Vector v1 = eig.vectors.col(0) / std::sqrt(eig.values[0]);
  const Vector v2 = eig.vectors.col(1) / std::sqrt(eig.values[1]);
  const Vector psi =
      tensor(Vector(basis_vector(2, 0)), v1) +
      tensor(Vector(basis_vector(2, 1)), v2);
  return BipartiteState(DensityOperator::pure(psi), 2, p.dim());
}

}  // namespace cqm
