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

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cqm/linalg.hpp"
#include "cqm/povm.hpp"

namespace cqm {

class InvalidInstrumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnknownOutcomeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

struct InstrumentOutcome {
  std::string label;
  /// output_dim x input_dim each.
  std::vector<Matrix> kraus;
};

/// Outcome-indexed CP maps in Kraus form, I_i(rho) = sum_j K_ij rho K_ij^dag.
/// The constructor checks shapes and sum_ij K_ij^dag K_ij = I.
class Instrument {
 public:
  Instrument(
      std::size_t input_dim, std::size_t output_dim,
      std::vector<InstrumentOutcome> outcomes, double tol = kDefaultTol)
      : input_dim_(input_dim),
        output_dim_(output_dim),
        outcomes_(std::move(outcomes)),
        tol_(tol) {
    if (input_dim_ == 0 || output_dim_ == 0)
      throw DimensionError("instrument dims must be positive");
    if (outcomes_.empty())
      throw InvalidInstrumentError("instrument has no outcomes");
    Matrix total = Matrix::Zero(input_dim_, input_dim_);
    for (const auto& o : outcomes_) {
      for (const auto& k : o.kraus) {
        if (rows(k) != output_dim_ || cols(k) != input_dim_)
          throw DimensionError("Kraus operator has the wrong shape");
        if (!all_finite(k))
          throw InvalidInstrumentError("Kraus operator has non-finite entries");
        total += k.adjoint() * k;
      }
    }
    const double residual =
        (total - identity(input_dim_)).cwiseAbs().maxCoeff();
    if (residual > tol_)
      throw InvalidInstrumentError(
          "instrument is not trace preserving (residual " +
          std::to_string(residual) + ")");
  }

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const noexcept { return output_dim_; }
  std::size_t size() const noexcept { return outcomes_.size(); }
  double tol() const noexcept { return tol_; }
  const std::vector<InstrumentOutcome>& outcomes() const noexcept {
    return outcomes_;
  }
  const InstrumentOutcome& outcome(std::size_t i) const {
    if (i >= outcomes_.size())
      throw UnknownOutcomeError("outcome index " + std::to_string(i));
    return outcomes_[i];
  }

  std::size_t index_of(const std::string& label) const {
    for (std::size_t i = 0; i < outcomes_.size(); ++i)
      if (outcomes_[i].label == label) return i;
    throw UnknownOutcomeError("unknown outcome label '" + label + "'");
  }

  /// Non-normalized I_i(rho).
  Matrix apply(std::size_t i, const Matrix& rho) const {
    if (rows(rho) != input_dim_ || cols(rho) != input_dim_)
      throw DimensionError("instrument input dim mismatch");
    Matrix out = Matrix::Zero(output_dim_, output_dim_);
    for (const auto& k : outcome(i).kraus) out += k * rho * k.adjoint();
    return out;
  }

  /// E_i = sum_j K_ij^dag K_ij, the POVM effect measured by outcome i.
  Matrix effect(std::size_t i) const {
    Matrix e = Matrix::Zero(input_dim_, input_dim_);
    for (const auto& k : outcome(i).kraus) e += k.adjoint() * k;
    return e;
  }

 private:
  std::size_t input_dim_;
  std::size_t output_dim_;
  std::vector<InstrumentOutcome> outcomes_;
  double tol_;
};

/// Lueders instrument: one Kraus operator sqrt(M_i) per outcome.
inline Instrument luders_instrument(const Povm& p) {
  require_valid(p);
  std::vector<InstrumentOutcome> outcomes;
  for (std::size_t i = 0; i < p.size(); ++i)
    outcomes.push_back({p.labels[i], {psd_sqrt(p.effects[i], p.tol)}});
  return Instrument(p.dim(), p.dim(), std::move(outcomes), p.tol);
}

namespace detail {

/// Kraus operators sqrt(s_j) |u_j><d| realizing rho -> <d|rho|d> sigma.
inline std::vector<Matrix> prepare_kraus(
    const Vector& d, const DensityOperator& sigma) {
  const auto eig = hermitian_eig(sigma.matrix(), sigma.tol());
  std::vector<Matrix> kraus;
  for (std::size_t j = 0; j < eig.values.size(); ++j) {
    if (eig.values[j] <= 0.0) continue;
    const auto u = eig.vectors.col(static_cast<Eigen::Index>(j));
    kraus.emplace_back(std::sqrt(eig.values[j]) * (u * d.adjoint()));
  }
  return kraus;
}

}  // namespace detail

/// Measure-and-prepare instrument I_ik(rho) = <d_ik|rho|d_ik> sigma_ik, one
/// output state per refined outcome in (i, k) lexicographic order.
inline Instrument rank1_prepare_instrument(
    const RefinedPovm& r, const std::vector<DensityOperator>& outputs) {
  if (outputs.size() != r.outcome_count())
    throw InvalidInstrumentError("one output state per refined outcome");
  if (outputs.empty())
    throw InvalidInstrumentError("refinement has no outcomes");
  const auto out_dim = outputs.front().dim();
  std::vector<InstrumentOutcome> outcomes;
  std::size_t n = 0;
  for (std::size_t i = 0; i < r.parent_size(); ++i)
    for (std::size_t k = 0; k < r.vectors[i].size(); ++k, ++n) {
      if (outputs[n].dim() != out_dim)
        throw DimensionError("output states must share one dimension");
      outcomes.push_back(
          {RefinedPovm::refined_label(r.parent_labels[i], k),
           detail::prepare_kraus(r.vectors[i][k], outputs[n])});
    }
  return Instrument(r.dim, out_dim, std::move(outcomes), r.tol);
}

/// Same for a POVM whose effects are all rank 1, M_i = |d_i><d_i|.
inline Instrument rank1_prepare_instrument(
    const Povm& p, const std::vector<DensityOperator>& outputs) {
  require_valid(p);
  if (outputs.size() != p.size())
    throw InvalidInstrumentError("one output state per outcome");
  const auto refined = maximally_refine(p);
  for (const auto& ds : refined.vectors)
    if (ds.size() != 1)
      throw InvalidPovmError("rank1_prepare_instrument: effect is not rank-1");
  std::vector<InstrumentOutcome> outcomes;
  for (std::size_t i = 0; i < p.size(); ++i)
    outcomes.push_back(
        {p.labels[i], detail::prepare_kraus(refined.vectors[i][0], outputs[i])});
  return Instrument(p.dim(), outputs.front().dim(), std::move(outcomes), p.tol);
}

/// Minimal measurement model of a refined POVM: system (x) ancilla with
/// pointer basis e_i (standard basis of the ancilla, one per parent outcome),
/// probe xi and an interaction U with U(psi (x) xi) =
/// sum_i sum_k <d_ik|psi> phi_ik (x) e_i. Usually phi_ik = phi_k.
struct MeasurementModel {
  std::size_t system_dim = 0;
  std::size_t ancilla_dim = 0;
  Vector probe;
  /// posterior[i][k] = phi_ik
  std::vector<std::vector<Vector>> posterior;
  Matrix interaction;
  RefinedPovm refinement;
  double tol = kDefaultTol;

  Vector pointer(std::size_t i) const { return basis_vector(ancilla_dim, i); }
};

namespace detail {

/// Columns of `seed` (orthonormal) completed to an orthonormal basis of
/// C^n by Gram-Schmidt over e_0, e_1, ... in order.
inline Eigen::MatrixXcd complete_orthonormal(
    const Eigen::MatrixXcd& seed, Eigen::Index n) {
  Eigen::MatrixXcd basis(n, n);
  Eigen::Index found = seed.cols();
  basis.leftCols(found) = seed;
  for (Eigen::Index j = 0; j < n && found < n; ++j) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Unit(n, j);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index q = 0; q < found; ++q)
        v -= basis.col(q) * basis.col(q).dot(v);
    const double norm = v.norm();
    if (norm > 1e-6) basis.col(found++) = v / norm;
  }
  if (found < n) throw std::logic_error("orthonormal completion failed");
  return basis;
}

inline std::vector<std::vector<Vector>> shared_posterior(
    const RefinedPovm& r, const std::vector<Vector>& phi) {
  if (phi.size() < r.max_multiplicity())
    throw DimensionError("need at least max_i m_i posterior vectors");
  std::vector<std::vector<Vector>> out;
  for (const auto& ds : r.vectors)
    out.emplace_back(phi.begin(), phi.begin() + static_cast<std::ptrdiff_t>(ds.size()));
  return out;
}

}  // namespace detail

/// Builds the isometry V psi = sum_ik <d_ik|psi> phi_ik (x) e_i, checks
/// V^dag V = I and extends it to a unitary on system (x) ancilla. Ancilla
/// dimension is the number of parent outcomes; the probe defaults to e_0.
/// Columns of U indexed by (j, a) with the ancilla basis rotated so that
/// a = 0 is the probe; remaining columns come from Gram-Schmidt over the
/// standard basis in order.
inline MeasurementModel build_measurement_model(
    const RefinedPovm& r, std::vector<std::vector<Vector>> posterior,
    std::optional<Vector> probe = std::nullopt) {
  const auto d = static_cast<Eigen::Index>(r.dim);
  const auto n = static_cast<Eigen::Index>(r.parent_size());
  if (posterior.size() != r.parent_size())
    throw DimensionError("need one posterior list per outcome");
  for (std::size_t i = 0; i < posterior.size(); ++i) {
    if (posterior[i].size() != r.vectors[i].size())
      throw DimensionError("need one posterior vector per refined outcome");
    for (const auto& phi : posterior[i])
      if (phi.size() != d)
        throw DimensionError("posterior vectors must live in the system space");
  }

  Vector xi = probe.value_or(basis_vector(r.parent_size(), 0));
  if (xi.size() != n) throw DimensionError("probe must live in the ancilla");
  if (std::abs(xi.norm() - 1.0) > r.tol)
    throw InvalidStateError("probe vector is not normalized");

  // V: d -> d*n.
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(d * n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    const auto& ds = r.vectors[ii];
    for (std::size_t k = 0; k < ds.size(); ++k) {
      const Vector out = tensor(
          Vector(posterior[ii][k]), Vector(basis_vector(r.parent_size(), ii)));
      v += out * ds[k].adjoint();
    }
  }
  const double iso_residual =
      (v.adjoint() * v - Eigen::MatrixXcd::Identity(d, d)).norm();
  if (iso_residual > r.tol)
    throw InvalidInstrumentError(
        "measurement model is not an isometry (residual " +
        std::to_string(iso_residual) + ")");

  // W: ancilla unitary with W e_0 = xi.
  const Eigen::MatrixXcd w = detail::complete_orthonormal(xi, n);
  // U' maps e_j (x) e_a to V e_j for a = 0; U = U' (I (x) W^dag).
  const Eigen::MatrixXcd completed = detail::complete_orthonormal(v, d * n);
  Eigen::MatrixXcd u_prime(d * n, d * n);
  Eigen::Index extra = d;
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index a = 0; a < n; ++a)
      u_prime.col(j * n + a) =
          a == 0 ? completed.col(j) : completed.col(extra++);
  const Matrix w_full = tensor(identity(r.dim), Matrix(w));
  Matrix u = u_prime * w_full.adjoint();

  MeasurementModel m;
  m.system_dim = r.dim;
  m.ancilla_dim = r.parent_size();
  m.probe = std::move(xi);
  m.posterior = std::move(posterior);
  m.interaction = std::move(u);
  m.refinement = r;
  m.tol = r.tol;
  return m;
}

/// Same with phi_ik = phi_k, the first m_i of `posterior` for outcome i.
inline MeasurementModel build_measurement_model(
    const RefinedPovm& r, const std::vector<Vector>& posterior,
    std::optional<Vector> probe = std::nullopt) {
  return build_measurement_model(
      r, detail::shared_posterior(r, posterior), std::move(probe));
}

/// Instrument of a measurement model: K_i = (I (x) <e_i|) U (I (x) |xi>),
/// so I_i(rho) = sum_kl <d_ik|rho|d_il> |phi_ik><phi_il|.
inline Instrument model_induced_instrument(const MeasurementModel& m) {
  const Matrix probe_embed = tensor(identity(m.system_dim), Matrix(m.probe));
  const Matrix after = m.interaction * probe_embed;  // (d*n) x d
  std::vector<InstrumentOutcome> outcomes;
  for (std::size_t i = 0; i < m.ancilla_dim; ++i) {
    const Matrix read =
        tensor(identity(m.system_dim), Matrix(m.pointer(i).adjoint()));
    outcomes.push_back({m.refinement.parent_labels[i], {read * after}});
  }
  return Instrument(m.system_dim, m.system_dim, std::move(outcomes), m.tol);
}

/// Instrument with Kraus operators K_i = sum_k |phi_k><d_ik| built straight
/// from the refinement (no dilation).
inline Instrument refinement_instrument(
    const RefinedPovm& r, const std::vector<Vector>& posterior) {
  if (posterior.size() < r.max_multiplicity())
    throw DimensionError("need at least max_i m_i posterior vectors");
  std::vector<InstrumentOutcome> outcomes;
  for (std::size_t i = 0; i < r.parent_size(); ++i) {
    Matrix k = Matrix::Zero(r.dim, r.dim);
    for (std::size_t l = 0; l < r.vectors[i].size(); ++l)
      k += posterior[l] * r.vectors[i][l].adjoint();
    outcomes.push_back({r.parent_labels[i], {std::move(k)}});
  }
  return Instrument(r.dim, r.dim, std::move(outcomes), r.tol);
}

class InsufficientEigenvaluesError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Complete measurement of p: the refinement instrument with posterior
/// vectors phi_k = eigenvectors of n, followed by the Lueders measurement of
/// n. Outcome (i, k) has Kraus N_k K_i = |phi_k><d_ik| and label
/// "<label_i>:<k>".
inline Instrument complete_measurement(
    const Povm& p, const SharpObservable& n) {
  const auto r = maximally_refine(p);
  if (n.dim() != p.dim())
    throw DimensionError("multiplicity observable acts on another space");
  if (n.size() < r.max_multiplicity())
    throw InsufficientEigenvaluesError(
        "observable has " + std::to_string(n.size()) +
        " eigenvalues, need at least " + std::to_string(r.max_multiplicity()));
  std::vector<Vector> phi;
  for (std::size_t k = 0; k < r.max_multiplicity(); ++k)
    phi.push_back(n.eigenvector(k));
  const Instrument first = refinement_instrument(r, phi);
  std::vector<InstrumentOutcome> outcomes;
  for (std::size_t i = 0; i < r.parent_size(); ++i) {
    const Matrix& ki = first.outcome(i).kraus.front();
    for (std::size_t k = 0; k < r.vectors[i].size(); ++k)
      outcomes.push_back(
          {RefinedPovm::refined_label(r.parent_labels[i], k),
           {n.projections()[k] * ki}});
  }
  return Instrument(p.dim(), p.dim(), std::move(outcomes), p.tol);
}

/// Complete measurement with the default multiplicity observable
/// diag(1, ..., d).
inline Instrument complete_measurement(const Povm& p) {
  return complete_measurement(p, SharpObservable::standard_basis(p.dim()));
}

/// Probability and, when it exceeds tol, the normalized posterior state.
/// `post_state` is empty on a zero-probability branch.
struct MeasurementResult {
  double probability = 0.0;
  std::optional<DensityOperator> post_state;
};

inline MeasurementResult apply_instrument(
    const Instrument& inst, const DensityOperator& rho, std::size_t outcome) {
  if (rho.dim() != inst.input_dim())
    throw DimensionError("apply_instrument: state/instrument dim mismatch");
  Matrix out = inst.apply(outcome, rho.matrix());
  MeasurementResult result;
  result.probability = out.trace().real();
  if (result.probability > inst.tol()) {
    out /= result.probability;
    result.post_state.emplace((out + out.adjoint()) * 0.5, rho.tol());
  }
  return result;
}

inline MeasurementResult apply_instrument(
    const Instrument& inst, const DensityOperator& rho,
    const std::string& label) {
  return apply_instrument(inst, rho, inst.index_of(label));
}

/// (I (x) sum_j K_j . K_j^dag) on left (x) right, blockwise so the identity
/// factor is never materialized. Kraus columns that are exactly zero are
/// skipped, which matters for the sparse position-measurement operators.
inline Matrix local_kraus_action(
    const Matrix& omega, std::size_t dim_left, std::size_t dim_in,
    const std::vector<Matrix>& kraus) {
  check_bipartite(omega, dim_left, dim_in);
  if (kraus.empty()) throw InvalidInstrumentError("empty Kraus list");
  const auto dl = static_cast<Eigen::Index>(dim_left);
  const auto din = static_cast<Eigen::Index>(dim_in);
  const auto dout = kraus.front().rows();
  Matrix out = Matrix::Zero(dl * dout, dl * dout);
  for (const auto& k : kraus) {
    if (k.cols() != din) throw DimensionError("Kraus/right dim mismatch");
    std::vector<Eigen::Index> support;
    for (Eigen::Index c = 0; c < din; ++c)
      if (!k.col(c).isZero(0.0)) support.push_back(c);
    if (support.empty()) continue;
    if (2 * static_cast<Eigen::Index>(support.size()) > din) {
      for (Eigen::Index a = 0; a < dl; ++a)
        for (Eigen::Index b = 0; b < dl; ++b)
          out.block(a * dout, b * dout, dout, dout).noalias() +=
              k * omega.block(a * din, b * din, din, din) * k.adjoint();
      continue;
    }
    const auto s = static_cast<Eigen::Index>(support.size());
    Matrix ks(dout, s);
    for (Eigen::Index c = 0; c < s; ++c) ks.col(c) = k.col(support[c]);
    Matrix sub(s, s);
    for (Eigen::Index a = 0; a < dl; ++a)
      for (Eigen::Index b = 0; b < dl; ++b) {
        for (Eigen::Index r = 0; r < s; ++r)
          for (Eigen::Index c = 0; c < s; ++c)
            sub(r, c) = omega(a * din + support[r], b * din + support[c]);
        out.block(a * dout, b * dout, dout, dout).noalias() +=
            ks * sub * ks.adjoint();
      }
  }
  return out;
}

struct LocalMeasurementResult {
  double probability = 0.0;
  std::optional<BipartiteState> post_state;
};

/// Applies id (x) I_X where X is a set of outcomes of an instrument acting
/// on the right factor.
inline LocalMeasurementResult apply_local_event(
    const BipartiteState& omega, const Instrument& inst,
    std::span<const std::size_t> outcomes) {
  if (omega.dim_right() != inst.input_dim())
    throw DimensionError("instrument does not act on the right subsystem");
  const auto dl = omega.dim_left();
  const auto dout = inst.output_dim();
  Matrix out = Matrix::Zero(dl * dout, dl * dout);
  for (auto i : outcomes) {
    if (inst.outcome(i).kraus.empty()) continue;
    out += local_kraus_action(
        omega.matrix(), dl, omega.dim_right(), inst.outcome(i).kraus);
  }
  LocalMeasurementResult result;
  result.probability = out.trace().real();
  if (result.probability > inst.tol()) {
    out /= result.probability;
    result.post_state.emplace(
        DensityOperator((out + out.adjoint()) * 0.5, omega.tol()), dl, dout);
  }
  return result;
}

inline LocalMeasurementResult apply_local_instrument(
    const BipartiteState& omega, const Instrument& inst, std::size_t outcome) {
  const std::size_t one[] = {outcome};
  return apply_local_event(omega, inst, one);
}

inline LocalMeasurementResult apply_local_instrument(
    const BipartiteState& omega, const Instrument& inst,
    const std::string& label) {
  return apply_local_instrument(omega, inst, inst.index_of(label));
}

/// The channel sum_i I_i as a one-outcome instrument.
inline Instrument instrument_channel(const Instrument& inst) {
  InstrumentOutcome all{"channel", {}};
  for (const auto& o : inst.outcomes())
    all.kraus.insert(all.kraus.end(), o.kraus.begin(), o.kraus.end());
  return Instrument(
      inst.input_dim(), inst.output_dim(), {std::move(all)}, inst.tol());
}

/// Sequential composition: outcome (i, k) has Kraus operators B_kl A_ij
/// (first `first`, then `second`). Labels "<first>|<second>".
inline Instrument sequential(const Instrument& first, const Instrument& second) {
  if (first.output_dim() != second.input_dim())
    throw DimensionError("sequential: output/input dim mismatch");
  std::vector<InstrumentOutcome> outcomes;
  for (const auto& a : first.outcomes())
    for (const auto& b : second.outcomes()) {
      InstrumentOutcome o{a.label + "|" + b.label, {}};
      for (const auto& kb : b.kraus)
        for (const auto& ka : a.kraus) o.kraus.push_back(kb * ka);
      outcomes.push_back(std::move(o));
    }
  return Instrument(
      first.input_dim(), second.output_dim(), std::move(outcomes),
      std::max(first.tol(), second.tol()));
}

}  // namespace cqm
