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
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "cqm/linalg.hpp"
#include "cqm/random.hpp"

namespace cqm {

class InvalidPovmError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Discrete POVM: ordered effects with outcome labels. Holds any data of the
/// right shape; positivity and normalization are checked by validate_povm,
/// and operations that need a valid POVM call require_valid.
struct Povm {
  std::vector<Matrix> effects;
  std::vector<std::string> labels;
  double tol = kDefaultTol;

  std::size_t dim() const {
    return effects.empty() ? 0 : rows(effects.front());
  }
  std::size_t size() const noexcept { return effects.size(); }
};

/// Builds a Povm after structural checks (non-empty, square, equal dims,
/// finite entries, one label per effect). Missing labels become "0", "1", ...
inline Povm make_povm(
    std::vector<Matrix> effects, std::vector<std::string> labels = {},
    double tol = kDefaultTol) {
  if (effects.empty()) throw InvalidPovmError("POVM has no effects");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be > 0");
  const auto d = effects.front().rows();
  for (const auto& e : effects) {
    if (e.rows() != e.cols() || e.rows() != d || d == 0)
      throw DimensionError("POVM effects must be square and of equal dim");
    if (!all_finite(e)) throw InvalidPovmError("effect has non-finite entries");
  }
  if (labels.empty()) {
    for (std::size_t i = 0; i < effects.size(); ++i)
      labels.push_back(std::to_string(i));
  }
  if (labels.size() != effects.size())
    throw InvalidPovmError("label count differs from effect count");
  return Povm{std::move(effects), std::move(labels), tol};
}

/// Projective measurement in the standard basis of C^dim.
inline Povm computational_pvm(std::size_t dim, double tol = kDefaultTol) {
  std::vector<Matrix> effects;
  for (std::size_t i = 0; i < dim; ++i)
    effects.push_back(projector(basis_vector(dim, i)));
  return make_povm(std::move(effects), {}, tol);
}

struct PovmReport {
  std::vector<double> hermiticity_defects;
  /// max(0, -smallest eigenvalue) per effect.
  std::vector<double> psd_violations;
  /// Spectral norm of (sum of effects - I).
  double normalization_residual = 0.0;
  bool passed = false;
};

inline PovmReport validate_povm(const Povm& p) {
  PovmReport report;
  const auto d = p.dim();
  Matrix sum = Matrix::Zero(d, d);
  bool ok = !p.effects.empty();
  for (const auto& e : p.effects) {
    const double defect = hermiticity_defect(e);
    const Matrix herm = (e + e.adjoint()) * 0.5;
    const auto values = hermitian_eigenvalues(herm, defect + 1.0);
    const double violation = std::max(0.0, -values.back());
    report.hermiticity_defects.push_back(defect);
    report.psd_violations.push_back(violation);
    ok = ok && defect <= p.tol && violation <= p.tol;
    sum += herm;
  }
  report.normalization_residual =
      spectral_norm_hermitian(sum - identity(d), 1.0);
  report.passed = ok && report.normalization_residual <= p.tol;
  return report;
}

inline void require_valid(const Povm& p) {
  const auto report = validate_povm(p);
  if (!report.passed)
    throw InvalidPovmError(
        "invalid POVM (normalization residual " +
        std::to_string(report.normalization_residual) + ")");
}

/// Number of eigenvalues above tol.
inline std::size_t effect_rank(const Matrix& effect, double tol = kDefaultTol) {
  const auto values = hermitian_eigenvalues(effect, tol);
  if (!values.empty() && values.back() < -tol)
    throw InvalidPovmError("effect_rank: effect is not positive semidefinite");
  return static_cast<std::size_t>(std::count_if(
      values.begin(), values.end(), [tol](double v) { return v > tol; }));
}

/// Rank-1 refinement: outcome (i, k) has effect |d_ik><d_ik| and
/// sum_k |d_ik><d_ik| = M_i. Indices i and k are 0-based.
struct RefinedPovm {
  std::size_t dim = 0;
  std::vector<std::string> parent_labels;
  /// vectors[i][k] = d_ik
  std::vector<std::vector<Vector>> vectors;
  double tol = kDefaultTol;

  std::size_t parent_size() const noexcept { return vectors.size(); }

  std::vector<std::size_t> multiplicities() const {
    std::vector<std::size_t> m;
    for (const auto& v : vectors) m.push_back(v.size());
    return m;
  }

  std::size_t max_multiplicity() const {
    std::size_t k = 0;
    for (const auto& v : vectors) k = std::max(k, v.size());
    return k;
  }

  std::size_t outcome_count() const {
    std::size_t n = 0;
    for (const auto& v : vectors) n += v.size();
    return n;
  }

  Matrix effect(std::size_t i, std::size_t k) const {
    return projector(vectors.at(i).at(k));
  }

  static std::string refined_label(const std::string& parent, std::size_t k) {
    return parent + ":" + std::to_string(k);
  }

  /// The rank-1 POVM on pairs (i, k), flattened in (i, k) lexicographic
  /// order with labels "<parent>:<k>".
  Povm as_rank_one_povm() const {
    Povm p;
    p.tol = tol;
    for (std::size_t i = 0; i < vectors.size(); ++i)
      for (std::size_t k = 0; k < vectors[i].size(); ++k) {
        p.effects.push_back(effect(i, k));
        p.labels.push_back(refined_label(parent_labels.at(i), k));
      }
    return p;
  }
};

/// Maximal rank-1 refinement. d_ik = sqrt(lambda_k) v_k over the eigenvalues
/// lambda_k > tol of M_i, k ordered by descending lambda (hermitian_eig
/// conventions fix the remaining freedom).
inline RefinedPovm maximally_refine(const Povm& p) {
  require_valid(p);
  RefinedPovm r;
  r.dim = p.dim();
  r.parent_labels = p.labels;
  r.tol = p.tol;
  for (const auto& e : p.effects) {
    const auto eig = hermitian_eig(e, p.tol);
    std::vector<Vector> ds;
    for (std::size_t k = 0; k < eig.values.size(); ++k) {
      if (eig.values[k] <= p.tol) break;
      ds.emplace_back(
          std::sqrt(eig.values[k]) *
          eig.vectors.col(static_cast<Eigen::Index>(k)));
    }
    r.vectors.push_back(std::move(ds));
  }
  return r;
}

/// M_i = sum_k |d_ik><d_ik|.
inline Povm coarse_grain(const RefinedPovm& r) {
  Povm p;
  p.tol = r.tol;
  p.labels = r.parent_labels;
  for (const auto& ds : r.vectors) {
    Matrix m = Matrix::Zero(r.dim, r.dim);
    for (const auto& d : ds) m += projector(d);
    p.effects.push_back(std::move(m));
  }
  return p;
}

inline bool is_pvm(const Povm& p) {
  return std::all_of(p.effects.begin(), p.effects.end(), [&](const Matrix& e) {
    return (e * e - e).cwiseAbs().maxCoeff() <= p.tol;
  });
}

inline bool is_rank_one(const Povm& p) {
  return std::all_of(p.effects.begin(), p.effects.end(), [&](const Matrix& e) {
    return effect_rank(e, p.tol) == 1;
  });
}

/// tr[rho M_i] for every outcome.
inline std::vector<double> outcome_probabilities(
    const DensityOperator& rho, const Povm& p) {
  if (rho.dim() != p.dim())
    throw DimensionError("outcome_probabilities: state/POVM dim mismatch");
  std::vector<double> probs;
  probs.reserve(p.size());
  for (const auto& e : p.effects)
    probs.push_back((rho.matrix() * e).trace().real());
  return probs;
}

struct IcReport {
  bool informationally_complete = false;
  std::size_t span_dimension = 0;
};

/// Real span dimension of the effects inside the d^2-dimensional real space
/// of Hermitian matrices, via the rank of their Gram matrix
/// G_ab = Re tr[M_a M_b]. Eigenvalues of G above tol * max(1, lambda_max)
/// count toward the rank.
inline IcReport is_informationally_complete(const Povm& p) {
  const auto n = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b <= a; ++b) {
      const double g =
          (p.effects[a].conjugate().cwiseProduct(p.effects[b])).sum().real();
      gram(a, b) = g;
      gram(b, a) = g;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      gram, Eigen::EigenvaluesOnly);
  const auto& values = solver.eigenvalues();
  const double cutoff = p.tol * std::max(1.0, values.maxCoeff());
  IcReport report;
  report.span_dimension = static_cast<std::size_t>((values.array() > cutoff).count());
  const auto d = p.dim();
  report.informationally_complete = report.span_dimension == d * d;
  return report;
}

/// Self-adjoint operator given by distinct eigenvalues and their mutually
/// orthogonal eigenprojections summing to I.
class SharpObservable {
 public:
  SharpObservable(
      std::vector<double> eigenvalues, std::vector<Matrix> projections,
      double tol = kDefaultTol)
      : eigenvalues_(std::move(eigenvalues)),
        projections_(std::move(projections)),
        tol_(tol) {
    if (eigenvalues_.empty() || eigenvalues_.size() != projections_.size())
      throw InvalidPovmError("sharp observable: eigenvalue/projection count");
    const auto d = projections_.front().rows();
    Matrix sum = Matrix::Zero(d, d);
    for (std::size_t a = 0; a < projections_.size(); ++a) {
      const Matrix& pa = projections_[a];
      if (pa.rows() != d || pa.cols() != d)
        throw DimensionError("sharp observable: projection dims differ");
      if (!is_hermitian(pa, tol_) ||
          (pa * pa - pa).cwiseAbs().maxCoeff() > tol_)
        throw InvalidPovmError("sharp observable: not an orthogonal projection");
      for (std::size_t b = 0; b < a; ++b) {
        if (std::abs(eigenvalues_[a] - eigenvalues_[b]) <= tol_)
          throw InvalidPovmError("sharp observable: eigenvalues not distinct");
        if ((pa * projections_[b]).cwiseAbs().maxCoeff() > tol_)
          throw InvalidPovmError("sharp observable: projections overlap");
      }
      sum += pa;
    }
    if ((sum - identity(rows(sum))).cwiseAbs().maxCoeff() > tol_)
      throw InvalidPovmError("sharp observable: projections do not sum to I");
  }

  /// Groups the spectrum of a Hermitian matrix into distinct eigenvalues
  /// (descending) and their eigenprojections.
  static SharpObservable from_hermitian(
      const Matrix& h, double tol = kDefaultTol) {
    const auto eig = hermitian_eig(h, tol);
    std::vector<double> values;
    std::vector<Matrix> projections;
    for (std::size_t j = 0; j < eig.values.size(); ++j) {
      const auto v = eig.vectors.col(static_cast<Eigen::Index>(j));
      if (values.empty() || values.back() - eig.values[j] > tol) {
        values.push_back(eig.values[j]);
        projections.push_back(v * v.adjoint());
      } else {
        projections.back() += v * v.adjoint();
      }
    }
    return SharpObservable(std::move(values), std::move(projections), tol);
  }

  /// Non-degenerate observable diag(1, 2, ..., dim) in the standard basis.
  static SharpObservable standard_basis(std::size_t dim) {
    std::vector<double> values;
    std::vector<Matrix> projections;
    for (std::size_t k = 0; k < dim; ++k) {
      values.push_back(static_cast<double>(k + 1));
      projections.push_back(projector(basis_vector(dim, k)));
    }
    return SharpObservable(std::move(values), std::move(projections));
  }

  const std::vector<double>& eigenvalues() const noexcept {
    return eigenvalues_;
  }
  const std::vector<Matrix>& projections() const noexcept {
    return projections_;
  }
  std::size_t size() const noexcept { return eigenvalues_.size(); }
  std::size_t dim() const { return rows(projections_.front()); }
  double tol() const noexcept { return tol_; }

  /// Unit eigenvector phi_k: the first canonical basis vector of ran N_k.
  Vector eigenvector(std::size_t k) const {
    const auto eig = hermitian_eig(projections_.at(k), tol_);
    return eig.vectors.col(0);
  }

  Matrix operator_matrix() const {
    Matrix n = Matrix::Zero(dim(), dim());
    for (std::size_t k = 0; k < size(); ++k)
      n += eigenvalues_[k] * projections_[k];
    return n;
  }

  Povm as_povm() const {
    std::vector<std::string> labels;
    for (double a : eigenvalues_) labels.push_back(std::to_string(a));
    return make_povm(projections_, std::move(labels), tol_);
  }

 private:
  std::vector<double> eigenvalues_;
  std::vector<Matrix> projections_;
  double tol_;
};

/// Random POVM: effects S^{-1/2} A_i A_i^dagger S^{-1/2} with Ginibre A_i
/// and S = sum_i A_i A_i^dagger. With random_ranks the A_i are dim x r_i,
/// r_i uniform in [1, dim], so effect ranks vary.
inline Povm random_povm(
    std::size_t dim, std::size_t outcomes, Rng& rng, bool random_ranks = true) {
  if (dim == 0 || outcomes == 0)
    throw std::invalid_argument("random_povm: dim and outcomes must be > 0");
  std::vector<std::size_t> ranks(outcomes, dim);
  if (random_ranks) {
    std::uniform_int_distribution<std::size_t> pick(1, dim);
    for (auto& r : ranks) r = pick(rng);
    std::size_t total = 0;
    for (auto r : ranks) total += r;
    // S must be invertible.
    for (std::size_t i = 0; total < dim; i = (i + 1) % outcomes)
      if (ranks[i] < dim) ++ranks[i], ++total;
  }
  std::vector<Matrix> raw;
  Matrix s = Matrix::Zero(dim, dim);
  for (auto r : ranks) {
    const Matrix a = ginibre(dim, r, rng);
    raw.push_back(a * a.adjoint());
    s += raw.back();
  }
  const auto eig = hermitian_eig((s + s.adjoint()) * 0.5);
  Matrix s_inv_sqrt = Matrix::Zero(dim, dim);
  for (std::size_t j = 0; j < eig.values.size(); ++j) {
    const auto v = eig.vectors.col(static_cast<Eigen::Index>(j));
    s_inv_sqrt += (1.0 / std::sqrt(eig.values[j])) * (v * v.adjoint());
  }
  std::vector<Matrix> effects;
  for (const auto& m : raw) {
    Matrix e = s_inv_sqrt * m * s_inv_sqrt;
    effects.push_back((e + e.adjoint()) * 0.5);
  }
  return make_povm(std::move(effects));
}

}  // namespace cqm
