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
#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace cqm {

using Complex = std::complex<double>;

/// Dense complex matrix, row-major. Every operator in the library is one of
/// these; Hilbert spaces are finite and small (dim up to a few hundred).
using Matrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

inline constexpr double kDefaultTol = 1e-9;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NotHermitianError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidStateError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Which factor of a bipartite space an operation acts on.
enum class Side { left, right };

inline Matrix identity(std::size_t n) {
  return Matrix::Identity(
      static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
}

inline Vector basis_vector(std::size_t dim, std::size_t index) {
  if (index >= dim) throw DimensionError("basis index out of range");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return v;
}

/// |v><v|
inline Matrix projector(const Vector& v) { return v * v.adjoint(); }

inline std::size_t rows(const Matrix& m) {
  return static_cast<std::size_t>(m.rows());
}
inline std::size_t cols(const Matrix& m) {
  return static_cast<std::size_t>(m.cols());
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

/// Largest entrywise modulus of m - m^dagger.
inline double hermiticity_defect(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("matrix is not square");
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Matrix& m, double tol = kDefaultTol) {
  return m.rows() == m.cols() && hermiticity_defect(m) <= tol;
}

/// Kronecker product; the left factor owns the slow index.
inline Matrix tensor(const Matrix& a, const Matrix& b) {
  const Eigen::Index ar = a.rows(), ac = a.cols();
  const Eigen::Index br = b.rows(), bc = b.cols();
  Matrix out(ar * br, ac * bc);
  for (Eigen::Index i = 0; i < ar; ++i)
    for (Eigen::Index j = 0; j < ac; ++j)
      out.block(i * br, j * bc, br, bc) = a(i, j) * b;
  return out;
}

inline Vector tensor(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline double frobenius_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("frobenius_distance: shape mismatch");
  return (a - b).norm();
}

/// Spectrum of a Hermitian matrix. Eigenvalues are descending; column j of
/// `vectors` is the unit eigenvector for `values[j]`.
struct EigenDecomposition {
  std::vector<double> values;
  Matrix vectors;
};

namespace detail {

inline Eigen::MatrixXcd hermitian_part(const Matrix& h) {
  Eigen::MatrixXcd m = h;
  return (m + m.adjoint()) * 0.5;
}

/// Rotates v so that its first largest-modulus entry is real and >= 0.
inline void fix_phase(Eigen::Ref<Eigen::VectorXcd> v) {
  if (v.size() == 0) return;
  const double top = v.cwiseAbs().maxCoeff();
  if (top == 0.0) return;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= top - 1e-12) {
      v *= std::conj(v(i)) / std::abs(v(i));
      v(i) = std::abs(v(i));
      return;
    }
  }
}

/// Orthonormal basis of the range of the projector p, obtained by
/// Gram-Schmidt over p*e_0, p*e_1, ... in index order. `rank` columns.
inline Eigen::MatrixXcd canonical_range_basis(
    const Eigen::MatrixXcd& p, Eigen::Index rank) {
  const Eigen::Index n = p.rows();
  Eigen::MatrixXcd basis(n, rank);
  Eigen::Index found = 0;
  // Accepting residuals above 1e-3 always yields `rank` vectors for n < 1e6.
  for (Eigen::Index j = 0; j < n && found < rank; ++j) {
    Eigen::VectorXcd v = p.col(j);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index q = 0; q < found; ++q)
        v -= basis.col(q) * basis.col(q).dot(v);
    const double norm = v.norm();
    if (norm > 1e-3) basis.col(found++) = v / norm;
  }
  if (found < rank)
    throw std::logic_error("canonical_range_basis: rank deficiency");
  return basis;
}

}  // namespace detail

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues come out descending. Eigenvalues closer than `tol` to the
/// first member of their group form a degenerate cluster; its eigenspace is
/// given the canonical basis obtained by Gram-Schmidt on the projections of
/// e_0, e_1, ..., so diagonal inputs yield standard basis vectors in index
/// order and the output never depends on solver internals. Finally every
/// eigenvector's first largest-modulus component is made real and >= 0.
inline EigenDecomposition hermitian_eig(
    const Matrix& h, double tol = kDefaultTol) {
  if (h.rows() != h.cols())
    throw DimensionError("hermitian_eig: matrix is not square");
  if (!all_finite(h)) throw std::invalid_argument("hermitian_eig: non-finite");
  const double defect = hermiticity_defect(h);
  if (defect > tol)
    throw NotHermitianError(
        "hermitian_eig: input not Hermitian (defect " +
        std::to_string(defect) + ")");

  const Eigen::Index n = h.rows();
  EigenDecomposition out;
  if (n == 0) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
      detail::hermitian_part(h));
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("hermitian_eig: eigensolver failed");
  const Eigen::VectorXd& asc = solver.eigenvalues();
  const Eigen::MatrixXcd& vec = solver.eigenvectors();

  // Clusters in ascending order, then emitted in reverse.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> clusters;
  for (Eigen::Index i = 0; i < n;) {
    Eigen::Index j = i + 1;
    while (j < n && asc(j) - asc(i) <= tol) ++j;
    clusters.emplace_back(i, j);
    i = j;
  }

  out.values.reserve(static_cast<std::size_t>(n));
  out.vectors.resize(n, n);
  Eigen::Index col = 0;
  for (auto it = clusters.rbegin(); it != clusters.rend(); ++it) {
    const auto [lo, hi] = *it;
    const Eigen::Index size = hi - lo;
    Eigen::MatrixXcd block;
    if (size == 1) {
      block = vec.col(lo);
    } else {
      const Eigen::MatrixXcd sub = vec.middleCols(lo, size);
      block = detail::canonical_range_basis(sub * sub.adjoint(), size);
    }
    // Within a cluster eigenvalues are emitted descending as well.
    for (Eigen::Index q = 0; q < size; ++q) {
      Eigen::VectorXcd v = block.col(q);
      detail::fix_phase(v);
      out.vectors.col(col) = v;
      out.values.push_back(asc(hi - 1 - q));
      ++col;
    }
  }
  return out;
}

/// Eigenvalues only, descending. Cheaper than hermitian_eig.
inline std::vector<double> hermitian_eigenvalues(
    const Matrix& h, double tol = kDefaultTol) {
  if (h.rows() != h.cols())
    throw DimensionError("hermitian_eigenvalues: matrix is not square");
  if (hermiticity_defect(h) > tol)
    throw NotHermitianError("hermitian_eigenvalues: input not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
      detail::hermitian_part(h), Eigen::EigenvaluesOnly);
  std::vector<double> values(
      solver.eigenvalues().data(),
      solver.eigenvalues().data() + solver.eigenvalues().size());
  std::reverse(values.begin(), values.end());
  return values;
}

/// Largest |eigenvalue| of a Hermitian matrix.
inline double spectral_norm_hermitian(const Matrix& h, double tol = kDefaultTol) {
  const auto values = hermitian_eigenvalues(h, tol);
  if (values.empty()) return 0.0;
  return std::max(std::abs(values.front()), std::abs(values.back()));
}

/// Principal square root of a positive semidefinite matrix. Eigenvalues in
/// [-tol, 0) are clamped to zero; anything more negative is rejected.
/// Eigenvalues at roundoff level (below 64 eps times the largest) are also
/// dropped, since their square roots would be far above roundoff.
inline Matrix psd_sqrt(const Matrix& h, double tol = kDefaultTol) {
  const auto eig = hermitian_eig(h, tol);
  Matrix out = Matrix::Zero(h.rows(), h.cols());
  const double floor =
      eig.values.empty()
          ? 0.0
          : 64.0 * std::numeric_limits<double>::epsilon() *
                std::max(1.0, std::abs(eig.values.front()));
  for (std::size_t j = 0; j < eig.values.size(); ++j) {
    const double lambda = eig.values[j];
    if (lambda < -tol)
      throw InvalidStateError("psd_sqrt: matrix is not positive semidefinite");
    if (lambda <= floor) continue;
    const auto v = eig.vectors.col(static_cast<Eigen::Index>(j));
    out += std::sqrt(lambda) * (v * v.adjoint());
  }
  return out;
}

/// exp(-i g t) for Hermitian g, via its spectral decomposition.
inline Matrix unitary_exp(const Matrix& g, double t, double tol = kDefaultTol) {
  const auto eig = hermitian_eig(g, tol);
  Matrix out = Matrix::Zero(g.rows(), g.cols());
  for (std::size_t j = 0; j < eig.values.size(); ++j) {
    const auto v = eig.vectors.col(static_cast<Eigen::Index>(j));
    out += std::polar(1.0, -eig.values[j] * t) * (v * v.adjoint());
  }
  return out;
}

/// Density matrix: Hermitian, unit trace, positive semidefinite (all within
/// the stored tolerance). Checked on construction.
class DensityOperator {
 public:
  explicit DensityOperator(Matrix m, double tol = kDefaultTol)
      : matrix_(std::move(m)), tol_(tol) {
    if (!(tol_ > 0.0)) throw std::invalid_argument("tolerance must be > 0");
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0)
      throw DimensionError("density operator must be a non-empty square");
    if (!all_finite(matrix_))
      throw InvalidStateError("density operator has non-finite entries");
    if (hermiticity_defect(matrix_) > tol_)
      throw InvalidStateError("density operator is not Hermitian");
    if (std::abs(matrix_.trace() - Complex(1.0)) > tol_)
      throw InvalidStateError("density operator trace differs from 1");
    const auto values = hermitian_eigenvalues(matrix_, tol_);
    if (values.back() < -tol_)
      throw InvalidStateError("density operator has a negative eigenvalue");
  }

  /// |v><v| / <v|v>.
  static DensityOperator pure(const Vector& v, double tol = kDefaultTol) {
    const double norm = v.norm();
    if (!(norm > 0.0)) throw InvalidStateError("pure state of a zero vector");
    return DensityOperator(projector(v / norm), tol);
  }

  static DensityOperator maximally_mixed(std::size_t dim) {
    return DensityOperator(identity(dim) / static_cast<double>(dim));
  }

  const Matrix& matrix() const noexcept { return matrix_; }
  std::size_t dim() const noexcept { return rows(matrix_); }
  double tol() const noexcept { return tol_; }

 private:
  Matrix matrix_;
  double tol_;
};

/// Density operator on left (x) right with fixed subsystem ordering.
class BipartiteState {
 public:
  BipartiteState(
      DensityOperator state, std::size_t dim_left, std::size_t dim_right)
      : state_(std::move(state)), dim_left_(dim_left), dim_right_(dim_right) {
    if (dim_left_ == 0 || dim_right_ == 0 ||
        dim_left_ * dim_right_ != state_.dim())
      throw DimensionError("bipartite dims do not match the state dimension");
  }

  const DensityOperator& state() const noexcept { return state_; }
  const Matrix& matrix() const noexcept { return state_.matrix(); }
  std::size_t dim_left() const noexcept { return dim_left_; }
  std::size_t dim_right() const noexcept { return dim_right_; }
  double tol() const noexcept { return state_.tol(); }

 private:
  DensityOperator state_;
  std::size_t dim_left_;
  std::size_t dim_right_;
};

inline void check_bipartite(
    const Matrix& m, std::size_t dim_left, std::size_t dim_right) {
  if (m.rows() != m.cols() || dim_left == 0 || dim_right == 0 ||
      rows(m) != dim_left * dim_right)
    throw DimensionError("operator does not live on the declared bipartition");
}

/// Traces out `traced` and returns the operator on the other factor.
inline Matrix partial_trace(
    const Matrix& m, std::size_t dim_left, std::size_t dim_right,
    Side traced) {
  check_bipartite(m, dim_left, dim_right);
  const auto dl = static_cast<Eigen::Index>(dim_left);
  const auto dr = static_cast<Eigen::Index>(dim_right);
  if (traced == Side::right) {
    Matrix out(dl, dl);
    for (Eigen::Index a = 0; a < dl; ++a)
      for (Eigen::Index b = 0; b < dl; ++b)
        out(a, b) = m.block(a * dr, b * dr, dr, dr).trace();
    return out;
  }
  Matrix out = Matrix::Zero(dr, dr);
  for (Eigen::Index a = 0; a < dl; ++a) out += m.block(a * dr, a * dr, dr, dr);
  return out;
}

inline DensityOperator partial_trace(const BipartiteState& w, Side traced) {
  return DensityOperator(
      partial_trace(w.matrix(), w.dim_left(), w.dim_right(), traced), w.tol());
}

/// Transposes the indices of one factor only.
inline Matrix partial_transpose(
    const Matrix& m, std::size_t dim_left, std::size_t dim_right, Side side) {
  check_bipartite(m, dim_left, dim_right);
  const auto dl = static_cast<Eigen::Index>(dim_left);
  const auto dr = static_cast<Eigen::Index>(dim_right);
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index a = 0; a < dl; ++a)
    for (Eigen::Index b = 0; b < dl; ++b) {
      if (side == Side::right) {
        out.block(a * dr, b * dr, dr, dr) =
            m.block(a * dr, b * dr, dr, dr).transpose();
      } else {
        out.block(a * dr, b * dr, dr, dr) = m.block(b * dr, a * dr, dr, dr);
      }
    }
  return out;
}

inline Matrix partial_transpose(const BipartiteState& w, Side side) {
  return partial_transpose(w.matrix(), w.dim_left(), w.dim_right(), side);
}

}  // namespace cqm
