// Copyright 2026 The maxqfi Authors
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

// Dense complex linear algebra on top of Eigen. Every tolerance in this file
// is relative to max(1, ||A||_op) so that near-zero matrices behave.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "maxqfi/error.hpp"

namespace maxqfi {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

namespace linalg {

/// Eigenvalues ascending; eigenvectors are the columns of `vectors`.
struct EigenSystem {
  RealVector values;
  ComplexMatrix vectors;
};

inline ComplexMatrix identity(Eigen::Index n) { return ComplexMatrix::Identity(n, n); }

inline ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

inline ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0.0, -kI, kI, 0.0;
  return m;
}

inline ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline RealVector singular_values(const ComplexMatrix& a) {
  if (a.size() == 0) return RealVector();
  // BDCSVD falls back to one-sided Jacobi below 16 columns and is much
  // faster above that.
  Eigen::BDCSVD<ComplexMatrix> svd(a);
  return svd.singularValues();
}

/// Largest singular value.
inline double op_norm(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  return singular_values(a)(0);
}

/// Sum of singular values.
inline double trace_norm(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  return singular_values(a).sum();
}

inline double norm_scale(const ComplexMatrix& a) { return std::max(1.0, op_norm(a)); }

/// max_ij |A_ij - conj(A_ji)|
inline double hermitian_defect(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const ComplexMatrix& a, double rel_tol = 1e-12) {
  if (a.rows() != a.cols()) return false;
  if (a.size() == 0) return true;
  return hermitian_defect(a) <= rel_tol * norm_scale(a);
}

inline ComplexMatrix hermitian_part(const ComplexMatrix& a) { return 0.5 * (a + a.adjoint()); }

inline void require_square(const ComplexMatrix& a, const char* who) {
  if (a.rows() != a.cols())
    fail(ErrorCode::DimMismatch, std::string(who) + ": matrix is " + std::to_string(a.rows()) + "x" +
                                     std::to_string(a.cols()) + ", expected square");
}

inline void require_hermitian(const ComplexMatrix& a, const char* who, double rel_tol = 1e-12) {
  require_square(a, who);
  if (!is_hermitian(a, rel_tol))
    fail(ErrorCode::NotHermitian,
         std::string(who) + ": hermiticity defect " + std::to_string(hermitian_defect(a)));
}

/// Hermitian eigendecomposition. The input is symmetrized after the check so
/// that rounding-level asymmetry never leaks into the eigenvectors.
inline EigenSystem herm_eig(const ComplexMatrix& a, double rel_tol = 1e-12) {
  require_hermitian(a, "herm_eig", rel_tol);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(a));
  if (es.info() != Eigen::Success) fail(ErrorCode::NoConvergence, "herm_eig: eigensolver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

inline double min_eigenvalue(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(a), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail(ErrorCode::NoConvergence, "min_eigenvalue: eigensolver did not converge");
  return es.eigenvalues()(0);
}

inline double min_eigenvalue(const RealMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail(ErrorCode::NoConvergence, "min_eigenvalue: eigensolver did not converge");
  return es.eigenvalues()(0);
}

inline double max_eigenvalue(const RealMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail(ErrorCode::NoConvergence, "max_eigenvalue: eigensolver did not converge");
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

/// Square root of a PSD matrix. Eigenvalues in [-1e-10 ||A||, 0) are clamped.
inline ComplexMatrix psd_sqrt(const ComplexMatrix& a) {
  const EigenSystem es = herm_eig(a);
  const double scale = std::max(1.0, es.values.cwiseAbs().maxCoeff());
  RealVector roots(es.values.size());
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    const double v = es.values(i);
    if (v < -1e-10 * scale)
      fail(ErrorCode::NotPSD, "psd_sqrt: eigenvalue " + std::to_string(v) + " below clamp threshold");
    roots(i) = std::sqrt(std::max(v, 0.0));
  }
  return es.vectors * roots.asDiagonal() * es.vectors.adjoint();
}

/// exp(-i H t) for Hermitian H.
inline ComplexMatrix herm_exp(const ComplexMatrix& h, double t) {
  const EigenSystem es = herm_eig(h);
  ComplexVector phases(es.values.size());
  for (Eigen::Index i = 0; i < es.values.size(); ++i) phases(i) = std::exp(-kI * (es.values(i) * t));
  return es.vectors * phases.asDiagonal() * es.vectors.adjoint();
}

inline double unitarity_defect(const ComplexMatrix& u) {
  if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
  return op_norm(u.adjoint() * u - identity(u.rows()));
}

}  // namespace linalg
}  // namespace maxqfi
